use std::cmp::Ordering;
use std::collections::BinaryHeap;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::network::{Evaluator, Network};

// Index boxes with at most this many grid points are evaluated directly.
const LEAF_POINTS: usize = 32;
const PRUNE_RELATIVE: f64 = 1e-12;
/// Grid maxima are resolved to this fraction of the verdict tolerance.
const RESOLUTION: f64 = 1e-6;

/// Axis-aligned box `[lower, upper]` with nonempty interior.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxRegion {
    lower: DVector<f64>,
    upper: DVector<f64>,
}

impl BoxRegion {
    pub fn new(lower: DVector<f64>, upper: DVector<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                got: upper.len(),
            });
        }
        if lower.is_empty() {
            return Err(Error::pre("box must have at least one dimension"));
        }
        let ok = lower
            .iter()
            .zip(upper.iter())
            .all(|(l, u)| l.is_finite() && u.is_finite() && l < u);
        if !ok {
            return Err(Error::pre("box needs finite bounds with lower < upper"));
        }
        Ok(Self { lower, upper })
    }

    /// `[0, 1]^dim`.
    pub fn unit(dim: usize) -> Result<Self> {
        Self::new(DVector::zeros(dim), DVector::from_element(dim, 1.0))
    }

    /// `[-r, r]^dim`.
    pub fn symmetric(dim: usize, r: f64) -> Result<Self> {
        Self::new(
            DVector::from_element(dim, -r),
            DVector::from_element(dim, r),
        )
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &DVector<f64> {
        &self.lower
    }

    pub fn upper(&self) -> &DVector<f64> {
        &self.upper
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaxPrincipleReport {
    pub interior_max: f64,
    pub boundary_max: f64,
    pub tolerance: f64,
    pub violated: bool,
    /// Interior grid point attaining `interior_max` when violated.
    pub witness: Option<DVector<f64>>,
}

/// Reports for `F` and for `-F`; the latter checks the minimum.
#[derive(Debug, Clone, PartialEq)]
pub struct PrincipleReport {
    pub maximum: MaxPrincipleReport,
    pub minimum: MaxPrincipleReport,
}

impl PrincipleReport {
    pub fn violated(&self) -> bool {
        self.maximum.violated || self.minimum.violated
    }
}

/// Compares the largest value of `net` over interior grid points of `region`
/// with the largest over grid points on its faces, and likewise for `-net`.
///
/// Each axis gets `ceil(extent / h) + 1` equally spaced points, so the actual
/// spacing `h'` is at most `h`. The tolerance is `L h' √dim` for the
/// Lipschitz bound `L`. Grid maxima come from a best-first branch and bound
/// over index boxes that prunes with interval upper bounds and evaluates small
/// boxes point by point. The boundary maximum is exact up to `1e-6` times the
/// tolerance. The interior maximum is resolved to the same accuracy when it
/// exceeds `boundary_max + tolerance`; otherwise `interior_max` is the largest
/// interior value visited and the true one is at most `boundary_max +
/// tolerance`, so the verdict is unaffected.
pub fn max_principle_check(net: &Network, region: &BoxRegion, h: f64) -> Result<PrincipleReport> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::pre(format!("grid step must be positive, got {h}")));
    }
    if net.output_dim() != 1 {
        return Err(Error::pre("maximum principle check needs a scalar output"));
    }
    if net.input_dim() != region.dim() {
        return Err(Error::DimensionMismatch {
            expected: net.input_dim(),
            got: region.dim(),
        });
    }
    let lipschitz = net.lipschitz_bound()?;
    let grid = Grid::new(region, h);
    let tolerance = lipschitz * grid.max_step() * (region.dim() as f64).sqrt();
    Ok(PrincipleReport {
        maximum: check(net, &grid, tolerance),
        minimum: check(&net.negated(), &grid, tolerance),
    })
}

fn check(net: &Network, grid: &Grid, tolerance: f64) -> MaxPrincipleReport {
    let mut ev = net.evaluator();
    let resolution = RESOLUTION * tolerance;
    let boundary = grid_max(&mut ev, grid, grid.faces(), resolution, f64::NEG_INFINITY);
    let boundary_max = boundary.map_or(f64::NEG_INFINITY, |(v, _)| v);
    // Interior boxes that cannot beat the verdict level are never refined.
    let interior = grid_max(
        &mut ev,
        grid,
        grid.interior().into_iter().collect(),
        resolution,
        boundary_max + tolerance,
    );
    let (interior_max, arg) = interior.map_or((f64::NEG_INFINITY, None), |(v, x)| (v, Some(x)));
    let violated = interior_max > boundary_max + tolerance;
    MaxPrincipleReport {
        interior_max,
        boundary_max,
        tolerance,
        violated,
        witness: if violated {
            arg.map(DVector::from_vec)
        } else {
            None
        },
    }
}

struct Grid {
    lower: Vec<f64>,
    upper: Vec<f64>,
    step: Vec<f64>,
    count: Vec<usize>,
}

/// Inclusive ranges of grid indices, one per axis.
type IndexBox = Vec<(usize, usize)>;

impl Grid {
    fn new(region: &BoxRegion, h: f64) -> Self {
        let lower: Vec<f64> = region.lower.iter().copied().collect();
        let upper: Vec<f64> = region.upper.iter().copied().collect();
        let count: Vec<usize> = lower
            .iter()
            .zip(&upper)
            .map(|(l, u)| ((u - l) / h * (1.0 - 1e-12)).ceil() as usize + 1)
            .collect();
        let step = (0..lower.len())
            .map(|i| (upper[i] - lower[i]) / (count[i] - 1) as f64)
            .collect();
        Self {
            lower,
            upper,
            step,
            count,
        }
    }

    fn max_step(&self) -> f64 {
        self.step.iter().copied().fold(0.0, f64::max)
    }

    fn coord(&self, axis: usize, k: usize) -> f64 {
        if k + 1 == self.count[axis] {
            self.upper[axis]
        } else {
            self.lower[axis] + k as f64 * self.step[axis]
        }
    }

    fn point(&self, idx: &[usize], out: &mut Vec<f64>) {
        out.clear();
        out.extend(idx.iter().enumerate().map(|(a, &k)| self.coord(a, k)));
    }

    fn full(&self) -> IndexBox {
        self.count.iter().map(|&n| (0, n - 1)).collect()
    }

    fn faces(&self) -> Vec<IndexBox> {
        let mut faces = Vec::new();
        for axis in 0..self.count.len() {
            for k in [0, self.count[axis] - 1] {
                let mut face = self.full();
                face[axis] = (k, k);
                faces.push(face);
            }
        }
        faces
    }

    fn interior(&self) -> Option<IndexBox> {
        if self.count.iter().any(|&n| n < 3) {
            return None;
        }
        Some(self.count.iter().map(|&n| (1, n - 2)).collect())
    }
}

fn points_in(b: &IndexBox) -> usize {
    b.iter().map(|(lo, hi)| hi - lo + 1).product()
}

struct Node {
    upper_bound: f64,
    index_box: IndexBox,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    fn cmp(&self, other: &Self) -> Ordering {
        self.upper_bound.total_cmp(&other.upper_bound)
    }
}

struct Search<'a> {
    ev: &'a mut Evaluator,
    grid: &'a Grid,
    best: f64,
    resolution: f64,
    floor: f64,
    arg: Vec<f64>,
    x: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Search<'_> {
    fn visit(&mut self, idx: &[usize]) {
        let mut x = std::mem::take(&mut self.x);
        self.grid.point(idx, &mut x);
        let v = self.ev.eval_scalar(&x);
        if v > self.best {
            self.best = v;
            self.arg.clone_from(&x);
        }
        self.x = x;
    }

    fn upper_bound(&mut self, b: &IndexBox) -> f64 {
        self.lo.clear();
        self.hi.clear();
        for (axis, &(l, h)) in b.iter().enumerate() {
            self.lo.push(self.grid.coord(axis, l));
            self.hi.push(self.grid.coord(axis, h));
        }
        self.ev.interval(&self.lo, &self.hi).1[0]
    }

    fn threshold(&self) -> f64 {
        let slack = (PRUNE_RELATIVE * (1.0 + self.best.abs())).max(self.resolution);
        (self.best + slack).max(self.floor)
    }

    fn node(&mut self, b: IndexBox) -> Option<Node> {
        let centre: Vec<usize> = b.iter().map(|(l, h)| (l + h) / 2).collect();
        self.visit(&centre);
        let upper_bound = self.upper_bound(&b);
        (upper_bound > self.threshold()).then_some(Node {
            upper_bound,
            index_box: b,
        })
    }

    fn enumerate(&mut self, b: &IndexBox) {
        let mut idx: Vec<usize> = b.iter().map(|r| r.0).collect();
        loop {
            self.visit(&idx);
            let mut axis = 0;
            loop {
                if axis == idx.len() {
                    return;
                }
                if idx[axis] < b[axis].1 {
                    idx[axis] += 1;
                    break;
                }
                idx[axis] = b[axis].0;
                axis += 1;
            }
        }
    }
}

/// Maximum of the network over the grid points of `boxes`, exact up to
/// `resolution` and the relative pruning slack whenever it exceeds `floor`.
/// Otherwise the true maximum is at most `floor`.
fn grid_max(
    ev: &mut Evaluator,
    grid: &Grid,
    boxes: Vec<IndexBox>,
    resolution: f64,
    floor: f64,
) -> Option<(f64, Vec<f64>)> {
    if boxes.is_empty() {
        return None;
    }
    let dim = grid.count.len();
    let mut s = Search {
        ev,
        grid,
        best: f64::NEG_INFINITY,
        resolution,
        floor,
        arg: Vec::with_capacity(dim),
        x: Vec::with_capacity(dim),
        lo: Vec::with_capacity(dim),
        hi: Vec::with_capacity(dim),
    };
    let mut heap = BinaryHeap::new();
    for b in boxes {
        heap.extend(s.node(b));
    }
    while let Some(node) = heap.pop() {
        if node.upper_bound <= s.threshold() {
            break;
        }
        let b = node.index_box;
        if points_in(&b) <= LEAF_POINTS {
            s.enumerate(&b);
            continue;
        }
        let axis = (0..dim)
            .max_by_key(|&a| b[a].1 - b[a].0)
            .expect("nonempty box");
        let mid = (b[axis].0 + b[axis].1) / 2;
        let mut left = b.clone();
        left[axis].1 = mid;
        let mut right = b;
        right[axis].0 = mid + 1;
        heap.extend(s.node(left));
        heap.extend(s.node(right));
    }
    let best = s.best;
    Some((best, s.arg))
}
