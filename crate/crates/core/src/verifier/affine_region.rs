use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::network::{Activation, Network};

/// Depth threshold for "deep interior", as a fraction of the image diameter.
pub const DEEP_FRACTION: f64 = 0.05;

const SUPPORT_DIRECTIONS: usize = 512;
const SUPPORT_SEED: u64 = 0x6166_6669_6e65;
const FLATNESS: f64 = 1e-9;

/// Samples sharing one ReLU activation pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternGroup {
    /// On/off state of every hidden unit, layer by layer.
    pub pattern: Vec<bool>,
    pub samples: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffineRegionReport {
    /// Groups in order of their first sample.
    pub groups: Vec<PatternGroup>,
    /// Samples whose image lies deeper than `threshold` inside the hull of
    /// all images.
    pub deep: Vec<usize>,
    pub threshold: f64,
    /// Number of distinct patterns among the deep samples.
    pub deep_patterns: usize,
}

impl AffineRegionReport {
    /// True when all deep samples share one pattern, hence one affine map.
    pub fn consistent(&self) -> bool {
        self.deep_patterns <= 1
    }

    /// Index into `groups` of the group containing `sample`.
    pub fn group_of(&self, sample: usize) -> Option<usize> {
        self.groups.iter().position(|g| g.samples.contains(&sample))
    }
}

/// Groups samples by activation pattern and checks that the samples whose
/// images lie deep inside the image cloud share a single pattern.
///
/// Depth is the distance to the boundary of the convex hull of the images.
/// It is exact in one and two dimensions; in higher dimensions it is the
/// minimum slack over the coordinate directions and a fixed set of random
/// support directions, which may overestimate it slightly.
pub fn affine_region_check(net: &Network, samples: &PointCloud) -> Result<AffineRegionReport> {
    let dim = net.input_dim();
    if samples.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: samples.dim(),
        });
    }
    if net
        .layers()
        .iter()
        .any(|l| l.activation != Activation::Relu)
    {
        return Err(Error::pre("affine region check needs a ReLU network"));
    }
    if net.width() > dim || net.output_dim() != dim {
        return Err(Error::pre(
            "affine region check needs width and output dimension equal to the input dimension",
        ));
    }

    let mut groups: Vec<PatternGroup> = Vec::new();
    let mut images = Vec::with_capacity(samples.len());
    for (i, x) in samples.iter().enumerate() {
        let mut pattern = Vec::new();
        let mut h = x.clone();
        for layer in net.layers() {
            let pre = layer.pre_activation(&h);
            pattern.extend(pre.iter().map(|&t| t > 0.0));
            h = pre.map(|t| t.max(0.0));
        }
        images.push(net.final_weights() * h + net.final_bias());
        match groups.iter_mut().find(|g| g.pattern == pattern) {
            Some(g) => g.samples.push(i),
            None => groups.push(PatternGroup {
                pattern,
                samples: vec![i],
            }),
        }
    }

    let threshold = DEEP_FRACTION * diameter(&images);
    let depth = hull_depth(&images);
    let deep: Vec<usize> = (0..images.len())
        .filter(|&i| threshold > 0.0 && depth[i] > threshold)
        .collect();
    let mut deep_groups: Vec<usize> = deep
        .iter()
        .map(|&i| {
            groups
                .iter()
                .position(|g| g.samples.contains(&i))
                .expect("every sample is grouped")
        })
        .collect();
    deep_groups.sort_unstable();
    deep_groups.dedup();
    Ok(AffineRegionReport {
        groups,
        deep,
        threshold,
        deep_patterns: deep_groups.len(),
    })
}

fn diameter(points: &[DVector<f64>]) -> f64 {
    let mut best = 0.0f64;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            best = best.max((&points[i] - &points[j]).norm());
        }
    }
    best
}

/// Distance from each point to the boundary of the hull of all points, or
/// zero for every point when the hull has empty interior.
fn hull_depth(points: &[DVector<f64>]) -> Vec<f64> {
    let n = points.len();
    if n == 0 {
        return Vec::new();
    }
    let dim = points[0].len();
    let normals = match dim {
        1 => vec![
            DVector::from_element(1, 1.0),
            DVector::from_element(1, -1.0),
        ],
        2 => match hull_normals_2d(points) {
            Some(normals) => normals,
            None => return vec![0.0; n],
        },
        _ => {
            if is_flat(points) {
                return vec![0.0; n];
            }
            let mut rng = ChaCha8Rng::seed_from_u64(SUPPORT_SEED);
            let mut dirs: Vec<DVector<f64>> = Vec::with_capacity(2 * dim + SUPPORT_DIRECTIONS);
            for i in 0..dim {
                let e = DVector::from_fn(dim, |j, _| if i == j { 1.0 } else { 0.0 });
                dirs.push(-&e);
                dirs.push(e);
            }
            for _ in 0..SUPPORT_DIRECTIONS {
                let u: DVector<f64> = DVector::from_fn(dim, |_, _| StandardNormal.sample(&mut rng));
                dirs.push(u.normalize());
            }
            dirs
        }
    };
    let support: Vec<f64> = normals
        .iter()
        .map(|u| {
            points
                .iter()
                .map(|p| u.dot(p))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    if dim == 1 && support[0] + support[1] <= 0.0 {
        return vec![0.0; n];
    }
    points
        .iter()
        .map(|p| {
            normals
                .iter()
                .zip(&support)
                .map(|(u, s)| s - u.dot(p))
                .fold(f64::INFINITY, f64::min)
                .max(0.0)
        })
        .collect()
}

/// Outward unit normals of the hull edges, or `None` for a degenerate hull.
fn hull_normals_2d(points: &[DVector<f64>]) -> Option<Vec<DVector<f64>>> {
    let mut pts: Vec<(f64, f64)> = points.iter().map(|p| (p[0], p[1])).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    if pts.len() < 3 {
        return None;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    // Andrew's monotone chain, counter-clockwise.
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(f64, f64)>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2
                && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    if hull.len() < 3 {
        return None;
    }
    let scale = pts
        .iter()
        .map(|p| p.0.abs().max(p.1.abs()))
        .fold(0.0f64, f64::max)
        .max(f64::MIN_POSITIVE);
    let area: f64 = (0..hull.len())
        .map(|i| {
            let (a, b) = (hull[i], hull[(i + 1) % hull.len()]);
            a.0 * b.1 - a.1 * b.0
        })
        .sum::<f64>()
        * 0.5;
    if area <= FLATNESS * scale * scale {
        return None;
    }
    Some(
        (0..hull.len())
            .map(|i| {
                let (a, b) = (hull[i], hull[(i + 1) % hull.len()]);
                DVector::from_vec(vec![b.1 - a.1, a.0 - b.0]).normalize()
            })
            .collect(),
    )
}

fn is_flat(points: &[DVector<f64>]) -> bool {
    let dim = points[0].len();
    if points.len() <= dim {
        return true;
    }
    let mean = points.iter().fold(DVector::zeros(dim), |acc, p| acc + p) / points.len() as f64;
    let centred = DMatrix::from_columns(&points.iter().map(|p| p - &mean).collect::<Vec<_>>());
    let sv = centred.singular_values();
    let largest = sv.max();
    largest <= 0.0 || sv.min() <= FLATNESS * largest
}
