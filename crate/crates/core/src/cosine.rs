//! Width-1 cosine networks `x ↦ cos(W2 cos(α(W1 x + b1))) / δ` fitting
//! arbitrary values on a finite set.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cloud::PointCloud;
use crate::constructors::generic_direction;
use crate::error::{Error, Result};
use crate::geometry::INJECTIVITY_GAP;
use crate::network::{Activation, Layer, Network};

/// Default upper end `T` of the scanned shift interval `[0, T]`.
pub const DEFAULT_SHIFT_BUDGET: f64 = 1e7;

const ALPHA_CANDIDATES: usize = 8;
const ALPHA_MAX_DRAWS: usize = 1000;
// Exact sin/cos re-seed interval for the rotation recurrence.
const RESEED_EVERY: u64 = 1024;
const RECURRENCE_SLACK: f64 = 1e-9;
const GOLDEN_ITERATIONS: usize = 80;

#[derive(Debug, Clone, PartialEq)]
pub struct CosineFitProblem {
    points: PointCloud,
    targets: Vec<f64>,
    epsilon: f64,
    delta: f64,
}

impl CosineFitProblem {
    /// Problem with `δ = min(1, 1 / max|target|)`.
    pub fn new(points: PointCloud, targets: Vec<f64>, epsilon: f64) -> Result<Self> {
        let peak = targets.iter().fold(0.0f64, |m, t| m.max(t.abs()));
        let delta = if peak > 1.0 { 1.0 / peak } else { 1.0 };
        Self::with_delta(points, targets, epsilon, delta)
    }

    pub fn with_delta(
        points: PointCloud,
        targets: Vec<f64>,
        epsilon: f64,
        delta: f64,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyData);
        }
        if targets.len() != points.len() {
            return Err(Error::DimensionMismatch {
                expected: points.len(),
                got: targets.len(),
            });
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::pre(format!(
                "epsilon must be positive, got {epsilon}"
            )));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::pre(format!("delta must be positive, got {delta}")));
        }
        if let Some(t) = targets.iter().find(|t| !t.is_finite()) {
            return Err(Error::pre(format!("target {t} is not finite")));
        }
        if let Some(t) = targets.iter().find(|t| delta * t.abs() > 1.0) {
            return Err(Error::pre(format!("delta * |{t}| exceeds 1")));
        }
        if points.min_pairwise_distance().is_some_and(|d| d <= 0.0) {
            return Err(Error::pre("points are not pairwise distinct"));
        }
        Ok(Self {
            points,
            targets,
            epsilon,
            delta,
        })
    }

    pub fn points(&self) -> &PointCloud {
        &self.points
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CosineFitResult {
    pub alpha: f64,
    pub w1: DVector<f64>,
    pub b1: f64,
    pub w2: f64,
    pub delta: f64,
    /// `max_j |cos(W2 z_j) - δ f(x_j)|`, measured on the assembled network.
    pub achieved_error: f64,
}

impl CosineFitResult {
    /// Two cosine layers of width 1 followed by the scaling `1/δ`.
    pub fn network(&self) -> Network {
        let n = self.w1.len();
        let first = Layer::new(
            DMatrix::from_row_slice(1, n, (&self.w1 * self.alpha).as_slice()),
            DVector::from_element(1, self.alpha * self.b1),
            Activation::Cosine,
        )
        .expect("1 x n layer");
        let second = Layer::new(
            DMatrix::from_element(1, 1, self.w2),
            DVector::zeros(1),
            Activation::Cosine,
        )
        .expect("1 x 1 layer");
        Network::new(
            vec![first, second],
            DMatrix::from_element(1, 1, 1.0 / self.delta),
            DVector::zeros(1),
        )
        .expect("chained widths")
    }
}

/// Affine functional `x ↦ W1·x + b1` sending the points to distinct values
/// in `[1, 4]`.
pub fn choose_projection(points: &PointCloud) -> Result<(DVector<f64>, f64)> {
    if points.is_empty() {
        return Err(Error::EmptyData);
    }
    let u = generic_direction(points)?;
    let (lo, hi) = points
        .iter()
        .map(|x| u.dot(x))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), t| {
            (lo.min(t), hi.max(t))
        });
    if points.len() == 1 || hi - lo <= 0.0 {
        return Ok((u, 1.0 - lo));
    }
    let scale = 3.0 / (hi - lo);
    let w1 = u * scale;
    let b1 = 1.0 - scale * lo;
    let y = project(points, &w1, b1);
    if y.iter().any(|&v| v <= 0.0) || min_gap(&y) <= INJECTIVITY_GAP {
        return Err(Error::pre("points are too close to separate by projection"));
    }
    Ok((w1, b1))
}

fn project(points: &PointCloud, w1: &DVector<f64>, b1: f64) -> Vec<f64> {
    points.iter().map(|x| w1.dot(x) + b1).collect()
}

fn min_gap(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min)
}

/// Scale `α ∈ [0, 1]` such that `z_j = cos(α y_j)` are distinct and nonzero.
///
/// Several uniform draws are scored by the smaller of the minimum gap between
/// the `z_j` and the minimum `|z_j|`; the best is kept, since nearly equal
/// `z_j` make the torus orbit slow to fill.
pub fn choose_alpha(y: &[f64], seed: u64) -> Result<f64> {
    if y.is_empty() {
        return Err(Error::EmptyData);
    }
    if y.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::pre("projected values must be positive"));
    }
    if min_gap(y) <= 0.0 {
        return Err(Error::pre("projected values must be distinct"));
    }
    let score = |alpha: f64| {
        let z: Vec<f64> = y.iter().map(|v| (alpha * v).cos()).collect();
        let smallest = z.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        min_gap(&z).min(smallest)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, f64)> = None;
    let mut accepted = 0;
    for _ in 0..ALPHA_MAX_DRAWS {
        let alpha: f64 = rng.random();
        let s = score(alpha);
        if s <= INJECTIVITY_GAP {
            continue;
        }
        if best.is_none_or(|(b, _)| s > b) {
            best = Some((s, alpha));
        }
        accepted += 1;
        if accepted == ALPHA_CANDIDATES {
            break;
        }
    }
    best.map(|(_, alpha)| alpha)
        .ok_or_else(|| Error::pre("no alpha in [0, 1] gives distinct nonzero cosines"))
}

/// `max_j |cos(w2 z_j) - t_j|`.
pub fn torus_residual(z: &[f64], targets: &[f64], w2: f64) -> f64 {
    z.iter()
        .zip(targets)
        .map(|(z, t)| ((w2 * z).cos() - t).abs())
        .fold(0.0, f64::max)
}

/// Shift `W2 ≥ 0` with `max_j |cos(W2 z_j) - t_j| < tol`.
///
/// Scans `W2 = k h` for `h = tol / (2 max|z_j|)` up to `budget`, so any
/// `W2*` with residual below `tol / 2` has a grid point within `tol`. The
/// first grid hit is then walked downhill along the grid and polished by a
/// golden-section search on the neighbouring cells. Results are checked by
/// direct evaluation.
pub fn fit_torus_shift(z: &[f64], targets: &[f64], tol: f64, budget: f64) -> Result<f64> {
    if z.is_empty() {
        return Err(Error::EmptyData);
    }
    if targets.len() != z.len() {
        return Err(Error::DimensionMismatch {
            expected: z.len(),
            got: targets.len(),
        });
    }
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::pre(format!("tolerance must be positive, got {tol}")));
    }
    if !(budget >= 0.0 && budget.is_finite()) {
        return Err(Error::pre(format!(
            "budget must be non-negative, got {budget}"
        )));
    }
    if z.iter().any(|v| !v.is_finite() || *v == 0.0) {
        return Err(Error::pre("frequencies must be finite and nonzero"));
    }
    if targets.iter().any(|t| !(t.abs() <= 1.0)) {
        return Err(Error::pre("targets must lie in [-1, 1]"));
    }

    let zmax = z.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let h = tol / (2.0 * zmax);
    let steps = (budget / h).floor() as u64;
    let residual = |w: f64| torus_residual(z, targets, w);

    let rot: Vec<(f64, f64)> = z.iter().map(|v| ((h * v).cos(), (h * v).sin())).collect();
    let mut c = vec![0.0; z.len()];
    let mut s = vec![0.0; z.len()];
    let mut best = (f64::INFINITY, 0u64);
    let mut hit = None;
    for k in 0..=steps {
        if k % RESEED_EVERY == 0 {
            let w = k as f64 * h;
            for j in 0..z.len() {
                (s[j], c[j]) = (w * z[j]).sin_cos();
            }
        }
        let err = c
            .iter()
            .zip(targets)
            .map(|(c, t)| (c - t).abs())
            .fold(0.0, f64::max);
        // The recurrence only screens; decisions use exact residuals.
        if err < best.0.max(tol) + RECURRENCE_SLACK {
            let exact = residual(k as f64 * h);
            if exact < tol {
                hit = Some(k);
                break;
            }
            if exact < best.0 {
                best = (exact, k);
            }
        }
        for j in 0..z.len() {
            let (rc, rs) = rot[j];
            (c[j], s[j]) = (c[j] * rc - s[j] * rs, s[j] * rc + c[j] * rs);
        }
    }

    let Some(mut k) = hit else {
        return Err(Error::SearchBudgetExceeded {
            best_shift: best.1 as f64 * h,
            best_error: best.0,
        });
    };
    let mut err = residual(k as f64 * h);
    loop {
        let next = residual((k + 1) as f64 * h);
        if next >= err {
            break;
        }
        k += 1;
        err = next;
    }
    let mut w2 = k as f64 * h;
    let lo = (w2 - h).max(0.0);
    let candidate = golden_section(residual, lo, w2 + h);
    if residual(candidate) < err {
        w2 = candidate;
    }
    Ok(w2)
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..GOLDEN_ITERATIONS {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        x1
    } else {
        x2
    }
}

/// Width-1, depth-3 cosine network with `max_j |F(x_j) - f(x_j)| < ε`.
pub fn cosine_fit(problem: &CosineFitProblem, seed: u64, budget: f64) -> Result<CosineFitResult> {
    let (w1, b1) = choose_projection(&problem.points)?;
    let y = project(&problem.points, &w1, b1);
    let alpha = choose_alpha(&y, seed)?;
    let mut result = CosineFitResult {
        alpha,
        w1,
        b1,
        w2: 0.0,
        delta: problem.delta,
        achieved_error: f64::INFINITY,
    };
    // Frequencies as the assembled network computes them.
    let first = result.network().layers()[0].clone();
    let z: Vec<f64> = problem.points.iter().map(|x| first.apply(x)[0]).collect();
    if z.iter().any(|v| v.abs() <= INJECTIVITY_GAP) {
        return Err(Error::pre(
            "first cosine layer produced a vanishing frequency",
        ));
    }
    let scaled: Vec<f64> = problem.targets.iter().map(|t| problem.delta * t).collect();
    let tol = problem.epsilon * problem.delta * (1.0 - 1e-9);
    result.w2 = fit_torus_shift(&z, &scaled, tol, budget)?;
    result.achieved_error = torus_residual(&z, &scaled, result.w2);
    Ok(result)
}
