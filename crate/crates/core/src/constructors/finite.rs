use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::geometry::{projection_injectivity_check, INJECTIVITY_GAP};
use crate::network::{Activation, Layer, Network};

const DIRECTION_SEED: u64 = 0x6e61_7272_6f77;
const DIRECTION_CANDIDATES: usize = 16;

/// Unit direction whose projection separates the points, chosen among a few
/// seeded random candidates by the largest minimum gap.
pub fn generic_direction(points: &PointCloud) -> Result<DVector<f64>> {
    let dim = points.dim();
    if dim == 1 {
        let u = DVector::from_element(1, 1.0);
        if min_gap(points, &u) > INJECTIVITY_GAP {
            return Ok(u);
        }
        return Err(Error::pre("points are not pairwise distinct"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(DIRECTION_SEED);
    let mut best: Option<(f64, DVector<f64>)> = None;
    for _ in 0..DIRECTION_CANDIDATES {
        let u: DVector<f64> = DVector::from_fn(dim, |_, _| StandardNormal.sample(&mut rng));
        let u = u.normalize();
        let gap = min_gap(points, &u);
        if best.as_ref().is_none_or(|(g, _)| gap > *g) {
            best = Some((gap, u));
        }
    }
    let (_, u) = best.expect("at least one candidate");
    if points.len() >= 2
        && !projection_injectivity_check(points, &[u.clone()], &DVector::zeros(dim))?
    {
        return Err(Error::pre("points are not pairwise distinct"));
    }
    Ok(u)
}

fn min_gap(points: &PointCloud, u: &DVector<f64>) -> f64 {
    let mut t: Vec<f64> = points.iter().map(|x| u.dot(x)).collect();
    t.sort_by(f64::total_cmp);
    t.windows(2)
        .map(|w| w[1] - w[0])
        .fold(f64::INFINITY, f64::min)
}

/// Width-2 ReLU network interpolating `values` on `points`.
///
/// The points are projected to a line and the piecewise linear interpolant
/// `y_1 + Σ c_k ReLU(t - t_k)` is built one breakpoint per hidden layer. One
/// unit carries `ReLU(t - t_k)`, the other accumulates the partial sum plus a
/// positive shift so that ReLU acts as the identity on the data.
pub fn finite_exact_fit(points: &PointCloud, values: &[f64]) -> Result<Network> {
    if points.is_empty() {
        return Err(Error::EmptyData);
    }
    if values.len() != points.len() {
        return Err(Error::DimensionMismatch {
            expected: points.len(),
            got: values.len(),
        });
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::pre("values must be finite"));
    }
    let dim = points.dim();
    if points.len() == 1 {
        return Network::constant(dim, values[0]);
    }
    let u = generic_direction(points)?;
    let mut order: Vec<(f64, f64)> = points
        .iter()
        .zip(values)
        .map(|(x, &y)| (u.dot(x), y))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let t: Vec<f64> = order.iter().map(|p| p.0).collect();
    let y: Vec<f64> = order.iter().map(|p| p.1).collect();
    let m = t.len();

    if m == 2 {
        let slope = (y[1] - y[0]) / (t[1] - t[0]);
        let w = DMatrix::from_fn(1, dim, |_, j| slope * u[j]);
        return Network::affine(w, DVector::from_element(1, y[0] - slope * t[0]));
    }

    let slopes: Vec<f64> = (0..m - 1)
        .map(|k| (y[k + 1] - y[k]) / (t[k + 1] - t[k]))
        .collect();
    // c[k] multiplies ReLU(t - t[k]).
    let c: Vec<f64> = (0..m - 1)
        .map(|k| {
            if k == 0 {
                slopes[0]
            } else {
                slopes[k] - slopes[k - 1]
            }
        })
        .collect();
    // Partial sums P_j = Σ_{k<j} c_k ReLU(t - t_k) on the data, j = 1..m-2,
    // and shifts D_j keeping P_j + D_j >= 1.
    let mut shifts = vec![1.0; m - 1];
    for j in 1..m - 1 {
        let min_partial = t
            .iter()
            .map(|&ti| (0..j).map(|k| c[k] * (ti - t[k]).max(0.0)).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        shifts[j] = 1.0 + (-min_partial).max(0.0);
    }

    let mut layers = Vec::with_capacity(m - 1);
    let mut w1 = DMatrix::zeros(2, dim);
    w1.set_row(0, &u.transpose());
    layers.push(Layer::new(
        w1,
        DVector::from_vec(vec![-t[0], shifts[0]]),
        Activation::Relu,
    )?);
    for j in 1..m - 1 {
        let w = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, c[j - 1], 1.0]);
        let b = DVector::from_vec(vec![-(t[j] - t[j - 1]), shifts[j] - shifts[j - 1]]);
        layers.push(Layer::new(w, b, Activation::Relu)?);
    }
    let final_w = DMatrix::from_row_slice(1, 2, &[c[m - 2], 1.0]);
    let final_b = DVector::from_element(1, y[0] - shifts[m - 2]);
    Network::new(layers, final_w, final_b)
}
