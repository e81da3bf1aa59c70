use nalgebra::{DMatrix, DVector};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};

/// Minimum distance between projected points for the projection to count as
/// injective.
pub const INJECTIVITY_GAP: f64 = 1e-9;

/// Orthonormal basis (as matrix columns) of the span of `basis`.
pub fn orthonormal_basis(dim: usize, basis: &[DVector<f64>]) -> Result<DMatrix<f64>> {
    if basis.is_empty() {
        return Err(Error::pre("basis must contain at least one vector"));
    }
    if let Some(bad) = basis.iter().find(|v| v.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: bad.len(),
        });
    }
    if basis.len() > dim {
        return Err(Error::pre("more basis vectors than dimensions"));
    }
    let a = DMatrix::from_columns(basis);
    let scale = a.amax().max(f64::MIN_POSITIVE);
    let qr = a.qr();
    let r = qr.r();
    if (0..basis.len()).any(|i| r[(i, i)].abs() <= 1e-10 * scale) {
        return Err(Error::pre("basis vectors are linearly dependent"));
    }
    Ok(qr.q())
}

/// Projects `points + shift` orthogonally onto `span(basis)` and reports
/// whether the projected points are pairwise distinct.
pub fn projection_injectivity_check(
    points: &PointCloud,
    basis: &[DVector<f64>],
    shift: &DVector<f64>,
) -> Result<bool> {
    let dim = points.dim();
    if shift.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: shift.len(),
        });
    }
    if basis.len() >= dim {
        return Err(Error::pre(
            "subspace must have lower dimension than the points",
        ));
    }
    let q = orthonormal_basis(dim, basis)?;
    let coords: Vec<DVector<f64>> = points.iter().map(|x| q.tr_mul(&(x + shift))).collect();
    Ok(min_gap(&coords) > INJECTIVITY_GAP)
}

fn min_gap(coords: &[DVector<f64>]) -> f64 {
    if coords.len() < 2 {
        return f64::INFINITY;
    }
    if coords[0].len() == 1 {
        let mut values: Vec<f64> = coords.iter().map(|c| c[0]).collect();
        values.sort_by(f64::total_cmp);
        return values
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
    }
    let mut best = f64::INFINITY;
    for i in 0..coords.len() {
        for j in (i + 1)..coords.len() {
            best = best.min((&coords[i] - &coords[j]).norm());
        }
    }
    best
}
