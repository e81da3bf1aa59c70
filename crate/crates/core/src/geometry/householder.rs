use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Orthogonal `Q` with `Q v = -e1` for a unit vector `v`.
///
/// `Q` is a Householder reflection (or its negation), so `det Q` may be `-1`;
/// only the isometry is needed downstream. The reflection vector is picked to
/// avoid cancellation: `v + e1` when `v1 > 0`, otherwise `-(I - 2ww^T)` with
/// `w = v - e1`.
pub fn householder_to_minus_e1(v: &DVector<f64>) -> Result<DMatrix<f64>> {
    let n = v.len();
    if n == 0 {
        return Err(Error::pre("vector must be non-empty"));
    }
    let norm = v.norm();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::pre(format!(
            "expected a unit vector, norm is {norm}"
        )));
    }
    let mut w = v.clone();
    let flip = if v[0] > 0.0 {
        w[0] += 1.0;
        false
    } else {
        if v[0] == -1.0 && v.iter().skip(1).all(|&c| c == 0.0) {
            return Ok(DMatrix::identity(n, n));
        }
        w[0] -= 1.0;
        true
    };
    let scale = 2.0 / w.norm_squared();
    let mut q = DMatrix::identity(n, n) - (&w * w.transpose()) * scale;
    if flip {
        q.neg_mut();
    }
    Ok(q)
}
