use nalgebra::{DMatrix, DVector};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::tolerance::tolerance;

/// Simplicial cone frame used by the collapse construction.
///
/// Columns of `frame` are `-u_j - delta*e1` where `u_1..u_{n-1}` are
/// `scale*e_2..scale*e_n` and `u_n = -scale*(e_2 + ... + e_n)`. Points with
/// strictly positive coordinates in this frame lie in the cone `S-`; points
/// whose negation has positive coordinates lie in `S+`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeFrame {
    pub delta: f64,
    pub scale: f64,
    pub frame: DMatrix<f64>,
    pub frame_inverse: DMatrix<f64>,
}

/// Largest `scale / delta` ratio tried before giving up.
pub const MAX_CONE_RATIO: f64 = (1u64 << 20) as f64;

impl ConeFrame {
    /// Frame for a given `delta` and `scale` in dimension `dim`.
    pub fn new(dim: usize, delta: f64, scale: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::pre("dimension must be positive"));
        }
        if !(delta > 0.0 && scale > 0.0) {
            return Err(Error::pre("delta and scale must be positive"));
        }
        let mut frame = DMatrix::zeros(dim, dim);
        for j in 0..dim {
            frame[(0, j)] = -delta;
            if dim > 1 {
                if j + 1 < dim {
                    frame[(j + 1, j)] = -scale;
                } else {
                    for i in 1..dim {
                        frame[(i, j)] = scale;
                    }
                }
            }
        }
        let frame_inverse = frame
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::pre("cone frame is singular"))?;
        Ok(Self {
            delta,
            scale,
            frame,
            frame_inverse,
        })
    }

    /// Frame coordinates `B^{-1} x`.
    pub fn coordinates(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.frame_inverse * x
    }

    /// `x` is in the open cone `S-` with coordinates above `tol`.
    pub fn contains_negative(&self, x: &DVector<f64>, tol: f64) -> bool {
        self.coordinates(x).iter().all(|&l| l > tol)
    }

    /// `x` is in the open cone `S+ = -S-` with coordinates above `tol`.
    pub fn contains_positive(&self, x: &DVector<f64>, tol: f64) -> bool {
        self.coordinates(x).iter().all(|&l| l < -tol)
    }

    /// The linear map sending each frame column to `-e_j`, i.e. `-B^{-1}`.
    pub fn orthant_map(&self) -> DMatrix<f64> {
        -&self.frame_inverse
    }
}

/// Finds a frame with `K1 ⊂ S-` and `M1 ⊂ S+`.
///
/// Requires every `K1` point to have negative and every `M1` point positive
/// first component. `scale` stays at 1 while `delta` halves from 1 until
/// containment holds on all samples or the ratio exceeds [`MAX_CONE_RATIO`].
pub fn build_cone_frame(k1: &PointCloud, m1: &PointCloud) -> Result<ConeFrame> {
    if !k1.is_empty() && !m1.is_empty() && k1.dim() != m1.dim() {
        return Err(Error::DimensionMismatch {
            expected: k1.dim(),
            got: m1.dim(),
        });
    }
    if k1.iter().any(|x| !(x[0] < 0.0)) {
        return Err(Error::pre(
            "every K1 point needs a negative first component",
        ));
    }
    if m1.iter().any(|x| !(x[0] > 0.0)) {
        return Err(Error::pre(
            "every M1 point needs a positive first component",
        ));
    }
    let dim = if k1.is_empty() { m1.dim() } else { k1.dim() };
    let tol = tolerance();
    let mut ratio = 1.0;
    while ratio <= MAX_CONE_RATIO {
        let frame = ConeFrame::new(dim, 1.0 / ratio, 1.0)?;
        if k1.iter().all(|x| frame.contains_negative(x, tol))
            && m1.iter().all(|x| frame.contains_positive(x, tol))
        {
            return Ok(frame);
        }
        ratio *= 2.0;
    }
    Err(Error::ConeSearchFailed {
        max_ratio: MAX_CONE_RATIO,
    })
}
