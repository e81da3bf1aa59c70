use nalgebra::{DMatrix, DVector};

use super::collapse::collapse_with_hyperplane;
use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::geometry::{check_sector_containment, HyperplaneCertificate, SectorCertificate};
use crate::network::{Activation, Layer, Network};

/// Depth-4 ReLU network equal to `a1` on `K1` and `a2` on `K2`.
///
/// The first layer `ReLU(-V⁻¹x + V⁻¹c)` sends `K1` to 0 and `K2` into the
/// non-negative orthant minus the origin. Two collapses then map the images
/// of `K2` and `K1` to single points, and a scalar affine readout assigns the
/// target values.
pub fn two_class_exact_fit(
    k1: &PointCloud,
    k2: &PointCloud,
    cert: &SectorCertificate,
    a1: f64,
    a2: f64,
) -> Result<Network> {
    if !(a1.is_finite() && a2.is_finite()) {
        return Err(Error::pre("target values must be finite"));
    }
    if k1.is_empty() || k2.is_empty() {
        return Err(Error::EmptyData);
    }
    let report = check_sector_containment(cert, k1, k2);
    if !report.holds {
        return Err(Error::CertificateRejected {
            k1_violations: report.k1_violations.len(),
            k2_violations: report.k2_violations.len(),
        });
    }
    let dim = cert.dim();

    let w1 = -cert.frame_inverse();
    let b1 = cert.frame_inverse() * cert.apex();
    let f1 = Network::new(
        vec![Layer::new(w1, b1, Activation::Relu)?],
        DMatrix::identity(dim, dim),
        DVector::zeros(dim),
    )?;
    let img1 = k1.map(|x| f1.forward(x))?;
    let img2 = k2.map(|x| f1.forward(x))?;

    // Coordinate sums of the K2 images are positive; the plane 1·x = q with
    // q half the smallest sum separates them from the origin.
    let min_sum = img2.iter().map(|x| x.sum()).fold(f64::INFINITY, f64::min);
    if !(min_sum > 0.0) {
        return Err(Error::ScheduleExhausted(
            "first-layer images of K2 touch the origin".into(),
        ));
    }
    let root = (dim as f64).sqrt();
    let ones = DVector::from_element(dim, 1.0 / root);
    let q = 0.5 * min_sum;
    let plane = HyperplaneCertificate {
        normal: ones,
        offset: q / root,
        margin: q / root,
    };
    let first = collapse_with_hyperplane(&img2, &img1, &plane, q / root)?;
    let u2 = first.collapsed_point.clone();

    let img1 = img1.map(|x| first.network.forward(x))?;
    let img2 = img2.map(|x| first.network.forward(x))?;
    let norm = u2.norm();
    if !(norm > 0.0) {
        return Err(Error::ScheduleExhausted(
            "collapsed K2 image sits at the origin".into(),
        ));
    }
    let plane = HyperplaneCertificate {
        normal: -&u2 / norm,
        offset: -0.5 * norm,
        margin: 0.5 * norm,
    };
    let second = collapse_with_hyperplane(&img1, &img2, &plane, 0.5 * norm)?;

    let body = Network::compose(&second.network, &Network::compose(&first.network, &f1)?)?;
    let p1 = body.forward(&k1.points()[0])?;
    let p2 = body.forward(&k2.points()[0])?;
    let diff = &p1 - &p2;
    let w = if a1 == a2 {
        DVector::zeros(dim)
    } else {
        diff.clone() * ((a1 - a2) / diff.norm_squared())
    };
    let b = a1 - w.dot(&p1);
    let readout = Network::affine(
        DMatrix::from_row_slice(1, dim, w.as_slice()),
        DVector::from_element(1, b),
    )?;
    Network::compose(&readout, &body)
}
