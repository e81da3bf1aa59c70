use nalgebra::{DMatrix, DVector};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::geometry::{
    build_cone_frame, find_separating_hyperplane, householder_to_minus_e1, hull_distance_witness,
    ConeFrame, HyperplaneCertificate,
};
use crate::network::{Activation, Layer, Network};

/// A depth-2 ReLU network that sends every `K` sample to `collapsed_point`
/// and fixes every `M` sample.
#[derive(Debug, Clone)]
pub struct CollapseResult {
    pub network: Network,
    pub collapsed_point: DVector<f64>,
    /// The `K` sample closest to the hyperplane.
    pub nearest: DVector<f64>,
    /// Effective ε: the requested value, clamped to the gap between the
    /// clouds along the normal.
    pub epsilon: f64,
    pub hyperplane: HyperplaneCertificate,
    pub cone: ConeFrame,
}

/// Finds a maximum-margin hyperplane with `K` on its positive side and
/// collapses `K` onto a point within `ε/2` of it.
pub fn collapse_to_point(k: &PointCloud, m: &PointCloud, epsilon: f64) -> Result<CollapseResult> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::pre(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let cert = find_separating_hyperplane(k, m)?;
    collapse_with_hyperplane(k, m, &cert, epsilon)
}

/// Collapse using a given hyperplane; only its normal is used, the offset is
/// moved next to `K`.
pub fn collapse_with_hyperplane(
    k: &PointCloud,
    m: &PointCloud,
    cert: &HyperplaneCertificate,
    epsilon: f64,
) -> Result<CollapseResult> {
    if k.is_empty() {
        return Err(Error::EmptyData);
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::pre(format!(
            "epsilon must be positive, got {epsilon}"
        )));
    }
    let dim = k.dim();
    if !m.is_empty() && m.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: m.dim(),
        });
    }
    if cert.normal.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: cert.normal.len(),
        });
    }
    let v = &cert.normal;
    let nearest = k
        .iter()
        .min_by(|a, b| v.dot(a).total_cmp(&v.dot(b)))
        .expect("non-empty")
        .clone();
    let k_min = v.dot(&nearest);
    let m_max = m.iter().map(|x| v.dot(x)).fold(f64::NEG_INFINITY, f64::max);
    if !(k_min > m_max) {
        return Err(Error::NoSeparation {
            witness: hull_distance_witness(k, m, 500),
        });
    }
    let epsilon = epsilon.min(k_min - m_max);
    let collapsed_point = &nearest - v * (0.5 * epsilon);

    let v1 = householder_to_minus_e1(v)?;
    let local = |cloud: &PointCloud| -> Result<PointCloud> {
        if cloud.is_empty() {
            return Ok(PointCloud::empty(dim));
        }
        cloud.map(|x| Ok(&v1 * (x - &collapsed_point)))
    };
    let cone = build_cone_frame(&local(k)?, &local(m)?)?;

    let hidden_w: DMatrix<f64> = cone.orthant_map() * &v1;
    let hidden_b = -(&hidden_w * &collapsed_point);
    let final_w = v1.transpose() * (-&cone.frame);
    let network = Network::new(
        vec![Layer::new(hidden_w, hidden_b, Activation::Relu)?],
        final_w,
        collapsed_point.clone(),
    )?;
    Ok(CollapseResult {
        network,
        collapsed_point,
        nearest,
        epsilon,
        hyperplane: cert.clone(),
        cone,
    })
}
