use nalgebra::DVector;

use super::collapse::collapse_with_hyperplane;
use super::finite::finite_exact_fit;
use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::geometry::{find_separating_hyperplane, HyperplaneCertificate};
use crate::network::Network;

/// How many times a stage may halve its ε before giving up.
pub const MAX_EPSILON_HALVINGS: usize = 30;

/// ReLU network of width at most the input dimension taking `value_j` on
/// every sample of component `j`.
///
/// Each component is collapsed to a point in turn while the others stay
/// fixed; the collapsed points are then interpolated by a width-2 network.
/// Each stage's ε starts below the distance from its component to every
/// other component's hyperplane, so the collapsed point stays on the fixed
/// side of later stages, and is halved if that check still fails.
pub fn multi_class_exact_fit(components: &[(PointCloud, f64)]) -> Result<Network> {
    let first = components.first().ok_or(Error::EmptyData)?;
    let dim = first.0.dim();
    if dim < 2 {
        return Err(Error::pre(
            "multi-class fitting needs input dimension at least 2",
        ));
    }
    for (cloud, value) in components {
        if cloud.is_empty() {
            return Err(Error::EmptyData);
        }
        if cloud.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: cloud.dim(),
            });
        }
        if !value.is_finite() {
            return Err(Error::pre("component values must be finite"));
        }
    }
    if components.len() == 1 {
        return Network::constant(dim, first.1);
    }

    let planes = components
        .iter()
        .enumerate()
        .map(|(j, (cloud, _))| find_separating_hyperplane(cloud, &others(components, j)?))
        .collect::<Result<Vec<_>>>()?;
    let clearance =
        |plane: &HyperplaneCertificate, x: &DVector<f64>| plane.offset - plane.normal.dot(x);

    let mut net = Network::identity(dim)?;
    let mut images: Vec<PointCloud> = components.iter().map(|(c, _)| c.clone()).collect();
    for j in 0..components.len() {
        let mut epsilon = planes
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != j)
            .flat_map(|(i, plane)| images[j].iter().map(move |x| (i, clearance(plane, x))))
            .map(|(_, c)| c)
            .fold(f64::INFINITY, f64::min);
        let fixed = images
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != j)
            .try_fold(PointCloud::empty(dim), |acc, (_, c)| acc.union(c))?;

        let mut stage = None;
        for _ in 0..MAX_EPSILON_HALVINGS {
            let res = collapse_with_hyperplane(&images[j], &fixed, &planes[j], epsilon)?;
            let later_ok = (j + 1..components.len()).all(|i| {
                let plane = &planes[i];
                let k_min = images[i]
                    .iter()
                    .map(|x| plane.normal.dot(x))
                    .fold(f64::INFINITY, f64::min);
                plane.normal.dot(&res.collapsed_point) < k_min
            });
            if later_ok {
                stage = Some(res);
                break;
            }
            epsilon = 0.5 * res.epsilon;
        }
        let stage = stage.ok_or_else(|| {
            Error::ScheduleExhausted(format!(
                "component {j}: collapsed point crosses a later hyperplane after {MAX_EPSILON_HALVINGS} halvings"
            ))
        })?;
        for image in images.iter_mut() {
            *image = image.map(|x| stage.network.forward(x))?;
        }
        net = Network::compose(&stage.network, &net)?;
    }

    let anchors: Vec<DVector<f64>> = components
        .iter()
        .map(|(cloud, _)| net.forward(&cloud.points()[0]))
        .collect::<Result<_>>()?;
    let values: Vec<f64> = components.iter().map(|(_, v)| *v).collect();
    let readout = finite_exact_fit(&PointCloud::new(dim, anchors)?, &values)?;
    Network::compose(&readout, &net)
}

fn others(components: &[(PointCloud, f64)], skip: usize) -> Result<PointCloud> {
    let dim = components[skip].0.dim();
    components
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != skip)
        .try_fold(PointCloud::empty(dim), |acc, (_, (c, _))| acc.union(c))
}
