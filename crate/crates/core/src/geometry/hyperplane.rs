use microlp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::DVector;

use crate::cloud::PointCloud;
use crate::error::{Error, OverlapWitness, Result};
use crate::tolerance::tolerance;

/// Affine hyperplane `{x : normal·x = offset}` with unit normal. Clouds on
/// the positive side satisfy `normal·x > offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperplaneCertificate {
    pub normal: DVector<f64>,
    pub offset: f64,
    pub margin: f64,
}

impl HyperplaneCertificate {
    /// Signed value `normal·x - offset`.
    pub fn signed_distance(&self, x: &DVector<f64>) -> f64 {
        self.normal.dot(x) - self.offset
    }

    /// True when every point of `positive` is strictly above the plane and
    /// every point of `negative` strictly below it.
    pub fn separates(&self, positive: &PointCloud, negative: &PointCloud) -> bool {
        positive.iter().all(|x| self.signed_distance(x) > 0.0)
            && negative.iter().all(|x| self.signed_distance(x) < 0.0)
    }
}

// Weight of the L1 penalty on the normal; breaks ties towards sparse normals
// without moving the optimal margin noticeably.
const SPARSITY_WEIGHT: f64 = 1e-6;

/// Maximum-margin separating hyperplane with `a` on the positive side.
///
/// Solves `max t` subject to `v·a - q >= t`, `v·b - q <= -t`, `|v_i| <= 1`,
/// then normalises `v` and re-centres `q` between the two clouds.
pub fn find_separating_hyperplane(a: &PointCloud, b: &PointCloud) -> Result<HyperplaneCertificate> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyData);
    }
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let dim = a.dim();
    let tol = tolerance();
    let shift = a.union(b)?.centroid().expect("non-empty");

    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let pos: Vec<_> = (0..dim)
        .map(|_| problem.add_var(-SPARSITY_WEIGHT, (0.0, 1.0)))
        .collect();
    let neg: Vec<_> = (0..dim)
        .map(|_| problem.add_var(-SPARSITY_WEIGHT, (0.0, 1.0)))
        .collect();
    let q = problem.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY));
    let t = problem.add_var(1.0, (f64::NEG_INFINITY, f64::INFINITY));

    let row = |x: &DVector<f64>, t_coeff: f64| {
        let mut terms = Vec::with_capacity(2 * dim + 2);
        for i in 0..dim {
            let c = x[i] - shift[i];
            if c != 0.0 {
                terms.push((pos[i], c));
                terms.push((neg[i], -c));
            }
        }
        terms.push((q, -1.0));
        terms.push((t, t_coeff));
        terms
    };
    for x in a {
        problem.add_constraint(row(x, -1.0).as_slice(), ComparisonOp::Ge, 0.0);
    }
    for x in b {
        problem.add_constraint(row(x, 1.0).as_slice(), ComparisonOp::Le, 0.0);
    }

    let no_separation = || Error::NoSeparation {
        witness: hull_distance_witness(a, b, 500),
    };
    let solution = match problem.solve() {
        Ok(outcome) => outcome.into_solution().map_err(|_| no_separation())?,
        Err(_) => return Err(no_separation()),
    };
    if solution.var_value(t) <= tol {
        return Err(no_separation());
    }
    let v = DVector::from_fn(dim, |i, _| {
        solution.var_value(pos[i]) - solution.var_value(neg[i])
    });
    let norm = v.norm();
    if norm <= tol {
        return Err(no_separation());
    }
    let normal = v / norm;
    let min_a = a
        .iter()
        .map(|x| normal.dot(x))
        .fold(f64::INFINITY, f64::min);
    let max_b = b
        .iter()
        .map(|x| normal.dot(x))
        .fold(f64::NEG_INFINITY, f64::max);
    let margin = 0.5 * (min_a - max_b);
    if margin <= tol {
        return Err(no_separation());
    }
    Ok(HyperplaneCertificate {
        normal,
        offset: 0.5 * (min_a + max_b),
        margin,
    })
}

/// Approximate closest points between `conv(a)` and `conv(b)` by Frank-Wolfe
/// on the squared distance.
pub fn hull_distance_witness(a: &PointCloud, b: &PointCloud, iterations: usize) -> OverlapWitness {
    let mut p = a.centroid().expect("non-empty");
    let mut r = b.centroid().expect("non-empty");
    for _ in 0..iterations {
        let d = &p - &r;
        if d.norm_squared() == 0.0 {
            break;
        }
        let sa = a
            .iter()
            .min_by(|x, y| x.dot(&d).total_cmp(&y.dot(&d)))
            .expect("non-empty");
        let sb = b
            .iter()
            .max_by(|x, y| x.dot(&d).total_cmp(&y.dot(&d)))
            .expect("non-empty");
        let dir = (sa - &p) - (sb - &r);
        let denom = dir.norm_squared();
        if denom == 0.0 {
            break;
        }
        let gamma = (-d.dot(&dir) / denom).clamp(0.0, 1.0);
        if gamma == 0.0 {
            break;
        }
        p += (sa - &p) * gamma;
        r += (sb - &r) * gamma;
    }
    OverlapWitness {
        distance: (&p - &r).norm(),
        point_a: p.as_slice().to_vec(),
        point_b: r.as_slice().to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn midpoint_plane_between_two_points() {
        let a = PointCloud::from_rows(&[[2.0, 0.0]]).unwrap();
        let b = PointCloud::from_rows(&[[0.0, 0.0]]).unwrap();
        let cert = find_separating_hyperplane(&a, &b).unwrap();
        assert!((cert.normal[0] - 1.0).abs() < 1e-9 && cert.normal[1].abs() < 1e-9);
        assert!((cert.offset - 1.0).abs() < 1e-9);
        assert!((cert.margin - 1.0).abs() < 1e-9);
    }

    #[test]
    fn identical_clouds_cannot_be_separated() {
        let a = PointCloud::from_rows(&[[0.0, 0.0]]).unwrap();
        match find_separating_hyperplane(&a, &a) {
            Err(Error::NoSeparation { witness }) => assert!(witness.distance < 1e-12),
            other => panic!("expected NoSeparation, got {other:?}"),
        }
    }

    #[test]
    fn interleaved_clouds_report_overlap_witness() {
        let a = PointCloud::from_rows(&[[-1.0, 0.0], [1.0, 0.0]]).unwrap();
        let b = PointCloud::from_rows(&[[0.0, -1.0], [0.0, 1.0]]).unwrap();
        match find_separating_hyperplane(&a, &b) {
            Err(Error::NoSeparation { witness }) => {
                assert!(witness.distance < 1e-6);
                let mid = witness.midpoint();
                assert!(mid[0].abs() < 1e-3 && mid[1].abs() < 1e-3);
            }
            other => panic!("expected NoSeparation, got {other:?}"),
        }
    }

    #[test]
    fn shifted_gaussian_clouds_in_four_dimensions() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut cloud = |sign: f64| {
            let rows: Vec<Vec<f64>> = (0..40)
                .map(|_| {
                    (0..4)
                        .map(|i| {
                            let z: f64 = StandardNormal.sample(&mut rng);
                            z + if i == 0 { 5.0 * sign } else { 0.0 }
                        })
                        .collect()
                })
                .collect();
            PointCloud::from_rows(&rows).unwrap()
        };
        let a = cloud(1.0);
        let b = cloud(-1.0);
        let cert = find_separating_hyperplane(&a, &b).unwrap();
        assert!((cert.normal.norm() - 1.0).abs() < 1e-12);
        assert!(cert.margin > 0.0);
        assert!(cert.separates(&a, &b));
        let observed = a
            .iter()
            .chain(b.iter())
            .map(|x| cert.signed_distance(x).abs())
            .fold(f64::INFINITY, f64::min);
        assert!((observed - cert.margin).abs() < 1e-9);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let a = PointCloud::from_rows(&[[0.0, 0.0]]).unwrap();
        let b = PointCloud::from_rows(&[[0.0, 0.0, 1.0]]).unwrap();
        assert!(matches!(
            find_separating_hyperplane(&a, &b),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
