//! Sector certificates: an apex `c` and an invertible frame `V` such that one
//! cloud lies in the open simplicial cone `{c + V λ : λ > 0}` and another
//! avoids its closure.
//!
//! The search picks an apex, views `K1` from it through a gnomonic chart
//! (points `y` in front of the apex map to `Eᵀy / (a·y)` on the tangent plane
//! of the axis `a`), and looks for a simplex in that chart which contains the
//! image of `K1` and excludes the images of the `K2` points in front of the
//! apex. A facet `{n·p <= h}` of the simplex corresponds to the half-space
//! `{(h a - E n)·y >= 0}`, so the simplex lifts directly to a cone.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::geometry::householder::householder_to_minus_e1;
use crate::geometry::hyperplane::{find_separating_hyperplane, hull_distance_witness};
use crate::tolerance::tolerance;

/// Smallest admissible `|det V|` once the frame columns have unit length.
pub const MIN_FRAME_DETERMINANT: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct SectorCertificate {
    apex: DVector<f64>,
    frame: DMatrix<f64>,
    frame_inverse: DMatrix<f64>,
}

impl SectorCertificate {
    /// Normalises the columns of `frame` and checks that it is invertible.
    pub fn new(apex: DVector<f64>, frame: DMatrix<f64>) -> Result<Self> {
        let dim = apex.len();
        if dim == 0 {
            return Err(Error::pre("apex must be non-empty"));
        }
        if frame.nrows() != dim || frame.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: frame.nrows().max(frame.ncols()),
            });
        }
        let mut frame = frame;
        for mut col in frame.column_iter_mut() {
            let norm = col.norm();
            if !(norm > 0.0 && norm.is_finite()) {
                return Err(Error::pre("frame has a zero or non-finite column"));
            }
            col /= norm;
        }
        if !(frame.determinant().abs() > MIN_FRAME_DETERMINANT) {
            return Err(Error::pre("frame is singular"));
        }
        let frame_inverse = frame
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::pre("frame is singular"))?;
        Ok(Self {
            apex,
            frame,
            frame_inverse,
        })
    }

    pub fn dim(&self) -> usize {
        self.apex.len()
    }

    pub fn apex(&self) -> &DVector<f64> {
        &self.apex
    }

    /// Frame with unit columns `v_1 .. v_n`.
    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    pub fn frame_inverse(&self) -> &DMatrix<f64> {
        &self.frame_inverse
    }

    /// Sector coordinates `λ = V⁻¹(x - c)`.
    pub fn coordinates(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.frame_inverse * (x - &self.apex)
    }
}

/// Outcome of [`check_sector_containment`]. Violations are sample indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ContainmentReport {
    pub holds: bool,
    pub determinant: f64,
    pub k1_violations: Vec<usize>,
    pub k2_violations: Vec<usize>,
}

/// Checks the certificate on the samples: every `K1` point needs all sector
/// coordinates above the tolerance and every `K2` point at least one below
/// minus the tolerance. Points of the wrong dimension count as violations.
pub fn check_sector_containment(
    cert: &SectorCertificate,
    k1: &PointCloud,
    k2: &PointCloud,
) -> ContainmentReport {
    let tol = tolerance();
    let dim = cert.dim();
    let k1_violations: Vec<usize> = k1
        .iter()
        .enumerate()
        .filter(|(_, x)| x.len() != dim || !cert.coordinates(x).iter().all(|&l| l > tol))
        .map(|(i, _)| i)
        .collect();
    let k2_violations: Vec<usize> = k2
        .iter()
        .enumerate()
        .filter(|(_, x)| x.len() != dim || !cert.coordinates(x).iter().any(|&l| l < -tol))
        .map(|(i, _)| i)
        .collect();
    let determinant = cert.frame.determinant();
    ContainmentReport {
        holds: k1_violations.is_empty()
            && k2_violations.is_empty()
            && determinant.abs() > MIN_FRAME_DETERMINANT,
        determinant,
        k1_violations,
        k2_violations,
    }
}

/// Randomised multi-start search configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SectorSearch {
    pub starts: usize,
    pub seed: u64,
}

impl Default for SectorSearch {
    fn default() -> Self {
        Self {
            starts: 200,
            seed: 0,
        }
    }
}

/// [`SectorSearch::run`] with the default budget.
pub fn find_sector_certificate(k1: &PointCloud, k2: &PointCloud) -> Result<SectorCertificate> {
    SectorSearch::default().run(k1, k2)
}

impl SectorSearch {
    /// Searches for a certificate. Failure only means none was found.
    pub fn run(&self, k1: &PointCloud, k2: &PointCloud) -> Result<SectorCertificate> {
        if k1.is_empty() {
            return Err(Error::EmptyData);
        }
        if !k2.is_empty() && k1.dim() != k2.dim() {
            return Err(Error::DimensionMismatch {
                expected: k1.dim(),
                got: k2.dim(),
            });
        }
        if k1.dim() == 1 {
            return self.run_on_line(k1, k2);
        }
        let dim = k1.dim();
        let m1 = k1.centroid().expect("non-empty");
        let m2 = k2.centroid().unwrap_or_else(|| {
            let mut away = m1.clone();
            away[0] -= 1.0;
            away
        });
        let separation = (&m2 - &m1).norm();
        let reach = k1.radius().max(1e-3 * separation).max(1e-9);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);

        for start in 0..self.starts {
            let apex = if start == 0 {
                &m1 + (&m2 - &m1) * 0.5
            } else if rng.random_bool(0.5) {
                let u = random_unit(dim, &mut rng);
                let rho = (rng.random_range(1.1f64.ln()..100f64.ln())).exp();
                &m1 + u * (rho * reach)
            } else {
                let t = rng.random_range(-1.0..1.0);
                let jitter = random_unit(dim, &mut rng) * (reach * rng.random_range(0.0..0.5));
                &m1 + (&m2 - &m1) * t + jitter
            };
            let Some(chart) = Chart::new(&apex, k1, k2) else {
                continue;
            };
            for greedy in [true, false] {
                if let Some(cert) = chart.simplex(greedy, &mut rng) {
                    if check_sector_containment(&cert, k1, k2).holds {
                        return Ok(cert);
                    }
                }
            }
        }
        Err(Error::NoSector {
            starts: self.starts,
        })
    }

    fn run_on_line(&self, k1: &PointCloud, k2: &PointCloud) -> Result<SectorCertificate> {
        let lo1 = k1.iter().map(|x| x[0]).fold(f64::INFINITY, f64::min);
        let hi1 = k1.iter().map(|x| x[0]).fold(f64::NEG_INFINITY, f64::max);
        let hi2 = k2.iter().map(|x| x[0]).fold(f64::NEG_INFINITY, f64::max);
        let lo2 = k2.iter().map(|x| x[0]).fold(f64::INFINITY, f64::min);
        let candidates = [
            (
                hi2 < lo1,
                if k2.is_empty() {
                    lo1 - 1.0
                } else {
                    0.5 * (hi2 + lo1)
                },
                1.0,
            ),
            (lo2 > hi1, 0.5 * (lo2 + hi1), -1.0),
        ];
        for (ok, apex, dir) in candidates {
            if ok {
                let cert = SectorCertificate::new(
                    DVector::from_element(1, apex),
                    DMatrix::from_element(1, 1, dir),
                )?;
                if check_sector_containment(&cert, k1, k2).holds {
                    return Ok(cert);
                }
            }
        }
        Err(Error::NoSector { starts: 1 })
    }
}

fn random_unit(dim: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
    loop {
        let v: DVector<f64> = DVector::from_fn(dim, |_, _| StandardNormal.sample(&mut *rng));
        let norm = v.norm();
        if norm > 1e-6 {
            return v / norm;
        }
    }
}

/// Gnomonic chart of the clouds seen from one apex.
struct Chart {
    apex: DVector<f64>,
    axis: DVector<f64>,
    // (dim - 1) x dim, rows orthonormal and orthogonal to `axis`.
    tangent: DMatrix<f64>,
    p1: Vec<DVector<f64>>,
    p2: Vec<DVector<f64>>,
    p1_mean: DVector<f64>,
}

impl Chart {
    fn new(apex: &DVector<f64>, k1: &PointCloud, k2: &PointCloud) -> Option<Self> {
        let dim = apex.len();
        let mut axis = DVector::zeros(dim);
        for x in k1 {
            let y = x - apex;
            let norm = y.norm();
            if norm <= 1e-12 {
                return None;
            }
            axis += y / norm;
        }
        let norm = axis.norm();
        if norm <= 1e-12 {
            return None;
        }
        axis /= norm;
        let q = householder_to_minus_e1(&axis).ok()?;
        let tangent = q.rows(1, dim - 1).into_owned();
        let project = |y: DVector<f64>, depth: f64| (&tangent * y) / depth;

        let mut p1 = Vec::with_capacity(k1.len());
        for x in k1 {
            let y = x - apex;
            let depth = axis.dot(&y);
            if depth <= 1e-9 * y.norm() {
                return None;
            }
            p1.push(project(y, depth));
        }
        let mut p2 = Vec::new();
        for x in k2 {
            let y = x - apex;
            let norm = y.norm();
            if norm <= 1e-12 {
                return None;
            }
            let depth = axis.dot(&y);
            if depth > 1e-12 * norm {
                p2.push(project(y, depth));
            }
        }
        let p1_mean = p1.iter().fold(DVector::zeros(dim - 1), |acc, p| acc + p) / p1.len() as f64;
        Some(Self {
            apex: apex.clone(),
            axis,
            tangent,
            p1,
            p2,
            p1_mean,
        })
    }

    fn support(&self, n: &DVector<f64>) -> f64 {
        self.p1
            .iter()
            .map(|p| n.dot(p))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Unit normal `n` with `n·q` above the support of the chart image of K1.
    fn separate(&self, q: &DVector<f64>) -> Option<DVector<f64>> {
        let k = q.len();
        if k == 1 {
            let n = DVector::from_element(1, 1.0);
            let hi = self.support(&n);
            let lo = -self.support(&(-&n));
            return if q[0] > hi {
                Some(n)
            } else if q[0] < lo {
                Some(-n)
            } else {
                None
            };
        }
        let cloud = PointCloud::new(k, self.p1.clone()).ok()?;
        let single = PointCloud::new(k, vec![q.clone()]).ok()?;
        let witness = hull_distance_witness(&cloud, &single, 200);
        let closest = DVector::from_vec(witness.point_a);
        let direction = q - closest;
        let norm = direction.norm();
        if norm > 0.0 {
            let n = direction / norm;
            if n.dot(q) > self.support(&n) {
                return Some(n);
            }
        }
        find_separating_hyperplane(&single, &cloud)
            .ok()
            .map(|c| c.normal)
    }

    /// Builds a simplex around the chart image of K1, either greedily cutting
    /// off the nearest uncovered K2 image or from random normals, and lifts
    /// it to a cone.
    fn simplex(&self, greedy: bool, rng: &mut ChaCha8Rng) -> Option<SectorCertificate> {
        let k = self.axis.len() - 1;
        let d = k + 1;
        let mut normals: Vec<DVector<f64>> = Vec::with_capacity(d);
        let mut offsets: Vec<f64> = Vec::with_capacity(d);
        let excluded = |normals: &[DVector<f64>], offsets: &[f64], q: &DVector<f64>| {
            normals.iter().zip(offsets).any(|(n, &h)| n.dot(q) > h)
        };

        if greedy {
            while normals.len() < d {
                let threat = self
                    .p2
                    .iter()
                    .filter(|q| !excluded(&normals, &offsets, q))
                    .min_by(|a, b| {
                        (*a - &self.p1_mean)
                            .norm_squared()
                            .total_cmp(&(*b - &self.p1_mean).norm_squared())
                    });
                let Some(q) = threat else { break };
                let n = self.separate(q)?;
                offsets.push(self.support(&n));
                normals.push(n);
            }
        }
        while normals.len() + 1 < d {
            let n = random_unit(k, rng);
            offsets.push(self.support(&n));
            normals.push(n);
        }
        if normals.len() + 1 == d {
            let mut last = DVector::zeros(k);
            for n in &normals {
                last -= n * rng.random_range(0.5..1.5);
            }
            let norm = last.norm();
            if norm <= 1e-9 {
                return None;
            }
            last /= norm;
            offsets.push(self.support(&last));
            normals.push(last);
        }

        let mut slack = f64::INFINITY;
        for q in &self.p2 {
            let s = normals
                .iter()
                .zip(&offsets)
                .map(|(n, &h)| n.dot(q) - h)
                .fold(f64::NEG_INFINITY, f64::max);
            slack = slack.min(s);
        }
        if slack <= 1e-12 {
            return None;
        }
        let widen = (0.5 * slack).min(1.0);

        let dim = d;
        let mut w = DMatrix::zeros(dim, dim);
        for (j, (n, h)) in normals.iter().zip(&offsets).enumerate() {
            let row = &self.axis * (h + widen) - self.tangent.tr_mul(n);
            w.set_row(j, &row.transpose());
        }
        let v = w.try_inverse()?;
        SectorCertificate::new(self.apex.clone(), v).ok()
    }
}
