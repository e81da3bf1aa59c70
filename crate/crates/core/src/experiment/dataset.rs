use std::f64::consts::TAU;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cloud::{LabeledDataset, PointCloud};
use crate::error::{Error, Result};

/// The eight candidate border centres around `(0.5, 0.5)`.
pub const CANDIDATE_CENTERS: [[f64; 2]; 8] = [
    [0.25, 0.25],
    [0.5, 0.25],
    [0.75, 0.25],
    [0.25, 0.5],
    [0.75, 0.5],
    [0.25, 0.75],
    [0.5, 0.75],
    [0.75, 0.75],
];

pub const BORDER_LABEL: f64 = 0.0;
pub const CENTER_LABEL: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct BallDatasetConfig {
    pub border_centers: Vec<[f64; 2]>,
    pub border_radius: f64,
    pub center_point: [f64; 2],
    pub center_radius: f64,
    pub points_per_border_ball: usize,
    pub seed: u64,
}

impl BallDatasetConfig {
    /// Six border balls: the candidates without `(0.75, 0.5)` and
    /// `(0.5, 0.75)`, which leaves an open sector towards the centre.
    pub fn six_balls(seed: u64) -> Self {
        let centers = CANDIDATE_CENTERS
            .iter()
            .copied()
            .filter(|c| *c != [0.75, 0.5] && *c != [0.5, 0.75])
            .collect();
        Self::with_centers(centers, seed)
    }

    /// All eight candidates, enclosing the centre ball.
    pub fn eight_balls(seed: u64) -> Self {
        Self::with_centers(CANDIDATE_CENTERS.to_vec(), seed)
    }

    pub fn with_centers(border_centers: Vec<[f64; 2]>, seed: u64) -> Self {
        Self {
            border_centers,
            border_radius: 0.125,
            center_point: [0.5, 0.5],
            center_radius: 0.01,
            points_per_border_ball: 2000,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.border_centers.is_empty() {
            return Err(Error::pre("at least one border ball is needed"));
        }
        for r in [self.border_radius, self.center_radius] {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::pre(format!("radius must be positive, got {r}")));
            }
        }
        if self.points_per_border_ball == 0 {
            return Err(Error::pre("points per border ball must be positive"));
        }
        let mut all = self.border_centers.clone();
        all.push(self.center_point);
        for (i, a) in all.iter().enumerate() {
            if a.iter().any(|v| !v.is_finite()) {
                return Err(Error::pre("ball centres must be finite"));
            }
            if all[..i].contains(a) {
                return Err(Error::pre(format!("duplicate ball centre {a:?}")));
            }
        }
        Ok(())
    }
}

fn sample_disk(rng: &mut ChaCha8Rng, center: [f64; 2], radius: f64) -> DVector<f64> {
    // Area-uniform polar sampling.
    let r = radius * rng.random::<f64>().sqrt();
    let (s, c) = (TAU * rng.random::<f64>()).sin_cos();
    DVector::from_vec(vec![center[0] + r * c, center[1] + r * s])
}

/// Uniform samples in each border disk (label 0) followed by as many samples
/// in the centre disk (label 1).
pub fn generate_ball_dataset(config: &BallDatasetConfig) -> Result<LabeledDataset> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = config.points_per_border_ball;
    let border_total = n * config.border_centers.len();
    let mut points = Vec::with_capacity(2 * border_total);
    let mut targets = Vec::with_capacity(2 * border_total);
    for &c in &config.border_centers {
        for _ in 0..n {
            points.push(sample_disk(&mut rng, c, config.border_radius));
            targets.push(BORDER_LABEL);
        }
    }
    for _ in 0..border_total {
        points.push(sample_disk(
            &mut rng,
            config.center_point,
            config.center_radius,
        ));
        targets.push(CENTER_LABEL);
    }
    LabeledDataset::new(PointCloud::new(2, points)?, targets)
}
