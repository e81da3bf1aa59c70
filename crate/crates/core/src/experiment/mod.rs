//! Ball datasets, a small MLP trainer and per-layer snapshots.

mod dataset;
mod mlp;
mod snapshots;
mod train;

pub use dataset::{
    generate_ball_dataset, BallDatasetConfig, BORDER_LABEL, CANDIDATE_CENTERS, CENTER_LABEL,
};
pub use snapshots::{layer_snapshots, snapshots_to_json, Snapshot};
pub use train::{gradient_check, train, train_from, EpochRecord, TrainConfig, TrainHistory};
