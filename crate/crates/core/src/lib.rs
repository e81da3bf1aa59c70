pub mod cloud;
pub mod constructors;
pub mod cosine;
pub mod error;
pub mod experiment;
pub mod geometry;
pub mod network;
pub mod tolerance;
pub mod verifier;

pub use cloud::{LabeledDataset, PointCloud};
pub use error::{Error, OverlapWitness, Result};
pub use network::{Activation, Layer, Network};
