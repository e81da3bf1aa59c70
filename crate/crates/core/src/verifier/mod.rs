//! Empirical checks of exact fits, the maximum principle, affine regions and
//! the uniqueness counterexamples.

mod affine_region;
mod fixtures;
mod max_principle;

pub use affine_region::{affine_region_check, AffineRegionReport, PatternGroup, DEEP_FRACTION};
pub use fixtures::{uniqueness_fixtures, FixtureRow, FIXTURE_ALPHA};
pub use max_principle::{max_principle_check, BoxRegion, MaxPrincipleReport, PrincipleReport};

use crate::cloud::LabeledDataset;
use crate::error::{Error, Result};
use crate::network::Network;

/// Sup-norm error `max |f(x) - F(x)|` over the dataset.
pub fn uuac(net: &Network, data: &LabeledDataset) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::EmptyData);
    }
    if net.output_dim() != 1 {
        return Err(Error::pre("uuac needs a scalar-output network"));
    }
    if net.input_dim() != data.dim() {
        return Err(Error::DimensionMismatch {
            expected: net.input_dim(),
            got: data.dim(),
        });
    }
    let mut ev = net.evaluator();
    Ok(data
        .iter()
        .map(|(x, y)| (ev.eval_scalar(x.as_slice()) - y).abs())
        .fold(0.0, f64::max))
}
