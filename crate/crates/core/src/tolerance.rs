//! Process-wide absolute tolerance used by geometric predicates.
//!
//! Defaults to `1e-9`. The CLI overrides it from `NARROWCAP_TOL` once at
//! startup; library callers normally leave it alone.

use std::sync::atomic::{AtomicU64, Ordering};

use crate::error::{Error, Result};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

pub const TOLERANCE_ENV_VAR: &str = "NARROWCAP_TOL";

// 0 encodes "unset".
static TOLERANCE_BITS: AtomicU64 = AtomicU64::new(0);

pub fn tolerance() -> f64 {
    match TOLERANCE_BITS.load(Ordering::Relaxed) {
        0 => DEFAULT_TOLERANCE,
        bits => f64::from_bits(bits),
    }
}

pub fn set_tolerance(value: f64) -> Result<()> {
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::pre(format!(
            "tolerance must be positive and finite, got {value}"
        )));
    }
    TOLERANCE_BITS.store(value.to_bits(), Ordering::Relaxed);
    Ok(())
}

/// Applies `NARROWCAP_TOL` if it is set. Returns the value applied.
pub fn init_from_env() -> Result<Option<f64>> {
    match std::env::var(TOLERANCE_ENV_VAR) {
        Ok(raw) => {
            let value: f64 = raw
                .trim()
                .parse()
                .map_err(|_| Error::parse(TOLERANCE_ENV_VAR, format!("`{raw}` is not a number")))?;
            set_tolerance(value)?;
            Ok(Some(value))
        }
        Err(_) => Ok(None),
    }
}
