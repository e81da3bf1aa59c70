use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Approximate closest pair between the convex hulls of two clouds.
///
/// When two clouds cannot be separated, `distance` is close to zero and the
/// midpoint of the two points lies (approximately) in both hulls.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapWitness {
    pub point_a: Vec<f64>,
    pub point_b: Vec<f64>,
    pub distance: f64,
}

impl OverlapWitness {
    pub fn midpoint(&self) -> Vec<f64> {
        self.point_a
            .iter()
            .zip(&self.point_b)
            .map(|(a, b)| 0.5 * (a + b))
            .collect()
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("clouds are not strictly separable (hull distance {:.3e})", .witness.distance)]
    NoSeparation { witness: OverlapWitness },

    #[error("no sector certificate found after {starts} starts")]
    NoSector { starts: usize },

    #[error("no cone frame certifies containment up to ratio {max_ratio}")]
    ConeSearchFailed { max_ratio: f64 },

    #[error("search budget exceeded: best shift {best_shift} has error {best_error:.3e}")]
    SearchBudgetExceeded { best_shift: f64, best_error: f64 },

    #[error("schedule exhausted: {0}")]
    ScheduleExhausted(String),

    #[error(
        "sector certificate rejected: {k1_violations} K1 and {k2_violations} K2 samples violate it"
    )]
    CertificateRejected {
        k1_violations: usize,
        k2_violations: usize,
    },

    #[error("activation `{0}` has no finite Lipschitz constant")]
    Unbounded(String),

    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    #[error("dataset is empty")]
    EmptyData,

    #[error("loss became non-finite at epoch {epoch}, step {step}")]
    NonFiniteLoss { epoch: usize, step: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(location: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            location: location.into(),
            message: message.into(),
        }
    }

    pub(crate) fn pre(message: impl Into<String>) -> Self {
        Error::Precondition(message.into())
    }

    /// True for failures of a search or feasibility problem, as opposed to
    /// malformed input.
    pub fn is_search_failure(&self) -> bool {
        matches!(
            self,
            Error::NoSeparation { .. }
                | Error::NoSector { .. }
                | Error::ConeSearchFailed { .. }
                | Error::SearchBudgetExceeded { .. }
                | Error::ScheduleExhausted(_)
                | Error::CertificateRejected { .. }
        )
    }
}
