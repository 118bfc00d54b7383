use thiserror::Error;

use crate::expr::ParseError;

/// Errors raised by geometry, analysis and scenario loading.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument error: {0}")]
    Argument(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("singular metric at {at:?}")]
    SingularMetric { at: Vec<f64> },

    #[error("degenerate frame: {0}")]
    DegenerateFrame(String),

    #[error("degenerate plane (denominator {0:e})")]
    DegeneratePlane(f64),

    #[error("field evaluation failed: {0}")]
    Evaluation(String),

    #[error("map is not a submersion at {at:?}: rank {rank}, expected {expected}")]
    NotASubmersion {
        at: Vec<f64>,
        rank: usize,
        expected: usize,
    },

    #[error("field `{field}` is not basic: push-forward varies by {variation:e} along the fiber")]
    NotBasic { field: String, variation: f64 },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("integration diverged at t = {t}: speed drift {drift:e} exceeds {limit:e}")]
    IntegrationDiverged { t: f64, drift: f64, limit: f64 },

    #[error("geodesic integration failed at t = {t}: {reason}")]
    GeodesicFailure { t: f64, reason: String },

    #[error("identity is trivial: {0}")]
    TrivialIdentity(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invariant `{invariant}` violated at {point:?}: {detail}")]
    Validation {
        invariant: String,
        point: Vec<f64>,
        detail: String,
    },

    #[error("scenario file line {line}: {message}")]
    ScenarioFile { line: usize, message: String },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },

    #[error(transparent)]
    Parse(#[from] ParseError),
}

impl Error {
    /// True for failures of the numerics themselves (as opposed to bad input).
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            Error::Numeric(_)
                | Error::SingularMetric { .. }
                | Error::IntegrationDiverged { .. }
                | Error::GeodesicFailure { .. }
                | Error::DegeneratePlane(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
