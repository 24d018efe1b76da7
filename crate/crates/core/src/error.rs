use serde::Serialize;
use thiserror::Error;

/// Errors reported by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Error {
    #[error("{what} = {value} is outside the valid domain ({expected})")]
    Domain {
        what: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("derivative is singular at x = {x}")]
    Singular { x: f64 },
    #[error("no root found: {context}")]
    NoRoot { context: String },
    #[error("no convergence after {iterations} iterations: {context}")]
    NonConvergence { iterations: usize, context: String },
    #[error("periodic orbit with itinerary {word} not found")]
    OrbitNotFound { word: String },
    #[error("pole: {context}")]
    Pole { context: String },
    #[error("attracting sliding motion detected at ({x}, {y}, {z})")]
    SlidingDetected { x: f64, y: f64, z: f64 },
    #[error("trajectory left the section domain at ({x}, {y}, {z})")]
    LeftDomain { x: f64, y: f64, z: f64 },
    #[error("more than {limit} events")]
    EventAccumulation { limit: usize },
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("iterate hit the discontinuity at x = 0 (step {step})")]
    Discontinuity { step: usize },
    #[error("degenerate configuration: {context}")]
    Degenerate { context: String },
    #[error("invalid argument: {context}")]
    InvalidArgument { context: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64, expected: &'static str) -> Self {
        Error::Domain {
            what,
            value,
            expected,
        }
    }

    pub(crate) fn no_root(context: impl Into<String>) -> Self {
        Error::NoRoot {
            context: context.into(),
        }
    }

    pub(crate) fn invalid(context: impl Into<String>) -> Self {
        Error::InvalidArgument {
            context: context.into(),
        }
    }

    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "domain",
            Error::Singular { .. } => "singular",
            Error::NoRoot { .. } => "no_root",
            Error::NonConvergence { .. } => "non_convergence",
            Error::OrbitNotFound { .. } => "orbit_not_found",
            Error::Pole { .. } => "pole",
            Error::SlidingDetected { .. } => "sliding_detected",
            Error::LeftDomain { .. } => "left_domain",
            Error::EventAccumulation { .. } => "event_accumulation",
            Error::StepUnderflow { .. } => "step_underflow",
            Error::Discontinuity { .. } => "discontinuity",
            Error::Degenerate { .. } => "degenerate",
            Error::InvalidArgument { .. } => "invalid_argument",
        }
    }
}
