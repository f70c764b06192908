//! Error type shared by all modules.

use thiserror::Error;

/// Errors produced by decomposition, preprocessing, model training and the
/// forecasting pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Input series shorter than an operation requires.
    #[error("series too short: need at least {need} points, got {got}")]
    SeriesTooShort { need: usize, got: usize },

    /// A parameter is outside its valid range.
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Input failed a structural validation check.
    #[error("validation failed: {0}")]
    Validation(String),

    /// Non-finite value encountered where finite input is required.
    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    /// Normalization cannot be inverted or applied because the scale collapses.
    #[error("degenerate scale for {kind} normalization: {reason}")]
    DegenerateScale { kind: &'static str, reason: String },

    /// A preprocessing record is missing the state needed for inversion.
    #[error("cannot invert transform: {0}")]
    Inversion(String),

    /// A least-squares or linear-algebra step failed.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Iterative training exceeded its budget without meeting its criterion.
    #[error("no convergence after {iterations} iterations: {reason}")]
    Convergence { iterations: usize, reason: String },

    /// Training loss became non-finite.
    #[error("training diverged at epoch {epoch}")]
    Divergence { epoch: usize },

    /// A required value is absent from the input data.
    #[error("missing data: {0}")]
    MissingData(String),

    /// A pipeline stage failed; carries the subseries label and stage name.
    #[error("stage {stage} failed for subseries {label}: {source}")]
    Stage {
        label: String,
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    /// Report or model (de)serialization failed.
    #[error("serialization: {0}")]
    Serialization(String),
}

impl Error {
    /// Wraps an error with the pipeline stage and subseries it occurred in.
    pub fn in_stage(self, label: impl Into<String>, stage: &'static str) -> Self {
        Error::Stage {
            label: label.into(),
            stage,
            source: Box::new(self),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
