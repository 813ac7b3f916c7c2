//! Error types shared across the library.

use thiserror::Error;

/// Library-wide error type.
///
/// The variants partition failures the way the CLI maps them to exit codes:
/// domain/validation problems are caller errors, capacity means an
/// enumeration budget was exceeded, and `Uncertifiable` means no finite
/// certificate exists for the run (infinite realized eta).
#[derive(Debug, Error)]
pub enum Error {
    /// An argument referenced something outside its domain (foreign element,
    /// duplicate entries, index out of range, unknown cell id).
    #[error("domain error: {0}")]
    Domain(String),

    /// A declared property failed validation (non-monotone oracle where a
    /// monotone one is required, malformed model, totality gap in a table).
    #[error("validation error: {0}")]
    Validation(String),

    /// An enumeration budget was exceeded.
    #[error("capacity error: {0}")]
    Capacity(String),

    /// The bound degenerates to zero (beta = 1); certificates are vacuous.
    #[error("degenerate bound: {0}")]
    Degenerate(String),

    /// No finite eta certifies the trace (a zero-marginal step was chosen
    /// while a strictly better element existed).
    #[error("uncertifiable: {0}")]
    Uncertifiable(String),

    /// Measurement history has zero probability under the model.
    #[error("degenerate evidence: {0}")]
    DegenerateEvidence(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
