//! Error type shared by every module in the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes of the toolkit.
///
/// The CLI maps these onto exit codes: everything except `Divergence`
/// is a usage/input problem (exit 2); `Divergence` is a numeric failure
/// during training (exit 3).
#[derive(Debug, Error)]
pub enum Error {
    /// Input is outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration is internally inconsistent (e.g. aliasing components).
    #[error("configuration error: {0}")]
    Config(String),

    /// An n-schedule was applied to a harmonic order it does not support.
    #[error("schedule error: {0}")]
    Schedule(String),

    /// A requested fixture case or record does not exist.
    #[error("not found: {0}")]
    NotFound(String),

    /// A prediction grid does not cover the fixture rows it is matched against.
    #[error("coverage error: {0}")]
    Coverage(String),

    /// A text input could not be parsed.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Structurally valid input that violates an invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// Nibble wire-protocol violation.
    #[error("protocol error: {0}")]
    Protocol(String),

    /// The training set cannot be trained on (e.g. a single class).
    #[error("training error: {0}")]
    Training(String),

    /// Training produced a non-finite loss or parameter.
    #[error("training diverged at epoch {epoch}: non-finite loss or parameter")]
    Divergence { epoch: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
