use thiserror::Error;

/// Errors raised by the library.
///
/// The variants map onto the CLI exit codes: input/usage problems, data
/// problems and numerical failures are kept apart so callers can react
/// differently.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LrdError {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("parameter out of domain: {0}")]
    Domain(String),

    #[error("transform is not square-integrable under the Gaussian weight: {0}")]
    Integrability(String),

    #[error("degenerate transform: {0}")]
    DegenerateTransform(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("circulant embedding failed: {0}")]
    Embedding(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("study error: {0}")]
    Study(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl LrdError {
    /// Short machine-readable tag, used in JSON error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            LrdError::Input(_) => "input",
            LrdError::Domain(_) => "domain",
            LrdError::Integrability(_) => "integrability",
            LrdError::DegenerateTransform(_) => "degenerate-transform",
            LrdError::DegenerateInput(_) => "degenerate-input",
            LrdError::Embedding(_) => "embedding",
            LrdError::Parse(_) => "parse",
            LrdError::Numeric(_) => "numeric",
            LrdError::Study(_) => "study",
            LrdError::Io(_) => "io",
        }
    }
}

impl From<std::io::Error> for LrdError {
    fn from(e: std::io::Error) -> Self {
        LrdError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LrdError>;
