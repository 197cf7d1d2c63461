use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum WadaError {
    #[error("invalid sequence spec `{spec}`: {reason}")]
    Spec { spec: String, reason: String },

    #[error("term a_{index} = {value} must be strictly greater than 2")]
    TermTooSmall { index: usize, value: String },

    #[error("term a_{index} = {value} is not an integer; this operation needs an integer sequence")]
    NonInteger { index: usize, value: String },

    #[error("q = {q} is outside 1..={max}")]
    QOutOfRange { q: u64, max: u64 },

    #[error("{what} cap exceeded: needs {needed}, cap is {cap}")]
    ResourceCap {
        what: &'static str,
        needed: String,
        cap: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("malformed template data at line {line}: {reason}")]
    Template { line: usize, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl WadaError {
    /// Errors caused by the caller's input rather than by the run itself.
    pub fn is_usage(&self) -> bool {
        !matches!(self, WadaError::Template { .. } | WadaError::Io { .. })
    }
}

pub type Result<T, E = WadaError> = std::result::Result<T, E>;
