use thiserror::Error;

/// All failure modes surfaced by this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument violated a precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A document or file could not be parsed.
    #[error("parse error at {location}: {message}")]
    Parse { location: String, message: String },

    /// A parsed document violated a structural invariant.
    #[error("validation error: {0}")]
    Validation(String),

    /// A model document declared a format version this build does not speak.
    #[error("unsupported format version {found} (supported: {supported})")]
    UnsupportedVersion { found: u64, supported: u64 },

    /// Rejection sampling gave up before reaching the target cardinality.
    #[error(
        "regeneration stalled: {accepted}/{target} accepted after {attempts} \
         attempts (acceptance rate {rate:.4})"
    )]
    RegenerationStalled {
        accepted: usize,
        target: usize,
        attempts: usize,
        rate: f64,
    },

    /// A pipeline node failed; wraps the underlying error with the node id.
    #[error("node {node_id}: {source}")]
    Node {
        node_id: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable category for CLI error prefixes.
    pub fn category(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid-input",
            Error::Parse { .. } => "parse",
            Error::Validation(_) => "validation",
            Error::UnsupportedVersion { .. } => "version",
            Error::RegenerationStalled { .. } => "regen-stalled",
            Error::Node { .. } => "node",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
