use std::path::PathBuf;

/// Errors raised anywhere in the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("{what} needs {size} terms, above the exact-computation cap of {cap}; use Monte Carlo mode")]
    TooLargeForExact { what: &'static str, size: f64, cap: f64 },

    #[error("Blahut-Arimoto did not converge in {iterations} iterations; capacity lies in [{lower}, {upper}] nats")]
    NotConverged { iterations: usize, lower: f64, upper: f64 },

    #[error("dataset is not realizable by any hypothesis of the class")]
    NotRealizable,

    #[error("kernel is not deterministic: {0}")]
    NotDeterministic(String),

    #[error("missing stability certificate: {0}")]
    MissingCertificate(String),

    #[error("unknown {kind} id `{id}`")]
    UnknownId { kind: &'static str, id: String },

    #[error("experiment fingerprint mismatch: cmi from `{cmi}`, gap from `{gap}`")]
    FingerprintMismatch { cmi: String, gap: String },

    #[error("decoding failed: {0}")]
    Decode(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
        if expected == got {
            Ok(())
        } else {
            Err(Error::LengthMismatch { expected, got })
        }
    }
}
