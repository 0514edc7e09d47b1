use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A certified computation could not separate two values (or pin a floor)
    /// within the available error bounds.
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    /// Input outside the domain of the requested operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A fraction argument was required to be in lowest terms.
    #[error("fraction {0}/{1} is not reduced")]
    NonReducedFraction(i64, u64),

    /// The slope handed to a closed-orbit construction does not lie strictly
    /// inside the tongue of the given rational.
    #[error("slope lies outside the open tongue of {0}/{1}")]
    SlopeOutsideTongue(i64, u64),

    /// A crossing-verifier inequality failed at box index `j`.
    #[error("crossing check failed at j={j}: {detail}")]
    CrossingAssertion { j: usize, detail: String },

    /// Classification hit the depth cap while endpoint comparisons were still
    /// ambiguous (only possible with interval scalars).
    #[error("classification ambiguous at depth {0}")]
    DepthExhausted(usize),

    /// Malformed textual input.
    #[error("parse error: {0}")]
    Parse(String),

    /// File or serialization failure in the CLI layer.
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
