use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A field of an instance violates its invariant. `path` is a JSON-pointer
    /// style location such as `/gamma_upper/3`.
    #[error("invalid instance at `{path}`: {message}")]
    InvalidInstance { path: String, message: String },

    #[error("invalid argument `{name}`: {message}")]
    InvalidArgument { name: &'static str, message: String },

    /// The principal branch is only evaluated on the nonnegative ray.
    #[error("lambert W0 is not evaluated at negative argument {0}")]
    Domain(f64),

    #[error("instance too large for enumeration: n = {n} exceeds {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("move precondition violated: {0}")]
    Precondition(String),

    #[error("gap reference objective must be positive, got {0}")]
    NonPositiveReference(f64),

    #[error("cannot render an empty report as {0}")]
    EmptyReport(&'static str),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::InvalidInstance {
            path: path.into(),
            message: message.into(),
        }
    }
}
