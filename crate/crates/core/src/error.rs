use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("format error: {0}")]
    Format(String),
    #[error("argument error: {0}")]
    Argument(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("unrecoverable instance `{id}`: {reason}")]
    Unrecoverable { id: String, reason: String },
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("training error at epoch {epoch}: {detail}")]
    Training { epoch: usize, detail: String },
    #[error("state error: {0}")]
    State(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("persistence error: {0}")]
    Persistence(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short category name used on the command line.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Format(_) | Error::Unrecoverable { .. } => "data-format",
            Error::Argument(_) | Error::Config(_) => "usage",
            Error::Persistence(_) | Error::Io(_) => "persistence",
            Error::Shape(_)
            | Error::Numeric(_)
            | Error::Training { .. }
            | Error::State(_)
            | Error::Unsupported(_) => "runtime",
        }
    }

    /// Process exit code: 1 runtime/numeric, 2 usage, 3 data-format, 4 persistence.
    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "usage" => 2,
            "data-format" => 3,
            "persistence" => 4,
            _ => 1,
        }
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Format(e.to_string())
    }
}
