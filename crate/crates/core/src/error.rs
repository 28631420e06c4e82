use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter violates a documented precondition.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Input is structurally valid but degenerate (zero norm, empty support, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A least-squares system does not have full column rank.
    #[error("singular system: {0}")]
    Singular(String),

    /// The restricted least-squares step inside OMP broke down.
    #[error("numerical failure after selecting {} atoms: {message}", support.len())]
    Numerical { message: String, support: Vec<usize> },

    #[error("NMSE is undefined for an all-zero reference channel")]
    UndefinedMetric,

    #[error("operation not applicable: {0}")]
    NotApplicable(String),

    /// Configuration problem tied to a specific key.
    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("trial {context}: {source}")]
    Trial {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn with_trial_context(self, context: impl Into<String>) -> Self {
        Error::Trial {
            context: context.into(),
            source: Box::new(self),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
