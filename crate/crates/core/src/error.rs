use thiserror::Error;

/// Errors raised by the spectral algorithms and the experiment driver.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value violates a precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A computation would exceed a configured size cap.
    #[error("resource limit exceeded: {what} requires {required}, cap is {cap}")]
    Resource {
        what: String,
        required: u64,
        cap: u64,
    },

    /// A configuration field failed validation.
    #[error("invalid config field `{field}`: {reason}")]
    Config { field: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn resource(what: impl Into<String>, required: u64, cap: u64) -> Self {
        Error::Resource {
            what: what.into(),
            required,
            cap,
        }
    }

    pub(crate) fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by invalid user input or configuration.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::InvalidInput(_) | Error::Config { .. })
    }

    pub fn is_resource(&self) -> bool {
        matches!(self, Error::Resource { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
