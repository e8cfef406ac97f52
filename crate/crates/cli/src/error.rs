use std::fmt;

/// Exit status for a run whose tasks all executed but at least one verdict
/// differed from its expectation.
pub const EXIT_TASK_FAILURE: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;

/// A located failure that stops a run before a report is produced.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Parse { location: String, message: String },
    Validation { location: String, message: String },
}

impl CliError {
    pub fn parse(location: impl Into<String>, message: impl fmt::Display) -> Self {
        CliError::Parse {
            location: location.into(),
            message: message.to_string(),
        }
    }

    pub fn validation(location: impl Into<String>, message: impl fmt::Display) -> Self {
        CliError::Validation {
            location: location.into(),
            message: message.to_string(),
        }
    }

    /// Core parse errors keep their class; everything else the library
    /// rejects is a validation failure.
    pub fn from_core(location: impl Into<String>, err: unistoch_core::Error) -> Self {
        match err {
            unistoch_core::Error::Parse(msg) => CliError::parse(location, msg),
            unistoch_core::Error::Validation(msg) => CliError::validation(location, msg),
            other => CliError::validation(location, other),
        }
    }

    /// Wraps a JSON error with its line and column.
    pub fn from_json(source: &str, err: &serde_json::Error) -> Self {
        let location = format!("{source}:{}:{}", err.line(), err.column());
        CliError::parse(location, err)
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } => EXIT_PARSE,
            CliError::Validation { .. } => EXIT_VALIDATION,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse { location, message } => {
                write!(f, "parse error at {location}: {message}")
            }
            CliError::Validation { location, message } => {
                write!(f, "validation error at {location}: {message}")
            }
        }
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = std::result::Result<T, CliError>;
