use std::fmt;

use serde_json::json;
use subscan::Error;

#[derive(Debug)]
pub enum CliError {
    /// clap's own message; the flag says whether it is an error (vs --help).
    Clap(String, bool),
    Usage(String),
    Validation(Vec<String>),
    Io(String),
    Core(Error),
    SelftestFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Clap(_, false) => 0,
            CliError::Clap(..) | CliError::Usage(_) | CliError::Validation(_) => 2,
            CliError::Io(_) => 3,
            CliError::Core(e) => match e {
                Error::Io(_) => 3,
                Error::DimensionMismatch(_) => 4,
                Error::BudgetExceeded { .. } => 6,
                Error::Parse(_) => 8,
                _ => 5,
            },
            CliError::SelftestFailed(_) => 7,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Clap(..) | CliError::Usage(_) => "usage",
            CliError::Validation(_) => "validation",
            CliError::Io(_) => "io",
            CliError::Core(e) => match e {
                Error::Io(_) => "io",
                Error::DimensionMismatch(_) => "dimension_mismatch",
                Error::BudgetExceeded { .. } => "budget_exceeded",
                Error::Parse(_) => "parse",
                _ => "domain",
            },
            CliError::SelftestFailed(_) => "selftest_failed",
        }
    }

    /// Structured report written to stderr.
    pub fn report(&self) -> serde_json::Value {
        let details: Vec<String> = match self {
            CliError::Validation(v) => v.clone(),
            other => vec![other.to_string()],
        };
        json!({
            "error": self.kind(),
            "exit_code": self.exit_code(),
            "details": details,
        })
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Clap(msg, _) => f.write_str(msg.trim_end()),
            CliError::Usage(msg) | CliError::Io(msg) => f.write_str(msg),
            CliError::Validation(v) => write!(f, "invalid arguments: {}", v.join("; ")),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::SelftestFailed(n) => write!(f, "{n} selftest properties failed"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}
