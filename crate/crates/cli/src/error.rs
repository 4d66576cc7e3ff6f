use std::fmt;

use fire_core::FireError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// Bad configuration or unreadable input; exit code 2.
    Config,
    /// Failure while solving or writing results; exit code 3.
    Solver,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: Kind,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            kind: Kind::Config,
            message: message.into(),
        }
    }

    pub fn solver(message: impl Into<String>) -> Self {
        CliError {
            kind: Kind::Solver,
            message: message.into(),
        }
    }

    pub fn input(e: FireError) -> Self {
        CliError::config(e.to_string())
    }

    pub fn solve(e: FireError) -> Self {
        CliError::solver(e.to_string())
    }

    pub fn context(self, prefix: &str) -> Self {
        CliError {
            kind: self.kind,
            message: format!("{prefix}: {}", self.message),
        }
    }

    pub fn code(&self) -> i32 {
        match self.kind {
            Kind::Config => 2,
            Kind::Solver => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::solver(format!("i/o: {e}"))
    }
}
