//! CLI errors carrying their process exit code.
//!
//! 0 success, 2 usage error, 3 numerical failure, 4 adiabaticity hard
//! failure under `--strict`. I/O failures while writing results exit 1.

use std::fmt;

#[derive(Debug)]
pub struct CliError {
    pub message: String,
    pub exit_code: i32,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { message: message.into(), exit_code: 2 }
    }

    pub fn io(message: impl Into<String>) -> Self {
        CliError { message: message.into(), exit_code: 1 }
    }

    pub fn adiabatic(message: impl Into<String>) -> Self {
        CliError { message: message.into(), exit_code: 4 }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl From<ionchain::Error> for CliError {
    fn from(err: ionchain::Error) -> Self {
        let exit_code = match err {
            ionchain::Error::InvalidConfig(_) => 2,
            _ => 3,
        };
        CliError { message: err.to_string(), exit_code }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        if err.kind() == std::io::ErrorKind::BrokenPipe {
            // The downstream consumer closed the pipe; not our failure.
            std::process::exit(0);
        }
        CliError::io(err.to_string())
    }
}
