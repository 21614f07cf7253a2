use std::fmt;

/// A failure mapped onto the process exit code contract.
#[derive(Debug)]
pub enum CliError {
    /// Bad input or configuration; exit 2.
    Invalid(String),
    /// The intensity endpoint could not be reached; exit 3.
    Network(String),
}

impl CliError {
    pub fn invalid(message: impl Into<String>) -> Self {
        CliError::Invalid(message.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Network(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Invalid(m) | CliError::Network(m) => f.write_str(m),
        }
    }
}

impl From<dricarbon_core::Error> for CliError {
    fn from(e: dricarbon_core::Error) -> Self {
        if e.is_network() {
            CliError::Network(e.to_string())
        } else {
            CliError::Invalid(e.to_string())
        }
    }
}
