use defect_chain::error::{ConfigError, NumericError};
use std::fmt;
use std::process::ExitCode;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Convergence(String),
    Io(String),
    Acceptance(Vec<u8>),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Convergence(_) => 3,
            CliError::Acceptance(_) => 4,
        })
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Convergence(_) => "convergence",
            CliError::Io(_) => "io",
            CliError::Acceptance(_) => "acceptance",
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = match self {
            CliError::Config(m) | CliError::Convergence(m) | CliError::Io(m) => m.clone(),
            CliError::Acceptance(ids) => {
                format!("failing criteria {}", ids.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(","))
            }
        };
        write!(f, "error kind={} message={:?}", self.kind(), msg.replace('\n', " "))
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<NumericError> for CliError {
    fn from(e: NumericError) -> Self {
        match e {
            NumericError::Convergence { .. }
            | NumericError::Singular { .. }
            | NumericError::ZeroPivot { .. }
            | NumericError::OnCut { .. } => CliError::Convergence(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}
