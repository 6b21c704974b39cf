use helicity_lab::LabError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{0}")]
    Lab(LabError),
    #[error("tolerance exceeded: {0}")]
    Tolerance(String),
    #[error("cannot write {path}: {source}")]
    Output { path: String, source: std::io::Error },
}

impl CliError {
    /// Library errors raised while building inputs are configuration
    /// errors unless they express a mathematical precondition.
    pub fn from_config(e: LabError) -> Self {
        if e.is_precondition() {
            CliError::Lab(e)
        } else {
            CliError::Config(e.to_string())
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Output { .. } => 2,
            CliError::Lab(e) if e.is_precondition() => 3,
            CliError::Lab(_) => 2,
            CliError::Tolerance(_) => 4,
        }
    }
}

impl From<LabError> for CliError {
    fn from(e: LabError) -> Self {
        CliError::Lab(e)
    }
}
