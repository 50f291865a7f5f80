use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    /// Scenario or input file violates the schema.
    #[error("config error: {0}")]
    Config(String),

    #[error("task {task} failed: {reason}")]
    TaskFailure { task: String, reason: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] nhosc_core::Error),
}

impl CliError {
    /// 0 pass, 1 tolerance failure, 2 bad input.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::TaskFailure { .. } => 1,
            _ => 2,
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
