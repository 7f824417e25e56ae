use std::path::PathBuf;

/// Failures of a CLI run.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{}:{line}:{column}: {message}", path.display())]
    Json {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid problem: {0}")]
    Invalid(String),

    #[error("failed to access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Core(#[from] tbvp_core::Error),

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 2 for admissibility rejections, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_admissibility() => 2,
            _ => 1,
        }
    }

    pub fn reason(&self) -> &'static str {
        match self {
            CliError::Json { .. } => "parse-error",
            CliError::Invalid(_) => "invalid-problem",
            CliError::Io { .. } => "io-error",
            CliError::Core(e) => e.reason(),
            CliError::Usage(_) => "usage",
        }
    }

    pub fn residual(&self) -> Option<f64> {
        match self {
            CliError::Core(e) => e.residual(),
            _ => None,
        }
    }
}

pub(crate) fn io_err(path: &std::path::Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}
