//! CLI-level errors and their exit codes.
//!
//! Exit codes: 0 success, 2 configuration error, 3 data error (missing or
//! unreadable inputs and artifacts), 4 numerical failure.

use std::path::PathBuf;

use regimes_core::{Error, ErrorCategory};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// The invocation or config file itself is wrong.
    #[error("{0}")]
    Usage(String),

    /// A stage was invoked before the command that writes its input.
    #[error("missing artifact {}: run the `{producer}` command first", path.display())]
    MissingArtifact {
        path: PathBuf,
        producer: &'static str,
    },

    /// An artifact or input file could not be read, written, or parsed.
    #[error("{}: {detail}", path.display())]
    Artifact { path: PathBuf, detail: String },

    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::MissingArtifact { .. } | CliError::Artifact { .. } => 3,
            CliError::Core(err) => match err.category() {
                ErrorCategory::Config => 2,
                ErrorCategory::Data => 3,
                ErrorCategory::Numerical => 4,
            },
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_error_class() {
        let usage = CliError::Usage("bad flag".to_string());
        assert_eq!(usage.exit_code(), 2);

        let missing = CliError::MissingArtifact {
            path: PathBuf::from("train_scores.csv"),
            producer: "pca",
        };
        assert_eq!(missing.exit_code(), 3);
        assert!(missing.to_string().contains("`pca`"));

        let config = CliError::Core(Error::InvalidConfig {
            detail: "k_min exceeds k_max".to_string(),
        });
        assert_eq!(config.exit_code(), 2);

        let numerical = CliError::Core(Error::NoConvergence {
            what: "irls",
            iterations: 100,
        });
        assert_eq!(numerical.exit_code(), 4);

        let data = CliError::Core(Error::EmptyInput { what: "panel" });
        assert_eq!(data.exit_code(), 3);
    }
}
