use std::path::Path;

/// Errors surfaced to the terminal; the binary maps usage/manifest problems
/// to exit code 2 and runtime failures to exit code 1.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Malformed or invalid manifest (bad TOML, unknown key, out-of-range
    /// value). The message carries the key name and, for syntax errors, the
    /// line reported by the TOML parser.
    #[error("manifest error: {0}")]
    Manifest(String),

    /// Bad command-line usage outside the manifest itself.
    #[error("{0}")]
    Invalid(String),

    /// Failure propagated from the simulation library.
    #[error(transparent)]
    Physics(#[from] danse::Error),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// True for errors that indicate bad input rather than a failed run.
    pub fn is_usage(&self) -> bool {
        matches!(self, Self::Manifest(_) | Self::Invalid(_))
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
