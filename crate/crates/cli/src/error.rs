use procsteer::metrics::MetricsError;
use procsteer::qstate::StateError;
use procsteer::tomo::TomoError;
use procsteer::linalg::MatrixFileError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot read {path}: {source}")]
    Input {
        path: String,
        #[source]
        source: MatrixFileError,
    },
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Tomography(#[from] TomoError),
    #[error("post-check failed: {0}")]
    PostCheck(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 for bad configuration or input, 3 for solver and numerical failures, 4 for post-checks.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Input { .. } | CliError::State(_) | CliError::Io(_) => 2,
            CliError::Metrics(MetricsError::InvalidInput(_) | MetricsError::SameBasis(_)) => 2,
            CliError::Metrics(_) | CliError::Tomography(_) | CliError::Csv(_) => 3,
            CliError::PostCheck(_) => 4,
        }
    }
}
