use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error(transparent)]
    Core(#[from] excess_risk_core::Error),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: {source}")]
    Config {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("malformed network file: {0}")]
    Format(String),

    #[error("rate fit impossible: {0}")]
    Fit(String),
}

pub type LabResult<T> = Result<T, LabError>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> LabError {
    let path = path.into();
    move |source| LabError::Io { path, source }
}

pub(crate) fn csv_err(path: impl Into<PathBuf>) -> impl FnOnce(csv::Error) -> LabError {
    let path = path.into();
    move |source| LabError::Csv { path, source }
}
