use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The running Hamming distances show no evidence of a second mixture
    /// component.
    #[error("single-component series")]
    SingleComponent,

    #[error("alphabet of size {0} is too large for the remapping sweep (max 8)")]
    AlphabetTooLarge(usize),

    /// More than one outlier in a column of the cross-distance matrix, or the
    /// selected rows are not strictly increasing.
    #[error("misdetection at seed column {column}")]
    Misdetection { column: usize },

    #[error("all remappings useless")]
    AllRemappingsUseless,

    #[error("table enumeration infeasible: {cells} cells exceeds {limit}")]
    EnumerationInfeasible { cells: u128, limit: u128 },

    #[error("infeasible size: ~{required} bytes exceeds the cap of {cap} bytes")]
    InfeasibleSize { required: u64, cap: u64 },

    #[error("config: {0}")]
    Config(String),

    #[error("malformed database file: {0}")]
    Format(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
