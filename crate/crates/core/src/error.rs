use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("frequency grids differ")]
    GridMismatch,
    #[error("{source_label}: {msg}")]
    Physics { source_label: String, msg: String },
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
