use thiserror::Error;

#[derive(Debug, Error)]
pub enum PerceptionError {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("trajectory csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}
