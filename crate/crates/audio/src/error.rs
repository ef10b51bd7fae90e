use thiserror::Error;

#[derive(Debug, Error)]
pub enum AudioError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("{what} mismatch: expected {expected}, got {actual}")]
    Mismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error(transparent)]
    Wav(#[from] hound::Error),
}
