use thiserror::Error;

#[derive(Debug, Error)]
pub enum VisualError {
    #[error("image is {actual_w}x{actual_h}, expected {expected_w}x{expected_h}")]
    Dimension {
        expected_w: usize,
        expected_h: usize,
        actual_w: usize,
        actual_h: usize,
    },
    #[error("invalid input: {0}")]
    Input(String),
}
