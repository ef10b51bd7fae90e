use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("image sizes differ: {a_w}x{a_h} vs {b_w}x{b_h}")]
    Dimension { a_w: usize, a_h: usize, b_w: usize, b_h: usize },
    #[error("invalid input: {0}")]
    Input(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}
