use std::path::PathBuf;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch in {op}: left is {}x{}, right is {}x{}", .left.0, .left.1, .right.0, .right.1)]
    ShapeMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("invalid matrix shape {rows}x{cols} for {len} values")]
    InvalidShape { rows: usize, cols: usize, len: usize },

    #[error("non-finite value {value} at ({row}, {col})")]
    NonFinite { row: usize, col: usize, value: f64 },

    #[error("negative entry {value} at ({row}, {col}) in {what}")]
    NegativeEntry {
        what: &'static str,
        row: usize,
        col: usize,
        value: f64,
    },

    #[error("class label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("node label {0} is not in the feature vocabulary")]
    UnknownNodeLabel(i64),

    #[error("missing dataset file {}", .0.display())]
    MissingFile(PathBuf),

    #[error("{}:{line}: {message}", .file.display())]
    Parse {
        file: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid pool size: {0}")]
    PoolSize(String),

    #[error("cannot split into folds: {0}")]
    Folds(String),

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("training diverged: loss {loss} in epoch {epoch}")]
    Diverged { epoch: usize, loss: f64 },

    #[error("{0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Whether the error stems from user input validation rather than a
    /// runtime failure. The CLI maps this onto its exit code.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::PoolSize(_) | Error::Folds(_) | Error::LabelOutOfRange { .. }
        )
    }
}
