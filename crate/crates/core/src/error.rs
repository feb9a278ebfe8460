use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("index ({row}, {col}) out of bounds for a {rows}x{cols} matrix")]
    IndexOutOfBounds {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    #[error("invalid sparse matrix: {0}")]
    InvalidSparse(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("degenerate graph: {0}")]
    DegenerateGraph(String),
    #[error("non-finite loss at coordinate {coordinate}")]
    NonFiniteProbe { coordinate: usize },
    #[error("non-finite {term} ({value}) at epoch {epoch}, snapshot {snapshot}")]
    NonFiniteLoss {
        epoch: usize,
        snapshot: usize,
        term: &'static str,
        value: f64,
    },
    #[error("missing labels: {0}")]
    MissingLabels(String),
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
