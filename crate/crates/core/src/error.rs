use thiserror::Error;

pub type Result<T> = std::result::Result<T, CommlabError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CommlabError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("cell {cell:?} is not covered by any box")]
    UncoveredCell { cell: Vec<usize> },

    #[error(
        "invalid selector: cell {cell:?} mapped to box {box_index}, which does not contain it"
    )]
    InvalidSelector { cell: Vec<usize>, box_index: usize },

    #[error("invalid protocol tree: {0}")]
    InvalidTree(String),

    #[error("generation failed after {attempts} attempts (seed {seed})")]
    GenerationFailure { seed: u64, attempts: usize },

    #[error("degenerate instance: {0}")]
    Degenerate(String),

    #[error("size cap exceeded: {0}")]
    SizeCap(String),
}

impl CommlabError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        CommlabError::InvalidInput(msg.into())
    }
}
