use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EngineError {
    #[error("matrix orders differ: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },
    #[error("graph contains a directed cycle; evaluate it with the general engine")]
    CyclicInput,
    #[error("graph has {n} nodes, above the {max}-node guard for exhaustive search")]
    TooLarge { n: usize, max: usize },
    #[error("node index {index} out of range for a graph of {n} nodes")]
    NodeOutOfRange { index: u32, n: usize },
    #[error("invalid options: {0}")]
    InvalidOptions(String),
}
