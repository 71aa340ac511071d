use thiserror::Error;

use crate::dimtree::NodeId;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid mode set: {0}")]
    InvalidModeSet(String),

    #[error("dimension mismatch in mode {mode}: expected {expected}, found {found}")]
    DimensionMismatch {
        mode: usize,
        expected: usize,
        found: usize,
    },

    #[error("tensor order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("invalid dimension tree: {0}")]
    InvalidTree(String),

    #[error("node {0} is not part of the tree")]
    UnknownNode(NodeId),

    #[error("dense oracle too large: {entries} entries exceed the cap of {cap}")]
    DenseTooLarge { entries: usize, cap: usize },

    #[error("shape inconsistency: {0}")]
    Shape(String),

    #[error("trees must coincide")]
    TreeMismatch,

    #[error("HSS requires binary tree")]
    NonBinaryTree,

    #[error("pairwise Hamiltonian needs d ≥ 2")]
    TooFewSites,

    #[error("invalid Hamiltonian description: {0}")]
    InvalidSpec(String),

    #[error("serialization: {0}")]
    Serialization(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
