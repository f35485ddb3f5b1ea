use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("symbol `{0}` has no assigned logarithm")]
    UnassignedSymbol(String),
    #[error("theta factor vanishes at `{0}` (pole of the expression)")]
    PoleAtArgument(String),
    #[error("parameter draw is not generic: {0}")]
    NonGenericParameters(String),
    #[error("invalid elliptic parameters: {0}")]
    InvalidParams(String),
    #[error("invalid (n, k) = ({n}, {k}): need k >= 1 and n >= 2k")]
    InvalidNK { n: usize, k: usize },
    #[error("diagram {0:?} does not fit the rectangle")]
    DiagramOutOfRectangle(Vec<usize>),
    #[error("invalid subset {0:?}")]
    InvalidSubset(Vec<usize>),
    #[error("box ({0}, {1}) is not a vertex of the tree")]
    BoxNotInTree(usize, usize),
    #[error("involution undefined at box ({0}, {1}): {2}")]
    InvolutionUndefined(usize, usize, String),
    #[error("restriction limit unstable: relative disagreement {disagreement:.3e} between directions")]
    LimitUnstable { disagreement: f64 },
    #[error("restriction matrix is singular at this draw")]
    SingularRestrictionMatrix,
    #[error("fixed points are not joined by a single GKM curve: {0}")]
    PairNotConnected(String),
}

pub type Result<T> = std::result::Result<T, Error>;
