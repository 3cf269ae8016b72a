use num_complex::Complex64 as C64;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid system size L={l}: {reason}")]
    InvalidSize { l: usize, reason: &'static str },

    #[error("size mismatch: {0} vs {1}")]
    SizeMismatch(usize, usize),

    #[error("basis mismatch: {0} vs {1}")]
    BasisMismatch(String, String),

    #[error("malformed link state {0:?}: {1}")]
    MalformedState(String, &'static str),

    #[error("tile {tile} cannot be placed at site {site}: {reason}")]
    IncompatibleTile {
        tile: String,
        site: usize,
        reason: &'static str,
    },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("linear algebra failure: {0}")]
    LinAlg(String),

    #[error("iterative solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("cluster at {eigenvalue} is diagonalizable (geometric multiplicity {geometric})")]
    Diagonalizable { eigenvalue: C64, geometric: usize },

    #[error("selected cluster has size {0}, expected 2")]
    ClusterSize(usize),

    #[error("no eigenvalue cluster matches the level selector")]
    NoCluster,

    #[error("leading eigenvalue is degenerate")]
    DefectiveLeading,

    #[error("matrix is singular: {0}")]
    Singular(String),

    #[error("fit needs at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },

    #[error("sector incompatibility: {0}")]
    Sector(String),

    #[error("root solve failed: {0}")]
    RootSolve(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn bad_param(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
