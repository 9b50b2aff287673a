use thiserror::Error;

use crate::manifold::FactorPair;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension mismatch: expected {expected}, got {got} ({what})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("point left the manifold: {0} factor vanished")]
    LeftManifold(&'static str),

    #[error("representative is not balanced: |h| = {h_norm}, |m| = {m_norm}")]
    NotBalanced { h_norm: f64, m_norm: f64 },

    #[error("power iteration did not converge in {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        best: Box<SingularTriple>,
    },

    #[error("tangent vectors are anchored at different points")]
    BaseMismatch,

    #[error("image format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Leading singular value with unit left/right singular vectors.
#[derive(Debug, Clone)]
pub struct SingularTriple {
    pub value: f64,
    pub left: Vec<num_complex::Complex64>,
    pub right: Vec<num_complex::Complex64>,
}

impl SingularTriple {
    pub fn scaled_pair(&self) -> FactorPair {
        let s = self.value.sqrt();
        FactorPair::new_unchecked(
            self.left.iter().map(|v| v * s).collect(),
            self.right.iter().map(|v| v * s).collect(),
        )
    }
}
