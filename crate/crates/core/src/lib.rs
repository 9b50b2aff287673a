//! Blind deconvolution as rank-one matrix recovery from bilinear measurements
//! `y = B h ⊙ conj(C m) + e`, solved by Riemannian optimization on the quotient
//! manifold of rank-one matrices and by Euclidean baselines.

// Parameter guards are written as `!(x > 0.0)` on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cvec;
pub mod dense;
pub mod error;
pub mod experiments;
pub mod haar;
pub mod linops;
pub mod manifold;
pub mod objective;
pub mod rng;
pub mod solvers;

pub use cvec::C64;
pub use error::{Error, Result};
pub use linops::{MeasurementOperator, OpCounts};
pub use manifold::{FactorPair, HorizontalVector, TangentPair};
