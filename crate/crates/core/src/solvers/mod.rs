//! Spectral initialization and the iterative solvers: Riemannian steepest
//! descent (RSD), the Wirtinger-gradient baselines (NCBT/NCBB) and
//! alternating minimization (AMA).

mod ama;
mod init;
mod rsd;
mod wirtinger;

use serde::{Deserialize, Serialize};

use crate::cvec;
use crate::error::{Error, Result};
use crate::linops::OpCounts;
use crate::manifold::FactorPair;

pub use ama::ama_solve;
pub use init::{coherence_project, spectral_init, PowerOptions, SpectralInit};
pub use rsd::{bb_initial_step, rsd_solve, BbFallback};
pub use wirtinger::{wirtinger_solve, WirtingerObjective, WirtingerVariant};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StepPolicy {
    Fixed {
        alpha: f64,
    },
    /// Backtracking from `init` each iteration; `None` means `1 / d`.
    Backtracking {
        init: Option<f64>,
    },
    BbBacktracking,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Backtracking {
    pub shrink: f64,
    /// Sufficient-decrease constant `c` in `f(x+) <= f(x) - c alpha |grad|^2`.
    pub c: f64,
    pub max_trials: usize,
}

impl Default for Backtracking {
    fn default() -> Self {
        Self {
            shrink: 0.5,
            c: 1e-4,
            max_trials: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iter: usize,
    pub rel_residual_tol: f64,
    /// Stop once `|grad_k| / |grad_0| <= tol`.
    pub grad_ratio_tol: Option<f64>,
    pub step: StepPolicy,
    pub backtracking: Backtracking,
    pub seed: u64,
    /// Keep every iterate (for diagnostics and tests).
    pub record_iterates: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iter: 2000,
            rel_residual_tol: 1e-8,
            grad_ratio_tol: None,
            step: StepPolicy::BbBacktracking,
            backtracking: Backtracking::default(),
            seed: 0,
            record_iterates: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_residual_tol > 0.0) {
            return Err(Error::InvalidParameter("rel_residual_tol must be > 0".into()));
        }
        if let Some(t) = self.grad_ratio_tol {
            if !(t > 0.0) {
                return Err(Error::InvalidParameter("grad_ratio_tol must be > 0".into()));
            }
        }
        let b = &self.backtracking;
        if !(b.shrink > 0.0 && b.shrink < 1.0) {
            return Err(Error::InvalidParameter("shrink must lie in (0, 1)".into()));
        }
        if !(b.c > 0.0 && b.c < 1.0) {
            return Err(Error::InvalidParameter("c must lie in (0, 1)".into()));
        }
        if b.max_trials == 0 {
            return Err(Error::InvalidParameter("max_trials must be >= 1".into()));
        }
        match self.step {
            StepPolicy::Fixed { alpha } if !(alpha > 0.0 && alpha.is_finite()) => {
                Err(Error::InvalidParameter("fixed step must be > 0".into()))
            }
            StepPolicy::Backtracking { init: Some(a) } if !(a > 0.0 && a.is_finite()) => {
                Err(Error::InvalidParameter("initial step must be > 0".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    ResidualTolerance,
    GradientRatio,
    MaxIterations,
    /// No step length passed the sufficient-decrease test.
    Stalled,
}

#[derive(Debug, Clone)]
pub struct SolverReport {
    pub x: FactorPair,
    pub iterations: usize,
    /// `|y - A(h_k m_k^*)| / |y|` for `k = 0..=iterations`.
    pub residuals: Vec<f64>,
    /// Objective value per iterate (per half-step for AMA).
    pub costs: Vec<f64>,
    /// Accepted step length per iteration.
    pub steps: Vec<f64>,
    pub iterates: Vec<FactorPair>,
    /// Solve-phase counters after each iteration.
    pub count_history: Vec<OpCounts>,
    pub rmse: Option<f64>,
    pub counts: OpCounts,
    pub termination: Termination,
}

impl SolverReport {
    pub fn final_residual(&self) -> f64 {
        *self.residuals.last().expect("at least the initial residual")
    }

    /// Record the error against a known `(h, m)`.
    pub fn with_truth(mut self, truth: &FactorPair) -> Self {
        self.rmse = Some(rmse(&self.x, truth));
        self
    }
}

/// `|h m^* - h_t m_t^*|_F / |h_t m_t^*|_F`
pub fn rmse(x: &FactorPair, truth: &FactorPair) -> f64 {
    cvec::rank_one_distance(x.h(), x.m(), truth.h(), truth.m()) / (truth.h_norm() * truth.m_norm())
}
