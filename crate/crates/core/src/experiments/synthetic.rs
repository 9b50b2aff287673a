//! Random instances with Gaussian `C`, Gaussian `(h, m)` and optional noise.

use serde::{Deserialize, Serialize};

use crate::cvec::{self, C64};
use crate::error::{Error, Result};
use crate::linops::{MeasurementOperator, NoiseModel, OpCounts};
use crate::manifold::FactorPair;
use crate::objective::{default_mu, Objective, PenaltyParams};
use crate::rng;
use crate::solvers::{
    ama_solve, rmse, rsd_solve, spectral_init, wirtinger_solve, PowerOptions, SolverConfig, SolverReport, StepPolicy,
    Termination, WirtingerVariant,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "NCBT")]
    Ncbt,
    #[serde(rename = "NCBB")]
    Ncbb,
    #[serde(rename = "AMA")]
    Ama,
    #[serde(rename = "ROBB")]
    Robb,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [Algorithm::Ncbt, Algorithm::Ncbb, Algorithm::Ama, Algorithm::Robb];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Ncbt => "NCBT",
            Algorithm::Ncbb => "NCBB",
            Algorithm::Ama => "AMA",
            Algorithm::Robb => "ROBB",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "NCBT" => Ok(Algorithm::Ncbt),
            "NCBB" => Ok(Algorithm::Ncbb),
            "AMA" => Ok(Algorithm::Ama),
            "ROBB" | "RSD" => Ok(Algorithm::Robb),
            other => Err(Error::InvalidParameter(format!("unknown algorithm '{other}'"))),
        }
    }
}

/// Parse a comma-separated list, `all` meaning every algorithm.
pub fn parse_algorithms(s: &str) -> Result<Vec<Algorithm>> {
    if s.eq_ignore_ascii_case("all") {
        return Ok(Algorithm::ALL.to_vec());
    }
    let mut out: Vec<Algorithm> = s.split(',').map(|t| t.trim().parse()).collect::<Result<_>>()?;
    out.sort();
    out.dedup();
    if out.is_empty() {
        return Err(Error::InvalidParameter("no algorithm given".into()));
    }
    Ok(out)
}

#[derive(Debug)]
pub struct SyntheticProblem {
    pub op: MeasurementOperator,
    pub truth: FactorPair,
    pub y: Vec<C64>,
    pub noise_energy: f64,
}

impl SyntheticProblem {
    /// `C`, `h`, `m` and the noise draw from independent substreams of `seed`.
    pub fn generate(l: usize, k: usize, n: usize, seed: u64, snr_db: Option<f64>) -> Result<Self> {
        let op = MeasurementOperator::gaussian(l, k, n, rng::derive(seed, &[1]))?;
        let mut s = rng::stream(rng::derive(seed, &[2]));
        let h = rng::complex_normal_vec(&mut s, k);
        let m = rng::complex_normal_vec(&mut s, n);
        let truth = FactorPair::new(h, m)?;
        let clean = op.apply(truth.h(), truth.m())?;
        let (y, noise_energy) = match snr_db {
            None => (clean, 0.0),
            Some(db) => {
                let e = NoiseModel::from_snr_db(db, rng::derive(seed, &[3])).sample(&clean);
                (cvec::add(&clean, &e), cvec::norm_sqr(&e))
            }
        };
        Ok(Self {
            op,
            truth,
            y,
            noise_energy,
        })
    }

    pub fn d_star(&self) -> f64 {
        self.truth.h_norm() * self.truth.m_norm()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialOutcome {
    pub algorithm: Algorithm,
    pub d: f64,
    pub counts: OpCounts,
    pub iterations: usize,
    pub rmse: f64,
    pub final_residual: f64,
    pub termination: Termination,
}

/// Spectral initialization followed by one solver. `base` supplies tolerances
/// and the iteration cap; the step policy is fixed by the algorithm.
pub fn solve_with(
    problem: &SyntheticProblem,
    algorithm: Algorithm,
    base: &SolverConfig,
) -> Result<(TrialOutcome, SolverReport)> {
    let op = &problem.op;
    let (l, k, n) = (op.l(), op.k(), op.n());
    let mu = default_mu(l, k, n);
    let power = PowerOptions {
        seed: rng::derive(base.seed, &[10]),
        ..PowerOptions::default()
    };
    let init = spectral_init(op, &problem.y, mu, power, true)?;
    let penalty = PenaltyParams::experiment(init.d, l, k, n)?;
    let report = match algorithm {
        Algorithm::Robb => {
            let cfg = SolverConfig {
                step: StepPolicy::BbBacktracking,
                ..base.clone()
            };
            let obj = Objective::new(op, &problem.y, penalty)?;
            rsd_solve(&obj, &init.x0, init.d, &cfg)?
        }
        Algorithm::Ncbt | Algorithm::Ncbb => {
            let cfg = SolverConfig {
                step: StepPolicy::Backtracking { init: None },
                ..base.clone()
            };
            let variant = if algorithm == Algorithm::Ncbt {
                WirtingerVariant::FixedInitStep
            } else {
                WirtingerVariant::BbInitStep
            };
            wirtinger_solve(op, &problem.y, &init.x0, penalty, &cfg, variant)?
        }
        Algorithm::Ama => ama_solve(op, &problem.y, &init.x0, base)?,
    };
    let outcome = TrialOutcome {
        algorithm,
        d: init.d,
        counts: report.counts,
        iterations: report.iterations,
        rmse: rmse(&report.x, &problem.truth),
        final_residual: report.final_residual(),
        termination: report.termination,
    };
    Ok((outcome, report))
}
