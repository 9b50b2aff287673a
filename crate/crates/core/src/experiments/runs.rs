use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;
use crate::solvers::{SolverConfig, Termination};

use super::synthetic::{solve_with, Algorithm, SyntheticProblem, TrialOutcome};
use super::{fmt_f, par_map, Output, Table};

/// RMSE at or below this counts as a recovery.
pub const SUCCESS_RMSE: f64 = 1e-2;

fn check_dims(k: usize, n: usize, trials: usize) -> Result<()> {
    if k == 0 || n == 0 {
        return Err(Error::InvalidParameter("K and N must be positive".into()));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be >= 1".into()));
    }
    Ok(())
}

fn trial_config(root: u64, path: &[u64], max_iter: usize) -> SolverConfig {
    SolverConfig {
        seed: rng::derive(root, path),
        max_iter,
        ..SolverConfig::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchSpec {
    pub l: usize,
    pub k: usize,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    pub max_iter: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub algorithm: Algorithm,
    pub n_bh: f64,
    pub n_cm: f64,
    pub n_fft: f64,
    pub rmse: f64,
    pub max_rmse: f64,
    pub converged: usize,
    pub trials: usize,
}

/// Average operation counts and RMSE per algorithm. Every algorithm sees the
/// same problem in a given trial.
pub fn run_bench(spec: &BenchSpec) -> Result<(Vec<BenchRow>, Output)> {
    check_dims(spec.k, spec.n, spec.trials)?;
    if spec.l < spec.k {
        return Err(Error::InvalidParameter("L must be >= K".into()));
    }
    let jobs: Vec<(usize, Algorithm)> = (0..spec.trials)
        .flat_map(|t| spec.algorithms.iter().map(move |&a| (t, a)))
        .collect();
    let results: Vec<Result<TrialOutcome>> = par_map(jobs, |(t, a)| {
        let p = SyntheticProblem::generate(spec.l, spec.k, spec.n, rng::derive(spec.seed, &[t as u64]), None)?;
        let cfg = trial_config(spec.seed, &[t as u64, 1], spec.max_iter);
        Ok(solve_with(&p, a, &cfg)?.0)
    });
    let results: Vec<TrialOutcome> = results.into_iter().collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for &a in &spec.algorithms {
        let rs: Vec<&TrialOutcome> = results.iter().filter(|o| o.algorithm == a).collect();
        let cnt = rs.len() as f64;
        let mean = |f: &dyn Fn(&TrialOutcome) -> f64| rs.iter().map(|o| f(o)).sum::<f64>() / cnt;
        rows.push(BenchRow {
            algorithm: a,
            n_bh: mean(&|o| o.counts.n_bh as f64),
            n_cm: mean(&|o| o.counts.n_cm as f64),
            n_fft: mean(&|o| o.counts.n_fft as f64),
            rmse: mean(&|o| o.rmse),
            max_rmse: rs.iter().map(|o| o.rmse).fold(0.0, f64::max),
            converged: rs
                .iter()
                .filter(|o| o.termination == Termination::ResidualTolerance)
                .count(),
            trials: rs.len(),
        });
    }
    let table = Table {
        header: vec![
            "algorithm",
            "L",
            "K",
            "N",
            "trials",
            "nBh",
            "nCm",
            "nFFT",
            "RMSE",
            "max_RMSE",
            "converged",
        ],
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    r.algorithm.to_string(),
                    spec.l.to_string(),
                    spec.k.to_string(),
                    spec.n.to_string(),
                    r.trials.to_string(),
                    format!("{:.2}", r.n_bh),
                    format!("{:.2}", r.n_cm),
                    format!("{:.2}", r.n_fft),
                    fmt_f(r.rmse),
                    fmt_f(r.max_rmse),
                    r.converged.to_string(),
                ]
            })
            .collect(),
    };
    let out = Output::new("bench", spec, table, serde_json::to_value(&rows).unwrap_or_default())?;
    Ok((rows, out))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpec {
    pub k: usize,
    pub n: usize,
    pub ratios: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub algorithms: Vec<Algorithm>,
    pub max_iter: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseRow {
    pub ratio: f64,
    pub l: usize,
    pub algorithm: Algorithm,
    pub successes: usize,
    pub trials: usize,
    pub success_rate: f64,
}

/// Success rate (`RMSE <= 1e-2`) at `L = round(ratio (K + N))`.
pub fn run_phase(spec: &PhaseSpec) -> Result<(Vec<PhaseRow>, Output)> {
    check_dims(spec.k, spec.n, spec.trials)?;
    if spec.ratios.is_empty() || spec.ratios.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter(
            "ratio grid must be nonempty and strictly increasing".into(),
        ));
    }
    let kn = (spec.k + spec.n) as f64;
    let ls: Vec<usize> = spec.ratios.iter().map(|r| (r * kn).round() as usize).collect();
    if ls.iter().any(|&l| l < spec.k.max(spec.n)) {
        return Err(Error::InvalidParameter("ratio too small: L < max(K, N)".into()));
    }
    let jobs: Vec<(usize, usize, Algorithm)> = (0..ls.len())
        .flat_map(|ri| (0..spec.trials).flat_map(move |t| spec.algorithms.iter().map(move |&a| (ri, t, a))))
        .collect();
    let results: Vec<Result<(usize, Algorithm, bool)>> = par_map(jobs, |(ri, t, a)| {
        let seed = rng::derive(spec.seed, &[ri as u64, t as u64]);
        let p = SyntheticProblem::generate(ls[ri], spec.k, spec.n, seed, None)?;
        let cfg = trial_config(spec.seed, &[ri as u64, t as u64, 1], spec.max_iter);
        let (o, _) = solve_with(&p, a, &cfg)?;
        Ok((ri, a, o.rmse <= SUCCESS_RMSE))
    });
    let results: Vec<(usize, Algorithm, bool)> = results.into_iter().collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for (ri, &ratio) in spec.ratios.iter().enumerate() {
        for &a in &spec.algorithms {
            let successes = results.iter().filter(|(r, al, ok)| *r == ri && *al == a && *ok).count();
            rows.push(PhaseRow {
                ratio,
                l: ls[ri],
                algorithm: a,
                successes,
                trials: spec.trials,
                success_rate: successes as f64 / spec.trials as f64,
            });
        }
    }
    let table = Table {
        header: vec!["ratio", "L", "algorithm", "trials", "successes", "success_rate"],
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    format!("{:.4}", r.ratio),
                    r.l.to_string(),
                    r.algorithm.to_string(),
                    r.trials.to_string(),
                    r.successes.to_string(),
                    format!("{:.4}", r.success_rate),
                ]
            })
            .collect(),
    };
    let out = Output::new("phase", spec, table, serde_json::to_value(&rows).unwrap_or_default())?;
    Ok((rows, out))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub ls: Vec<usize>,
    pub k: usize,
    pub n: usize,
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub max_iter: usize,
    /// Stop once the gradient norm falls below this fraction of the initial one.
    pub grad_ratio_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseRow {
    pub l: usize,
    pub snr_db: f64,
    /// Mean over trials of `20 log10(RMSE)`.
    pub rmse_db: f64,
    pub trials: usize,
}

/// RMSE of the Riemannian solver against measurement SNR.
pub fn run_noise(spec: &NoiseSpec) -> Result<(Vec<NoiseRow>, Output)> {
    check_dims(spec.k, spec.n, spec.trials)?;
    if spec.snr_db.is_empty() || spec.ls.is_empty() {
        return Err(Error::InvalidParameter("SNR grid and L list must be nonempty".into()));
    }
    let jobs: Vec<(usize, usize, usize)> = (0..spec.ls.len())
        .flat_map(|li| (0..spec.snr_db.len()).flat_map(move |si| (0..spec.trials).map(move |t| (li, si, t))))
        .collect();
    let results: Vec<Result<(usize, usize, f64)>> = par_map(jobs, |(li, si, t)| {
        // the same signal and noise direction at every SNR and L
        let seed = rng::derive(spec.seed, &[t as u64]);
        let p = SyntheticProblem::generate(spec.ls[li], spec.k, spec.n, seed, Some(spec.snr_db[si]))?;
        let cfg = SolverConfig {
            grad_ratio_tol: Some(spec.grad_ratio_tol),
            ..trial_config(spec.seed, &[t as u64, 1], spec.max_iter)
        };
        let (o, _) = solve_with(&p, Algorithm::Robb, &cfg)?;
        Ok((li, si, 20.0 * o.rmse.log10()))
    });
    let results: Vec<(usize, usize, f64)> = results.into_iter().collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (li, &l) in spec.ls.iter().enumerate() {
        for (si, &snr) in spec.snr_db.iter().enumerate() {
            let v: Vec<f64> = results
                .iter()
                .filter(|(a, b, _)| *a == li && *b == si)
                .map(|r| r.2)
                .collect();
            rows.push(NoiseRow {
                l,
                snr_db: snr,
                rmse_db: v.iter().sum::<f64>() / v.len() as f64,
                trials: v.len(),
            });
        }
    }
    let table = Table {
        header: vec!["L", "K", "N", "snr_db", "rmse_db", "trials"],
        rows: rows
            .iter()
            .map(|r| {
                vec![
                    r.l.to_string(),
                    spec.k.to_string(),
                    spec.n.to_string(),
                    format!("{:.2}", r.snr_db),
                    format!("{:.4}", r.rmse_db),
                    r.trials.to_string(),
                ]
            })
            .collect(),
    };
    let out = Output::new("noise", spec, table, serde_json::to_value(&rows).unwrap_or_default())?;
    Ok((rows, out))
}

/// Least-squares slope of `y` against `x`.
pub fn fitted_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
