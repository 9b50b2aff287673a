//! Blind image deblurring: the blur kernel lives on a known (possibly
//! dilated) support, the sharp image in the span of the Haar columns with the
//! largest coefficients in the blurred image.

use serde::{Deserialize, Serialize};

use crate::cvec::{self, C64};
use crate::error::{Error, Result};
use crate::haar;
use crate::linops::{make_haar_c, make_support_dft_b, unitary_dft, Grid, MeasurementOperator, OpCounts};
use crate::manifold::FactorPair;
use crate::objective::{default_mu, Objective, PenaltyParams};
use crate::rng;
use crate::solvers::{rsd_solve, spectral_init, PowerOptions, SolverConfig, SolverReport, StepPolicy};

use super::image::GrayImage;
use super::kernels::{make_kernel, Kernel, KernelKind};
use super::{fmt_f, Output, Table};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeblurSpec {
    pub kernel: KernelKind,
    /// Number of Haar columns spanning the image.
    pub n: usize,
    pub iters: usize,
    /// Enlarge the kernel support by this many pixels (square neighborhood).
    pub dilate: usize,
    pub checkpoints: Vec<usize>,
    pub seed: u64,
}

impl DeblurSpec {
    pub fn new(kernel: KernelKind, n: usize, iters: usize) -> Self {
        Self {
            kernel,
            n,
            iters,
            dilate: 0,
            checkpoints: vec![20, 40, 60, 80],
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Checkpoint {
    pub iteration: usize,
    pub relres: f64,
    pub relerr: f64,
    pub counts: OpCounts,
}

#[derive(Debug, Clone)]
pub struct DeblurResult {
    pub blurred: GrayImage,
    /// Reconstruction rescaled to the energy of the blurred image.
    pub reconstruction: GrayImage,
    pub kernel_estimate: Vec<(isize, isize, C64)>,
    pub k: usize,
    pub n: usize,
    /// Fraction of the blurred image's energy in the selected Haar columns.
    pub energy_fraction: f64,
    pub relres: f64,
    pub relerr: f64,
    /// Relative misfit of the recovered kernel applied to the recovered image.
    pub reblur_residual: f64,
    pub checkpoints: Vec<Checkpoint>,
    pub counts: OpCounts,
}

/// Taps of `kernel` grown by a square neighborhood of radius `dilate`;
/// added taps carry zero weight.
pub fn dilate_support(taps: &[(isize, isize, f64)], dilate: usize) -> Vec<(isize, isize)> {
    let d = dilate as isize;
    let mut out: Vec<(isize, isize)> = taps
        .iter()
        .flat_map(|&(r, c, _)| (-d..=d).flat_map(move |i| (-d..=d).map(move |j| (r + i, c + j))))
        .collect();
    // column-major order of the wrapped offsets
    out.sort_by_key(|&(r, c)| (c, r));
    out.dedup();
    out
}

fn wrap(grid: Grid, r: isize, c: isize) -> usize {
    let rr = r.rem_euclid(grid.rows as isize) as usize;
    let cc = c.rem_euclid(grid.cols as isize) as usize;
    rr + cc * grid.rows
}

/// Indices of the `n` largest-magnitude coefficients (ties by index).
fn top_n(coeffs: &[f64], n: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..coeffs.len()).collect();
    idx.sort_by(|&a, &b| coeffs[b].abs().total_cmp(&coeffs[a].abs()).then(a.cmp(&b)));
    idx.truncate(n);
    idx.sort_unstable();
    idx
}

/// `|a - (|b| / |f|) f| / |a|` with `b` the blurred image and `f` the estimate.
pub fn relative_error(original: &GrayImage, blurred: &GrayImage, estimate: &[f64]) -> f64 {
    let fn_ = estimate.iter().map(|v| v * v).sum::<f64>().sqrt();
    let s = blurred.norm() / fn_;
    let diff: f64 = original
        .data
        .iter()
        .zip(estimate)
        .map(|(a, f)| (a - s * f).powi(2))
        .sum();
    diff.sqrt() / original.norm()
}

/// The image `conj(W_S m)` and kernel `h`, with the scale fixed by `sum(h) = 1`.
fn normalize_pair(x: &FactorPair) -> (Vec<C64>, Vec<C64>) {
    let p: C64 = x.h().iter().sum();
    let p = if p.norm() > 0.0 { p } else { C64::new(1.0, 0.0) };
    let h = cvec::scale(x.h(), p.inv());
    let m = cvec::scale(x.m(), p.conj());
    (h, m)
}

fn image_of(grid: Grid, selected: &[usize], m: &[C64]) -> Vec<C64> {
    let mut buf = vec![C64::new(0.0, 0.0); grid.len()];
    for (&s, v) in selected.iter().zip(m) {
        buf[s] = *v;
    }
    haar::synthesis_in_place(&mut buf, grid.rows, grid.cols).expect("power-of-two grid");
    buf.iter().map(|v| v.conj()).collect()
}

/// Checkpoint table plus a sidecar with the final metrics.
pub fn deblur_output(spec: &DeblurSpec, r: &DeblurResult) -> Result<Output> {
    let table = Table {
        header: vec!["iteration", "relres", "relerr", "nBh", "nCm", "nFFT"],
        rows: r
            .checkpoints
            .iter()
            .map(|c| {
                vec![
                    c.iteration.to_string(),
                    fmt_f(c.relres),
                    fmt_f(c.relerr),
                    c.counts.n_bh.to_string(),
                    c.counts.n_cm.to_string(),
                    c.counts.n_fft.to_string(),
                ]
            })
            .collect(),
    };
    let extra = serde_json::json!({
        "image": [r.blurred.rows, r.blurred.cols],
        "desk_scale": "defaults target a 256x256 image with N = 1250, scaled down from 1024x1024 with N = 20000",
        "K": r.k,
        "N": r.n,
        "energy_fraction": r.energy_fraction,
        "relres": r.relres,
        "relerr": r.relerr,
        "reblur_residual": r.reblur_residual,
        "counts": r.counts,
    });
    Output::new("deblur", spec, table, extra)
}

pub fn run_deblur(original: &GrayImage, spec: &DeblurSpec) -> Result<DeblurResult> {
    let kernel = make_kernel(spec.kernel)?;
    run_deblur_with_kernel(original, &kernel, spec)
}

pub fn run_deblur_with_kernel(original: &GrayImage, kernel: &Kernel, spec: &DeblurSpec) -> Result<DeblurResult> {
    let grid = Grid::image(original.rows, original.cols);
    if !grid.rows.is_power_of_two() || !grid.cols.is_power_of_two() {
        return Err(Error::InvalidDimension(format!(
            "image must be power-of-two sized, got {}x{}",
            grid.rows, grid.cols
        )));
    }
    if spec.n == 0 || spec.n > grid.len() {
        return Err(Error::InvalidParameter(format!("N = {} out of range", spec.n)));
    }
    if spec.iters == 0 {
        return Err(Error::InvalidParameter("iters must be >= 1".into()));
    }
    let taps = kernel.taps();
    if taps.is_empty() {
        return Err(Error::InvalidParameter("empty kernel support".into()));
    }
    let blurred = original.convolve(&taps);

    let offsets = dilate_support(&taps, spec.dilate);
    let support: Vec<usize> = offsets.iter().map(|&(r, c)| wrap(grid, r, c)).collect();
    let mut uniq = support.clone();
    uniq.sort_unstable();
    uniq.dedup();
    if uniq.len() != support.len() {
        return Err(Error::InvalidParameter("kernel support wraps onto itself".into()));
    }

    let coeffs = haar::haar_analysis(&blurred.data, grid.rows, grid.cols)?;
    let selected = top_n(&coeffs, spec.n);
    let total: f64 = coeffs.iter().map(|v| v * v).sum();
    let kept: f64 = selected.iter().map(|&i| coeffs[i] * coeffs[i]).sum();

    let op = MeasurementOperator::new(make_support_dft_b(grid, support)?, make_haar_c(grid, selected.clone())?)?;
    let mut y: Vec<C64> = blurred.data.iter().map(|&v| C64::new(v, 0.0)).collect();
    unitary_dft(&mut y, grid, false)?;

    let (l, k, n) = (op.l(), op.k(), op.n());
    let power = PowerOptions {
        seed: rng::derive(spec.seed, &[1]),
        ..PowerOptions::default()
    };
    let init = spectral_init(&op, &y, default_mu(l, k, n), power, true)?;
    let obj = Objective::new(&op, &y, PenaltyParams::experiment(init.d, l, k, n)?)?;
    let cfg = SolverConfig {
        max_iter: spec.iters,
        step: StepPolicy::BbBacktracking,
        record_iterates: true,
        seed: spec.seed,
        ..SolverConfig::default()
    };
    let report = rsd_solve(&obj, &init.x0, init.d, &cfg)?;

    let estimate = |x: &FactorPair| -> Vec<f64> {
        let (_, m) = normalize_pair(x);
        image_of(grid, &selected, &m).iter().map(|v| v.re).collect()
    };
    let checkpoints = checkpoints(&report, &spec.checkpoints, |x| {
        relative_error(original, &blurred, &estimate(x))
    });

    let (h, m) = normalize_pair(&report.x);
    let img = image_of(grid, &selected, &m);
    let relres = report.final_residual();
    let est: Vec<f64> = img.iter().map(|v| v.re).collect();
    let relerr = relative_error(original, &blurred, &est);

    // blur the recovered image with the recovered kernel
    let mut reblur = vec![C64::new(0.0, 0.0); grid.len()];
    for (&(dr, dc), hv) in offsets.iter().zip(&h) {
        for c in 0..grid.cols {
            for r in 0..grid.rows {
                let src = wrap(grid, r as isize - dr, c as isize - dc);
                reblur[r + c * grid.rows] += hv * img[src];
            }
        }
    }
    let mis: f64 = reblur.iter().zip(&blurred.data).map(|(a, b)| (a - b).norm_sqr()).sum();
    let reblur_residual = mis.sqrt() / blurred.norm();

    let scale = blurred.norm() / est.iter().map(|v| v * v).sum::<f64>().sqrt();
    let reconstruction = GrayImage::new(grid.rows, grid.cols, est.iter().map(|v| v * scale).collect())?;
    Ok(DeblurResult {
        blurred,
        reconstruction,
        kernel_estimate: offsets.iter().zip(&h).map(|(&(r, c), v)| (r, c, *v)).collect(),
        k,
        n,
        energy_fraction: kept / total,
        relres,
        relerr,
        reblur_residual,
        checkpoints,
        counts: report.counts,
    })
}

fn checkpoints(report: &SolverReport, at: &[usize], relerr: impl Fn(&FactorPair) -> f64) -> Vec<Checkpoint> {
    at.iter()
        .filter(|&&i| i >= 1 && i <= report.iterations)
        .map(|&i| Checkpoint {
            iteration: i,
            relres: report.residuals[i],
            relerr: relerr(&report.iterates[i]),
            counts: report.count_history[i - 1],
        })
        .collect()
}
