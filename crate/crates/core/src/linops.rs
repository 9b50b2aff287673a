//! The bilinear measurement operator `A(h m^*) = (B h) ⊙ conj(C m)` and its
//! adjoint `A^*(z) = B^* diag(z) C`, applied through FFTs.
//!
//! `B` is a set of columns of the unitary DFT on a 1D or 2D grid. `C` is
//! stored by its time-domain factor `T` with `C = F^{-1} T`, so both `B h` and
//! `C m` cost one transform each. Every product is tallied in [`Counters`].

use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::cvec::{self, C64, ZERO};
use crate::dense::CMatrix;
use crate::error::{Error, Result, SingularTriple};
use crate::haar;
use crate::rng;

type FftPlan = Arc<dyn Fft<f64>>;

/// Signal grid; 1D problems use `cols == 1`. Flat indices are column-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub rows: usize,
    pub cols: usize,
}

impl Grid {
    pub fn line(len: usize) -> Self {
        Self { rows: len, cols: 1 }
    }

    pub fn image(rows: usize, cols: usize) -> Self {
        Self { rows, cols }
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Which DFT columns make up `B`.
#[derive(Debug, Clone, PartialEq)]
pub enum BSpec {
    /// First `k` columns of the unitary `l x l` DFT.
    PartialDft { l: usize, k: usize },
    /// Columns of the unitary 2D DFT indexed by a support mask (flat indices).
    SupportDft { grid: Grid, support: Vec<usize> },
}

impl BSpec {
    pub fn grid(&self) -> Grid {
        match self {
            BSpec::PartialDft { l, .. } => Grid::line(*l),
            BSpec::SupportDft { grid, .. } => *grid,
        }
    }

    pub fn support(&self) -> Vec<usize> {
        match self {
            BSpec::PartialDft { k, .. } => (0..*k).collect(),
            BSpec::SupportDft { support, .. } => support.clone(),
        }
    }
}

pub fn make_partial_dft_b(l: usize, k: usize) -> Result<BSpec> {
    if k == 0 || l == 0 || k > l {
        return Err(Error::InvalidDimension(format!(
            "partial DFT needs 1 <= K <= L, got K = {k}, L = {l}"
        )));
    }
    Ok(BSpec::PartialDft { l, k })
}

pub fn make_support_dft_b(grid: Grid, support: Vec<usize>) -> Result<BSpec> {
    if support.is_empty() {
        return Err(Error::InvalidDimension("empty kernel support".into()));
    }
    let mut seen = vec![false; grid.len()];
    for &s in &support {
        if s >= grid.len() || seen[s] {
            return Err(Error::InvalidDimension(format!(
                "support index {s} out of range or repeated"
            )));
        }
        seen[s] = true;
    }
    Ok(BSpec::SupportDft { grid, support })
}

/// The subspace `C` of the second signal.
#[derive(Debug, Clone, PartialEq)]
pub enum CSpec {
    /// `C = F^{-1} T` with `T` an `l x n` matrix of i.i.d. `N(0,1/2) + i N(0,1/2)`
    /// entries (column-major). Because `F` is unitary, `C` has the same
    /// entry distribution as `T`.
    DenseGaussian {
        l: usize,
        n: usize,
        seed: u64,
        time: Vec<C64>,
    },
    /// `C = sqrt(L) F^{-1} W_S` where `W_S` holds the selected columns of the
    /// orthonormal Haar synthesis matrix. The gain makes the rows of `C`
    /// satisfy `sum_i c_i c_i^* = L I`, the same normalization as the
    /// Gaussian family in expectation.
    HaarSubspace { grid: Grid, selected: Vec<usize> },
}

impl CSpec {
    pub fn grid(&self) -> Grid {
        match self {
            CSpec::DenseGaussian { l, .. } => Grid::line(*l),
            CSpec::HaarSubspace { grid, .. } => *grid,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            CSpec::DenseGaussian { n, .. } => *n,
            CSpec::HaarSubspace { selected, .. } => selected.len(),
        }
    }

    /// `T m`, the time-domain image of `m`.
    fn time_apply(&self, m: &[C64]) -> Vec<C64> {
        match self {
            CSpec::DenseGaussian { l, time, .. } => {
                let mut out = vec![ZERO; *l];
                for (j, mj) in m.iter().enumerate() {
                    let col = &time[j * l..(j + 1) * l];
                    for (o, t) in out.iter_mut().zip(col) {
                        *o += t * mj;
                    }
                }
                out
            }
            CSpec::HaarSubspace { grid, selected } => {
                let mut buf = vec![ZERO; grid.len()];
                for (&s, v) in selected.iter().zip(m) {
                    buf[s] = *v;
                }
                haar::synthesis_in_place(&mut buf, grid.rows, grid.cols).expect("grid validated at construction");
                cvec::scale_in_place(&mut buf, (grid.len() as f64).sqrt());
                buf
            }
        }
    }

    /// `T^* w`
    fn time_adjoint(&self, w: &[C64]) -> Vec<C64> {
        match self {
            CSpec::DenseGaussian { l, n, time, .. } => {
                (0..*n).map(|j| cvec::dot(&time[j * l..(j + 1) * l], w)).collect()
            }
            CSpec::HaarSubspace { grid, selected } => {
                let mut buf = w.to_vec();
                haar::analysis_in_place(&mut buf, grid.rows, grid.cols).expect("grid validated at construction");
                let gain = (grid.len() as f64).sqrt();
                selected.iter().map(|&s| buf[s] * gain).collect()
            }
        }
    }
}

pub fn make_gaussian_c(l: usize, n: usize, seed: u64) -> Result<CSpec> {
    if l == 0 || n == 0 {
        return Err(Error::InvalidDimension(format!(
            "Gaussian C needs L, N >= 1, got L = {l}, N = {n}"
        )));
    }
    let mut s = rng::stream(seed);
    let time = rng::complex_normal_vec(&mut s, l * n);
    Ok(CSpec::DenseGaussian { l, n, seed, time })
}

pub fn make_haar_c(grid: Grid, selected: Vec<usize>) -> Result<CSpec> {
    if !grid.rows.is_power_of_two() || !grid.cols.is_power_of_two() {
        return Err(Error::InvalidDimension(format!(
            "Haar subspace needs power-of-two grid, got {}x{}",
            grid.rows, grid.cols
        )));
    }
    if selected.is_empty() {
        return Err(Error::InvalidDimension("no Haar columns selected".into()));
    }
    let mut seen = vec![false; grid.len()];
    for &s in &selected {
        if s >= grid.len() || seen[s] {
            return Err(Error::InvalidDimension(format!(
                "Haar column {s} out of range or repeated"
            )));
        }
        seen[s] = true;
    }
    Ok(CSpec::HaarSubspace { grid, selected })
}

/// Operation tallies: products with `B`/`B^*`, products with `C`/`C^*`, and
/// FFTs (forward or inverse).
#[derive(Debug, Default)]
pub struct Counters {
    n_bh: AtomicU64,
    n_cm: AtomicU64,
    n_fft: AtomicU64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpCounts {
    pub n_bh: u64,
    pub n_cm: u64,
    pub n_fft: u64,
}

impl std::ops::Sub for OpCounts {
    type Output = OpCounts;
    fn sub(self, rhs: Self) -> Self {
        OpCounts {
            n_bh: self.n_bh - rhs.n_bh,
            n_cm: self.n_cm - rhs.n_cm,
            n_fft: self.n_fft - rhs.n_fft,
        }
    }
}

impl std::ops::Add for OpCounts {
    type Output = OpCounts;
    fn add(self, rhs: Self) -> Self {
        OpCounts {
            n_bh: self.n_bh + rhs.n_bh,
            n_cm: self.n_cm + rhs.n_cm,
            n_fft: self.n_fft + rhs.n_fft,
        }
    }
}

impl Counters {
    fn bump(&self, bh: u64, cm: u64, fft: u64) {
        self.n_bh.fetch_add(bh, Ordering::Relaxed);
        self.n_cm.fetch_add(cm, Ordering::Relaxed);
        self.n_fft.fetch_add(fft, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> OpCounts {
        OpCounts {
            n_bh: self.n_bh.load(Ordering::Relaxed),
            n_cm: self.n_cm.load(Ordering::Relaxed),
            n_fft: self.n_fft.load(Ordering::Relaxed),
        }
    }

    pub fn reset(&self) {
        self.n_bh.store(0, Ordering::Relaxed);
        self.n_cm.store(0, Ordering::Relaxed);
        self.n_fft.store(0, Ordering::Relaxed);
    }
}

/// Unitary DFT on a column-major grid.
struct Fourier {
    grid: Grid,
    col_fwd: Arc<dyn Fft<f64>>,
    col_inv: Arc<dyn Fft<f64>>,
    row_fwd: Option<(FftPlan, FftPlan)>,
    scale: f64,
}

impl Fourier {
    fn new(grid: Grid) -> Self {
        let mut planner = FftPlanner::new();
        let row_fwd =
            (grid.cols > 1).then(|| (planner.plan_fft_forward(grid.cols), planner.plan_fft_inverse(grid.cols)));
        Self {
            grid,
            col_fwd: planner.plan_fft_forward(grid.rows),
            col_inv: planner.plan_fft_inverse(grid.rows),
            row_fwd,
            scale: 1.0 / (grid.len() as f64).sqrt(),
        }
    }

    fn transform(&self, x: &mut [C64], inverse: bool) {
        let (rows, cols) = (self.grid.rows, self.grid.cols);
        if inverse {
            self.col_inv.process(x);
        } else {
            self.col_fwd.process(x);
        }
        if let Some((fwd, inv)) = &self.row_fwd {
            // Transpose so each image row is contiguous.
            let mut t = vec![ZERO; x.len()];
            for c in 0..cols {
                for r in 0..rows {
                    t[c + r * cols] = x[r + c * rows];
                }
            }
            if inverse {
                inv.process(&mut t);
            } else {
                fwd.process(&mut t);
            }
            for r in 0..rows {
                for c in 0..cols {
                    x[r + c * rows] = t[c + r * cols];
                }
            }
        }
        cvec::scale_in_place(x, self.scale);
    }
}

/// Unitary 2D DFT of a column-major array on `grid` (forward or inverse),
/// the same transform the operator uses internally.
pub fn unitary_dft(x: &mut [C64], grid: Grid, inverse: bool) -> Result<()> {
    if x.len() != grid.len() {
        return Err(Error::DimensionMismatch {
            what: "DFT input",
            expected: grid.len(),
            got: x.len(),
        });
    }
    Fourier::new(grid).transform(x, inverse);
    Ok(())
}

/// Products computed by one forward application, kept so that a gradient at
/// the same point does not repeat them.
#[derive(Debug, Clone)]
pub struct Forward {
    pub bh: Vec<C64>,
    pub cm: Vec<C64>,
    pub values: Vec<C64>,
}

pub struct MeasurementOperator {
    grid: Grid,
    support: Vec<usize>,
    c: CSpec,
    fourier: Fourier,
    counters: Counters,
}

impl std::fmt::Debug for MeasurementOperator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MeasurementOperator")
            .field("grid", &self.grid)
            .field("k", &self.k())
            .field("n", &self.n())
            .finish()
    }
}

impl MeasurementOperator {
    pub fn new(b: BSpec, c: CSpec) -> Result<Self> {
        let grid = b.grid();
        if c.grid() != grid {
            return Err(Error::DimensionMismatch {
                what: "C rows vs L",
                expected: grid.len(),
                got: c.grid().len(),
            });
        }
        Ok(Self {
            grid,
            support: b.support(),
            c,
            fourier: Fourier::new(grid),
            counters: Counters::default(),
        })
    }

    /// Partial-DFT `B` with a dense Gaussian `C`.
    pub fn gaussian(l: usize, k: usize, n: usize, seed: u64) -> Result<Self> {
        Self::new(make_partial_dft_b(l, k)?, make_gaussian_c(l, n, seed)?)
    }

    pub fn l(&self) -> usize {
        self.grid.len()
    }

    pub fn k(&self) -> usize {
        self.support.len()
    }

    pub fn n(&self) -> usize {
        self.c.n()
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn c_spec(&self) -> &CSpec {
        &self.c
    }

    pub fn counts(&self) -> OpCounts {
        self.counters.snapshot()
    }

    pub fn reset_counts(&self) {
        self.counters.reset()
    }

    fn expect_len(what: &'static str, v: &[C64], n: usize) -> Result<()> {
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                what,
                expected: n,
                got: v.len(),
            });
        }
        Ok(())
    }

    // Unchecked primitives. Each is one counted product and one FFT.

    pub(crate) fn b_raw(&self, h: &[C64]) -> Vec<C64> {
        let mut buf = vec![ZERO; self.l()];
        for (&s, v) in self.support.iter().zip(h) {
            buf[s] = *v;
        }
        self.fourier.transform(&mut buf, false);
        self.counters.bump(1, 0, 1);
        buf
    }

    pub(crate) fn b_adjoint_raw(&self, z: &[C64]) -> Vec<C64> {
        self.counters.bump(1, 0, 0);
        self.b_adjoint_same_pass(z)
    }

    /// `B^* z` issued as the second transform of a gradient pass that already
    /// counted its `B`-side product; only the FFT is tallied.
    pub(crate) fn b_adjoint_same_pass(&self, z: &[C64]) -> Vec<C64> {
        let mut buf = z.to_vec();
        self.fourier.transform(&mut buf, true);
        self.counters.bump(0, 0, 1);
        self.support.iter().map(|&s| buf[s]).collect()
    }

    pub(crate) fn c_raw(&self, m: &[C64]) -> Vec<C64> {
        let mut buf = self.c.time_apply(m);
        self.fourier.transform(&mut buf, true);
        self.counters.bump(0, 1, 1);
        buf
    }

    pub(crate) fn c_adjoint_raw(&self, v: &[C64]) -> Vec<C64> {
        let mut buf = v.to_vec();
        self.fourier.transform(&mut buf, false);
        self.counters.bump(0, 1, 1);
        self.c.time_adjoint(&buf)
    }

    pub(crate) fn forward_raw(&self, h: &[C64], m: &[C64]) -> Forward {
        let bh = self.b_raw(h);
        let cm = self.c_raw(m);
        let values = bh.iter().zip(&cm).map(|(a, b)| a * b.conj()).collect();
        Forward { bh, cm, values }
    }

    // Checked public API.

    /// `B h`
    pub fn apply_b(&self, h: &[C64]) -> Result<Vec<C64>> {
        Self::expect_len("h", h, self.k())?;
        Ok(self.b_raw(h))
    }

    /// `B^* z`
    pub fn apply_b_adjoint(&self, z: &[C64]) -> Result<Vec<C64>> {
        Self::expect_len("z", z, self.l())?;
        Ok(self.b_adjoint_raw(z))
    }

    /// `C m`
    pub fn apply_c(&self, m: &[C64]) -> Result<Vec<C64>> {
        Self::expect_len("m", m, self.n())?;
        Ok(self.c_raw(m))
    }

    /// `C^* v`
    pub fn apply_c_adjoint(&self, v: &[C64]) -> Result<Vec<C64>> {
        Self::expect_len("v", v, self.l())?;
        Ok(self.c_adjoint_raw(v))
    }

    /// `A(h m^*) = diag(B h m^* C^*)`.
    pub fn apply(&self, h: &[C64], m: &[C64]) -> Result<Vec<C64>> {
        Ok(self.forward(h, m)?.values)
    }

    pub fn forward(&self, h: &[C64], m: &[C64]) -> Result<Forward> {
        Self::expect_len("h", h, self.k())?;
        Self::expect_len("m", m, self.n())?;
        Ok(self.forward_raw(h, m))
    }

    /// Dense `A^*(z) = B^* diag(z) C`, one column at a time.
    pub fn apply_adjoint(&self, z: &[C64]) -> Result<CMatrix> {
        Self::expect_len("z", z, self.l())?;
        let mut e = vec![ZERO; self.n()];
        let cols: Vec<Vec<C64>> = (0..self.n())
            .map(|j| {
                e.iter_mut().for_each(|v| *v = ZERO);
                e[j] = C64::new(1.0, 0.0);
                let cj = self.c_raw(&e);
                let w: Vec<C64> = z.iter().zip(&cj).map(|(a, b)| a * b).collect();
                self.b_adjoint_raw(&w)
            })
            .collect();
        Ok(CMatrix::from_columns(self.k(), &cols))
    }

    /// `A^*(z) v = B^*(z ⊙ C v)` without forming `A^*(z)`.
    pub fn adjoint_times_vec(&self, z: &[C64], v: &[C64]) -> Result<Vec<C64>> {
        Self::expect_len("z", z, self.l())?;
        Self::expect_len("v", v, self.n())?;
        Ok(self.adjoint_times_vec_raw(z, v))
    }

    /// `A^*(z)^* u = C^*(conj(z) ⊙ B u)`.
    pub fn adjoint_conj_times_vec(&self, z: &[C64], u: &[C64]) -> Result<Vec<C64>> {
        Self::expect_len("z", z, self.l())?;
        Self::expect_len("u", u, self.k())?;
        Ok(self.adjoint_conj_times_vec_raw(z, u))
    }

    fn adjoint_times_vec_raw(&self, z: &[C64], v: &[C64]) -> Vec<C64> {
        let cv = self.c_raw(v);
        let w: Vec<C64> = z.iter().zip(&cv).map(|(a, b)| a * b).collect();
        self.b_adjoint_raw(&w)
    }

    fn adjoint_conj_times_vec_raw(&self, z: &[C64], u: &[C64]) -> Vec<C64> {
        let bu = self.b_raw(u);
        let w: Vec<C64> = z.iter().zip(&bu).map(|(a, b)| a.conj() * b).collect();
        self.c_adjoint_raw(&w)
    }

    /// `sqrt(L) |B h|_inf / |h|`.
    pub fn coherence(&self, h: &[C64]) -> Result<f64> {
        let bh = self.apply_b(h)?;
        Ok((self.l() as f64).sqrt() * cvec::norm_inf(&bh) / cvec::norm(h))
    }
}

/// Explicit `L x K` matrix of `B` from the DFT formula. O(L K); for oracles.
pub fn dense_b(op: &MeasurementOperator) -> CMatrix {
    let g = op.grid();
    let scale = 1.0 / (g.len() as f64).sqrt();
    let mut out = CMatrix::zeros(g.len(), op.k());
    for (j, &s) in op.support().iter().enumerate() {
        let (sr, sc) = (s % g.rows, s / g.rows);
        for l in 0..g.len() {
            let (r, c) = (l % g.rows, l / g.rows);
            let phase =
                -2.0 * PI * (((r * sr) % g.rows) as f64 / g.rows as f64 + ((c * sc) % g.cols) as f64 / g.cols as f64);
            out.set(l, j, C64::from_polar(scale, phase));
        }
    }
    out
}

/// Explicit `L x N` matrix of `C = F^{-1} T`. O(L^2 N); for oracles.
pub fn dense_c(op: &MeasurementOperator) -> CMatrix {
    let g = op.grid();
    let l = g.len();
    let time: Vec<Vec<C64>> = match op.c_spec() {
        CSpec::DenseGaussian { l, n, time, .. } => (0..*n).map(|j| time[j * l..(j + 1) * l].to_vec()).collect(),
        CSpec::HaarSubspace { grid, selected } => selected
            .iter()
            .map(|&s| {
                let mut e = vec![ZERO; grid.len()];
                e[s] = C64::new((grid.len() as f64).sqrt(), 0.0);
                haar::synthesis_in_place(&mut e, grid.rows, grid.cols).unwrap();
                e
            })
            .collect(),
    };
    let full = dense_b(&MeasurementOperator {
        grid: g,
        support: (0..l).collect(),
        c: op.c_spec().clone(),
        fourier: Fourier::new(g),
        counters: Counters::default(),
    });
    // F^{-1} = F^* and F is symmetric, so (F^{-1})_{lt} = conj(F_{lt}).
    let cols: Vec<Vec<C64>> = time
        .iter()
        .map(|t| {
            (0..l)
                .map(|row| (0..l).map(|col| full.get(row, col).conj() * t[col]).sum())
                .collect()
        })
        .collect();
    CMatrix::from_columns(l, &cols)
}

/// Additive measurement noise scaled to a fixed signal-to-noise ratio:
/// `e = tau |A(h m^*)| w / |w|`, so `|A(h m^*)|^2 / |e|^2 = 1 / tau^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub tau: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn from_snr_db(snr_db: f64, seed: u64) -> Self {
        Self {
            tau: 10f64.powf(-snr_db / 20.0),
            seed,
        }
    }

    pub fn snr_db(&self) -> f64 {
        -20.0 * self.tau.log10()
    }

    pub fn sample(&self, clean: &[C64]) -> Vec<C64> {
        let mut s = rng::stream(self.seed);
        let w = rng::complex_normal_vec(&mut s, clean.len());
        let k = self.tau * cvec::norm(clean) / cvec::norm(&w);
        cvec::scale_real(&w, k)
    }
}

/// Leading singular triple of `A^*(y)` by power iteration on the matrix-free
/// products `A^*(y) v` and `A^*(y)^* u`.
///
/// Stops once `|A^*(y) m - d h| <= tol * d`.
pub fn leading_singular_triple(
    op: &MeasurementOperator,
    y: &[C64],
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<SingularTriple> {
    MeasurementOperator::expect_len("y", y, op.l())?;
    if cvec::norm(y) == 0.0 {
        return Err(Error::InvalidParameter("y must be nonzero".into()));
    }
    let mut s = rng::stream(seed);
    let mut right = rng::complex_normal_vec(&mut s, op.n());
    let r0 = cvec::norm(&right);
    cvec::scale_in_place(&mut right, 1.0 / r0);
    let mut image = op.adjoint_times_vec_raw(y, &right);

    let mut best: Option<(f64, SingularTriple)> = None;
    for _ in 0..max_iter {
        let un = cvec::norm(&image);
        if un == 0.0 {
            return Err(Error::InvalidParameter("A^*(y) annihilates the start vector".into()));
        }
        let left = cvec::scale_real(&image, 1.0 / un);
        let w = op.adjoint_conj_times_vec_raw(y, &left);
        let d = cvec::norm(&w);
        right = cvec::scale_real(&w, 1.0 / d);
        image = op.adjoint_times_vec_raw(y, &right);
        let residual = cvec::norm(&cvec::axpy(&image, -d, &left));
        let triple = SingularTriple {
            value: d,
            left,
            right: right.clone(),
        };
        if residual <= tol * d {
            return Ok(triple);
        }
        let rel = residual / d;
        if best.as_ref().is_none_or(|(r, _)| rel < *r) {
            best = Some((rel, triple));
        }
    }
    let (residual, best) = best.expect("max_iter >= 1");
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual,
        best: Box::new(best),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const I: C64 = C64 { re: 0.0, im: 1.0 };

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    fn random(n: usize, seed: u64) -> Vec<C64> {
        rng::complex_normal_vec(&mut rng::stream(seed), n)
    }

    /// `C = [1, i]^T` on `L = 2`: `T = F C`.
    fn two_point_operator() -> MeasurementOperator {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let time = vec![c(r, r), c(r, -r)];
        MeasurementOperator::new(
            make_partial_dft_b(2, 1).unwrap(),
            CSpec::DenseGaussian {
                l: 2,
                n: 1,
                seed: 0,
                time,
            },
        )
        .unwrap()
    }

    #[test]
    fn partial_dft_small_cases() {
        let op = MeasurementOperator::gaussian(1, 1, 1, 0).unwrap();
        let bh = op.apply_b(&[c(1.0, 0.0)]).unwrap();
        assert!((bh[0] - c(1.0, 0.0)).norm() < 1e-15);

        let op = MeasurementOperator::gaussian(2, 1, 1, 0).unwrap();
        let bh = op.apply_b(&[c(1.0, 0.0)]).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!(max_abs_diff(&bh, &[c(r, 0.0), c(r, 0.0)]) < 1e-15);
    }

    #[test]
    fn partial_dft_matches_dense_and_is_isometric() {
        let op = MeasurementOperator::gaussian(4, 2, 1, 0).unwrap();
        let h = random(2, 9);
        let dense = dense_b(&op);
        assert!(max_abs_diff(&op.apply_b(&h).unwrap(), &dense.mul_vec(&h)) < 1e-12);

        let op = MeasurementOperator::gaussian(12, 5, 1, 0).unwrap();
        let b = dense_b(&op);
        let gram = b.adjoint().mul(&b);
        for i in 0..5 {
            for j in 0..5 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((gram.get(i, j) - c(want, 0.0)).norm() < 1e-12);
            }
        }
        for l in 0..12 {
            let row: f64 = (0..5).map(|j| b.get(l, j).norm_sqr()).sum();
            assert!((row.sqrt() - (5.0f64 / 12.0).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(matches!(make_partial_dft_b(3, 4), Err(Error::InvalidDimension(_))));
        assert!(make_partial_dft_b(3, 0).is_err());
        assert!(make_gaussian_c(0, 2, 1).is_err());
        let op = MeasurementOperator::gaussian(8, 3, 2, 1).unwrap();
        assert!(matches!(
            op.apply(&random(2, 1), &random(2, 2)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(op.apply_adjoint(&random(7, 1)).is_err());
        assert!(make_support_dft_b(Grid::image(4, 4), vec![]).is_err());
        assert!(make_support_dft_b(Grid::image(4, 4), vec![1, 1]).is_err());
        assert!(make_haar_c(Grid::image(6, 4), vec![0]).is_err());
    }

    #[test]
    fn gaussian_c_is_deterministic() {
        let a = make_gaussian_c(16, 3, 42).unwrap();
        let b = make_gaussian_c(16, 3, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, make_gaussian_c(16, 3, 43).unwrap());
    }

    #[test]
    fn gaussian_c_entry_power() {
        let op = MeasurementOperator::gaussian(10_000, 1, 1, 7).unwrap();
        // C e_1 through the FFT path.
        let col = op.apply_c(&[c(1.0, 0.0)]).unwrap();
        let mean = cvec::norm_sqr(&col) / col.len() as f64;
        assert!((mean - 1.0).abs() < 0.05, "{mean}");
    }

    #[test]
    fn gaussian_c_real_part_variance_across_seeds() {
        let vals: Vec<f64> = (0..10_000u64)
            .map(|s| {
                let op = MeasurementOperator::gaussian(1, 1, 1, s).unwrap();
                op.apply_c(&[c(1.0, 0.0)]).unwrap()[0].re
            })
            .collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (vals.len() - 1) as f64;
        assert!((var - 0.5).abs() < 0.05, "{var}");
    }

    #[test]
    fn apply_two_point_example() {
        let op = two_point_operator();
        let dc = dense_c(&op);
        assert!(max_abs_diff(&dc.data, &[c(1.0, 0.0), I]) < 1e-15);
        let z = op.apply(&[c(1.0, 0.0)], &[c(1.0, 0.0)]).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!(max_abs_diff(&z, &[c(r, 0.0), c(0.0, -r)]) < 1e-15);
        let adj = op.apply_adjoint(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((adj.get(0, 0) - c(r, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn apply_zero_inputs() {
        let op = MeasurementOperator::gaussian(8, 3, 2, 1).unwrap();
        let z = op.apply(&[ZERO; 3], &random(2, 1)).unwrap();
        assert!(cvec::norm(&z) == 0.0);
        let z = op.apply(&random(3, 1), &[ZERO; 2]).unwrap();
        assert!(cvec::norm(&z) == 0.0);
        let m = op.apply_adjoint(&[ZERO; 8]).unwrap();
        assert_eq!(m.frobenius(), 0.0);
        assert_eq!(
            cvec::norm(&op.adjoint_times_vec(&random(8, 2), &[ZERO; 2]).unwrap()),
            0.0
        );
    }

    #[test]
    fn apply_matches_dense_diag() {
        let op = MeasurementOperator::gaussian(8, 3, 2, 5).unwrap();
        let (h, m) = (random(3, 1), random(2, 2));
        let z = op.apply(&h, &m).unwrap();
        let b = dense_b(&op);
        let cm = dense_c(&op);
        let full = b.mul(&CMatrix::outer(&h, &m)).mul(&cm.adjoint());
        let diag: Vec<C64> = (0..8).map(|l| full.get(l, l)).collect();
        assert!(max_abs_diff(&z, &diag) < 1e-12);
    }

    #[test]
    fn adjoint_matches_dense_and_identity() {
        let op = MeasurementOperator::gaussian(8, 3, 2, 5).unwrap();
        let (h, m, z) = (random(3, 1), random(2, 2), random(8, 3));
        let adj = op.apply_adjoint(&z).unwrap();
        let b = dense_b(&op);
        let cm = dense_c(&op);
        let mut bz = b.adjoint();
        for (l, &zl) in z.iter().enumerate() {
            for k in 0..3 {
                bz.set(k, l, bz.get(k, l) * zl);
            }
        }
        let want = bz.mul(&cm);
        assert!(max_abs_diff(&adj.data, &want.data) < 1e-12);

        let lhs = cvec::re_dot(&op.apply(&h, &m).unwrap(), &z);
        let rhs = CMatrix::outer(&h, &m).re_inner(&adj);
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn adjoint_times_vec_matches_dense() {
        let op = MeasurementOperator::gaussian(16, 4, 3, 8).unwrap();
        let (z, v, u) = (random(16, 1), random(3, 2), random(4, 3));
        let adj = op.apply_adjoint(&z).unwrap();
        assert!(max_abs_diff(&op.adjoint_times_vec(&z, &v).unwrap(), &adj.mul_vec(&v)) < 1e-12);
        assert!(max_abs_diff(&op.adjoint_conj_times_vec(&z, &u).unwrap(), &adj.adjoint_mul_vec(&u)) < 1e-12);

        let op = MeasurementOperator::gaussian(5, 1, 1, 8).unwrap();
        let z = random(5, 4);
        let a = op.apply_adjoint(&z).unwrap().get(0, 0);
        let v = c(0.3, -1.2);
        assert!((op.adjoint_times_vec(&z, &[v]).unwrap()[0] - a * v).norm() < 1e-12);
    }

    #[test]
    fn two_dimensional_support_matches_dense() {
        let grid = Grid::image(4, 8);
        let b = make_support_dft_b(grid, vec![0, 1, 5, 31]).unwrap();
        let cs = make_haar_c(grid, vec![0, 3, 7, 12, 20]).unwrap();
        let op = MeasurementOperator::new(b, cs).unwrap();
        let (h, m, z) = (random(4, 1), random(5, 2), random(32, 3));
        let db = dense_b(&op);
        let dc = dense_c(&op);
        assert!(max_abs_diff(&op.apply_b(&h).unwrap(), &db.mul_vec(&h)) < 1e-12);
        assert!(max_abs_diff(&op.apply_c(&m).unwrap(), &dc.mul_vec(&m)) < 1e-12);
        assert!(max_abs_diff(&op.apply_c_adjoint(&z).unwrap(), &dc.adjoint_mul_vec(&z)) < 1e-12);
        assert!(max_abs_diff(&op.apply_b_adjoint(&z).unwrap(), &db.adjoint_mul_vec(&z)) < 1e-12);
    }

    #[test]
    fn counters_per_forward_application() {
        let op = MeasurementOperator::gaussian(16, 3, 2, 1).unwrap();
        let before = op.counts();
        op.apply(&random(3, 1), &random(2, 2)).unwrap();
        let d = op.counts() - before;
        assert_eq!(
            d,
            OpCounts {
                n_bh: 1,
                n_cm: 1,
                n_fft: 2
            }
        );
        op.reset_counts();
        assert_eq!(op.counts(), OpCounts::default());
    }

    #[test]
    fn noise_has_requested_snr() {
        let clean = random(64, 1);
        let noise = NoiseModel::from_snr_db(20.0, 3);
        let e = noise.sample(&clean);
        let snr = cvec::norm_sqr(&clean) / cvec::norm_sqr(&e);
        assert!((snr - 100.0).abs() < 1e-9);
        assert!((noise.snr_db() - 20.0).abs() < 1e-12);
    }

    #[test]
    fn singular_triple_of_rank_one_adjoint() {
        // K = N = 1 makes A^*(y) a 1x1 matrix, trivially rank one.
        let op = MeasurementOperator::gaussian(6, 1, 1, 2).unwrap();
        let y = random(6, 4);
        let t = leading_singular_triple(&op, &y, 1e-10, 500, 1).unwrap();
        let f = op.apply_adjoint(&y).unwrap().frobenius();
        assert!((t.value - f).abs() < 1e-8 * f);
    }

    #[test]
    fn singular_triple_rejects_zero_measurements() {
        let op = MeasurementOperator::gaussian(6, 2, 2, 2).unwrap();
        assert!(matches!(
            leading_singular_triple(&op, &[ZERO; 6], 1e-10, 10, 0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn singular_triple_reports_non_convergence() {
        let op = MeasurementOperator::gaussian(32, 4, 4, 2).unwrap();
        let y = random(32, 4);
        match leading_singular_triple(&op, &y, 1e-300, 3, 1) {
            Err(Error::NoConvergence { iterations, best, .. }) => {
                assert_eq!(iterations, 3);
                assert!((cvec::norm(&best.left) - 1.0).abs() < 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
