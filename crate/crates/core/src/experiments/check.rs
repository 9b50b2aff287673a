//! Batch run of the library's invariants on small random instances. Each
//! check reports a measured discrepancy against a fixed tolerance.

use serde::{Deserialize, Serialize};

use crate::cvec;
use crate::error::{Error, Result};
use crate::experiments::deblur::{run_deblur, DeblurSpec};
use crate::experiments::image::{test_image, GrayImage};
use crate::experiments::kernels::{make_kernel, KernelKind};
use crate::experiments::{fmt_f, pgm, run_bench, Algorithm, BenchSpec, Output, SyntheticProblem, Table};
use crate::haar;
use crate::linops::{unitary_dft, Grid, MeasurementOperator};
use crate::manifold::{self, FactorPair, HorizontalVector, TangentPair};
use crate::objective::{default_mu, Objective, PenaltyParams};
use crate::rng;
use crate::solvers::{
    ama_solve, rmse, rsd_solve, spectral_init, wirtinger_solve, PowerOptions, SolverConfig, StepPolicy,
    WirtingerObjective, WirtingerVariant,
};
use crate::C64;

/// Deliberate defects used to confirm the suite can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mutation {
    /// Negate `A^*(z)` inside the adjoint check.
    AdjointSign,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSpec {
    pub k: usize,
    pub n: usize,
    pub l: usize,
    pub seed: u64,
    pub mutation: Option<Mutation>,
}

impl Default for CheckSpec {
    fn default() -> Self {
        Self {
            k: 16,
            n: 16,
            l: 192,
            seed: 7,
            mutation: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub value: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct CheckReport {
    pub results: Vec<CheckResult>,
}

impl CheckReport {
    fn record(&mut self, name: &'static str, value: f64, tolerance: f64) {
        let passed = value.is_finite() && value <= tolerance;
        self.results.push(CheckResult {
            name,
            value,
            tolerance,
            passed,
        });
    }

    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn get(&self, name: &str) -> Option<&CheckResult> {
        self.results.iter().find(|r| r.name == name)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.results.iter().filter(|r| !r.passed).map(|r| r.name).collect()
    }

    pub fn table(&self) -> Table {
        Table {
            header: vec!["check", "value", "tolerance", "passed"],
            rows: self
                .results
                .iter()
                .map(|r| {
                    vec![
                        r.name.to_string(),
                        fmt_f(r.value),
                        fmt_f(r.tolerance),
                        r.passed.to_string(),
                    ]
                })
                .collect(),
        }
    }

    pub fn output(&self, spec: &CheckSpec) -> Result<Output> {
        let extra = serde_json::json!({
            "all_passed": self.all_passed(),
            "failures": self.failures(),
        });
        Output::new("check", spec, self.table(), extra)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn random_pair(k: usize, n: usize, seed: u64) -> Result<FactorPair> {
    let mut s = rng::stream(seed);
    FactorPair::new(rng::complex_normal_vec(&mut s, k), rng::complex_normal_vec(&mut s, n))
}

fn random_tangent(k: usize, n: usize, seed: u64) -> TangentPair {
    let mut s = rng::stream(seed);
    TangentPair::new(rng::complex_normal_vec(&mut s, k), rng::complex_normal_vec(&mut s, n))
}

fn image_close(a: &GrayImage, b: &GrayImage) -> f64 {
    a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn run_check(spec: &CheckSpec) -> Result<CheckReport> {
    let (k, n, l) = (spec.k, spec.n, spec.l);
    if k == 0 || n == 0 || l < k.max(n) || l < 4 {
        return Err(Error::InvalidParameter(format!(
            "check needs K, N >= 1 and L >= max(K, N, 4), got K = {k}, N = {n}, L = {l}"
        )));
    }
    let seed = spec.seed;
    let sub = |i: u64| rng::derive(seed, &[i]);
    let mut rep = CheckReport::default();

    let op = MeasurementOperator::gaussian(l, k, n, sub(1))?;
    let x = random_pair(k, n, sub(2))?;
    let mut zs = rng::stream(sub(3));
    let z = rng::complex_normal_vec(&mut zs, l);

    // <A(h m^*), z> = h^* A^*(z) m
    let lhs = cvec::dot(&op.apply(x.h(), x.m())?, &z);
    let mut adj = op.adjoint_times_vec(&z, x.m())?;
    if spec.mutation == Some(Mutation::AdjointSign) {
        adj.iter_mut().for_each(|v| *v = -*v);
    }
    let rhs = cvec::dot(&adj, x.h()).conj();
    rep.record(
        "adjoint_identity",
        (lhs - rhs).norm() / lhs.norm().max(rhs.norm()),
        1e-10,
    );

    let bh = op.apply_b(x.h())?;
    let v = op.apply_b_adjoint(&z)?;
    let e = (cvec::dot(&bh, &z) - cvec::dot(x.h(), &v)).norm() / (cvec::norm(&bh) * cvec::norm(&z));
    rep.record("b_adjoint", e, 1e-12);

    let cm = op.apply_c(x.m())?;
    let w = op.apply_c_adjoint(&z)?;
    let e = (cvec::dot(&cm, &z) - cvec::dot(x.m(), &w)).norm() / (cvec::norm(&cm) * cvec::norm(&z));
    rep.record("c_adjoint", e, 1e-12);

    let grid = Grid::image(8, 16);
    let mut f = rng::complex_normal_vec(&mut zs, grid.len());
    let orig = f.clone();
    unitary_dft(&mut f, grid, false)?;
    let energy = rel(cvec::norm(&f), cvec::norm(&orig));
    unitary_dft(&mut f, grid, true)?;
    let round = cvec::norm(&cvec::sub(&f, &orig)) / cvec::norm(&orig);
    rep.record("dft_unitary", energy.max(round), 1e-12);

    let img: Vec<f64> = (0..grid.len()).map(|_| rng::real_normal(&mut zs)).collect();
    let coeffs = haar::haar_analysis(&img, grid.rows, grid.cols)?;
    let back = haar::haar_synthesis(&coeffs, grid.rows, grid.cols)?;
    let e_round = img.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let e_pars = rel(img.iter().map(|v| v * v).sum(), coeffs.iter().map(|v| v * v).sum());
    rep.record("haar_orthonormal", e_round.max(e_pars), 1e-12);

    // Geometry
    let eta = random_tangent(k, n, sub(4));
    let xi = random_tangent(k, n, sub(5));
    let p = C64::new(0.8, -1.3);
    let g0 = manifold::metric(&x, &eta, &xi);
    let g1 = manifold::metric(&x.act(p), &eta.act(p), &xi.act(p));
    rep.record("metric_invariance", rel(g0, g1), 1e-12);

    let hz = manifold::horizontal_project(&x, &eta)?;
    let vert = manifold::vertical_project(&x, &eta);
    let twice = manifold::horizontal_project(&x, hz.dir())?;
    let e_idem = twice.dir().sub(hz.dir()).norm_sqr().sqrt() / hz.dir().norm_sqr().sqrt();
    let e_orth = manifold::metric(&x, hz.dir(), &vert).abs() / (manifold::metric(&x, &eta, &eta));
    let e_hor = HorizontalVector::new(x.clone(), hz.dir().clone()).is_err() as u8 as f64;
    rep.record("horizontal_projection", e_idem.max(e_orth).max(e_hor), 1e-10);

    let r0 = manifold::retract(&x, &TangentPair::zeros(k, n))?;
    rep.record("retraction_at_zero", (r0 != x) as u8 as f64, 0.0);

    let xb = manifold::balance(&x);
    let e_prod = xb.product().sub(&x.product()).frobenius() / x.product().frobenius();
    let e_bal = rel(xb.h_norm(), xb.m_norm());
    rep.record("balance_keeps_product", e_prod.max(e_bal), 1e-12);

    let xi_h = manifold::horizontal_project(&xb, &xi)?;
    let eta_h = manifold::horizontal_project(&xb, &eta.scaled(0.1))?;
    let moved = manifold::transport(&eta_h, &xi_h)?;
    let e_iso = rel(moved.norm(), xi_h.norm());
    let e_hmove = HorizontalVector::new(moved.base().clone(), moved.dir().clone()).is_err() as u8 as f64;
    rep.record("transport_isometry", e_iso.max(e_hmove), 1e-10);

    // Objective
    let truth = random_pair(k, n, sub(6))?;
    let y_clean = op.apply(truth.h(), truth.m())?;
    let y: Vec<C64> = y_clean.iter().zip(&z).map(|(a, b)| a + b * 0.05).collect();
    let d = truth.h_norm() * truth.m_norm();
    // a small mu keeps the penalty active at the test point
    let obj = Objective::new(&op, &y, PenaltyParams::new(d * d / 100.0, d, 0.5)?)?;
    let ev = obj.evaluate(&xb)?;
    let grad = obj.euclidean_gradient(&ev);
    let t = 1e-6 * xb.h_norm();
    let fd = (obj.cost(&manifold::retract(&xb, &eta.scaled(t))?)?
        - obj.cost(&manifold::retract(&xb, &eta.scaled(-t))?)?)
        / (2.0 * t);
    rep.record("euclidean_gradient_fd", rel(grad.re_dot(&eta), fd), 1e-5);
    rep.record("penalty_active", (ev.penalty <= 0.0) as u8 as f64, 0.0);

    let rg = obj.riemannian_gradient(&ev)?;
    let lhs = rg.inner(&xi_h)?;
    let fd = (obj.cost(&manifold::retract(&xb, &xi_h.dir().scaled(t))?)?
        - obj.cost(&manifold::retract(&xb, &xi_h.dir().scaled(-t))?)?)
        / (2.0 * t);
    rep.record("riemannian_gradient_fd", rel(lhs, fd), 1e-5);

    let fx = obj.cost(&xb)?;
    let fp = obj.cost(&xb.act(p))?;
    rep.record("cost_quotient_invariance", rel(fx, fp), 1e-12);

    let plain = Objective::new(&op, &y, PenaltyParams::disabled(d))?;
    let evp = plain.evaluate(&xb)?;
    let q = plain.hessian_quadratic_form(&evp, xi_h.dir())?;
    let second = |s: f64| -> Result<f64> {
        let up = plain.cost(&manifold::retract(&xb, &xi_h.dir().scaled(s))?)?;
        let dn = plain.cost(&manifold::retract(&xb, &xi_h.dir().scaled(-s))?)?;
        Ok((up - 2.0 * evp.value() + dn) / (s * s))
    };
    let (s1, s2) = (1e-3, 5e-4);
    let rich = (4.0 * second(s2)? - second(s1)?) / 3.0;
    rep.record("hessian_fd", rel(q, rich), 1e-4);

    let wobj = WirtingerObjective::new(&op, &y, PenaltyParams::disabled(d))?;
    let wev = wobj.evaluate(&xb)?;
    let half = plain.euclidean_gradient(&evp).scaled(0.5);
    let wd = wobj.derivative(&wev);
    rep.record(
        "wirtinger_half_gradient",
        wd.sub(&half).norm_sqr().sqrt() / half.norm_sqr().sqrt(),
        1e-12,
    );

    // Solvers on a noiseless instance well above the sampling limit
    let prob = SyntheticProblem::generate(l, k, n, sub(7), None)?;
    let mu = default_mu(l, k, n);
    let init = spectral_init(
        &prob.op,
        &prob.y,
        mu,
        PowerOptions {
            seed: sub(8),
            ..PowerOptions::default()
        },
        true,
    )?;
    let coh = (l as f64).sqrt() * cvec::norm_inf(&prob.op.apply_b(init.x0.h())?);
    rep.record("init_coherence_bound", coh / (2.0 * init.d.sqrt() * mu), 1.0 + 1e-9);

    let penalty = PenaltyParams::experiment(init.d, l, k, n)?;
    let cfg = SolverConfig {
        step: StepPolicy::BbBacktracking,
        max_iter: 1000,
        ..SolverConfig::default()
    };
    let pobj = Objective::new(&prob.op, &prob.y, penalty)?;
    let robb = rsd_solve(&pobj, &init.x0, init.d, &cfg)?;
    rep.record("rsd_recovery", rmse(&robb.x, &prob.truth), 1e-6);
    let monotone = robb.costs.windows(2).filter(|w| w[1] > w[0] * (1.0 + 1e-12)).count();
    rep.record("rsd_monotone_cost", monotone as f64, 0.0);

    let bt = SolverConfig {
        step: StepPolicy::Backtracking { init: None },
        max_iter: 3000,
        ..SolverConfig::default()
    };
    let nc = wirtinger_solve(&prob.op, &prob.y, &init.x0, penalty, &bt, WirtingerVariant::BbInitStep)?;
    rep.record("wirtinger_recovery", rmse(&nc.x, &prob.truth), 1e-6);

    let am = ama_solve(&prob.op, &prob.y, &init.balanced(), &cfg)?;
    rep.record("ama_recovery", rmse(&am.x, &prob.truth), 1e-6);

    // Experiments plumbing
    let mut worst: f64 = 0.0;
    for kind in [
        KernelKind::motion(9.0),
        KernelKind::gaussian(1.5),
        KernelKind::Sin { len: 7 },
    ] {
        let kern = make_kernel(kind)?;
        let sum: f64 = kern.values.iter().sum();
        let neg = kern.values.iter().any(|v| *v < 0.0) as u8 as f64;
        worst = worst.max((sum - 1.0).abs()).max(neg);
    }
    rep.record("kernel_normalized", worst, 1e-12);

    let small = test_image(32);
    let quant = GrayImage::new(
        small.rows,
        small.cols,
        small.data.iter().map(|v| (v * 255.0).round() / 255.0).collect(),
    )?;
    let decoded = pgm::decode(&pgm::encode(&quant))?;
    rep.record("pgm_round_trip", image_close(&decoded, &quant), 1e-12);

    let bench = BenchSpec {
        l: 48,
        k: 6,
        n: 6,
        trials: 1,
        seed,
        algorithms: vec![Algorithm::Robb, Algorithm::Ama],
        max_iter: 200,
    };
    let a = run_bench(&bench)?.1.table.to_csv();
    let b = run_bench(&bench)?.1.table.to_csv();
    rep.record("csv_determinism", (a != b) as u8 as f64, 0.0);

    let dspec = DeblurSpec {
        checkpoints: vec![10, 20],
        seed,
        ..DeblurSpec::new(KernelKind::motion(5.0), 300, 20)
    };
    let dr = run_deblur(&test_image(64), &dspec)?;
    rep.record(
        "deblur_reblur_consistency",
        (dr.reblur_residual - dr.relres).abs(),
        1e-10,
    );

    Ok(rep)
}
