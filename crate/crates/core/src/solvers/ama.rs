use crate::cvec::{self, C64};
use crate::error::{Error, Result};
use crate::linops::MeasurementOperator;
use crate::manifold::FactorPair;

use super::{SolverConfig, SolverReport, Termination};

/// Exact minimizer of `t -> |r - t a|^2`: `Re<a, r> / |a|^2`.
/// Returns `None` when `a = 0`.
fn exact_step(r: &[C64], a: &[C64]) -> Option<f64> {
    let aa = cvec::norm_sqr(a);
    (aa > 0.0).then(|| cvec::re_dot(a, r) / aa)
}

/// Alternating minimization of `F(h, m) = |y - A(h m^*)|^2`: a gradient step
/// on `m` then on `h`, each with the closed-form exact line search
/// `t* = |g|^2 / (2 |A(h g^*)|^2)`. The residual and both transforms are
/// updated linearly, so one iteration costs four transforms.
pub fn ama_solve(op: &MeasurementOperator, y: &[C64], x0: &FactorPair, config: &SolverConfig) -> Result<SolverReport> {
    config.validate()?;
    if x0.k() != op.k() || x0.n() != op.n() || y.len() != op.l() {
        return Err(Error::DimensionMismatch {
            what: "problem",
            expected: op.k() + op.n() + op.l(),
            got: x0.k() + x0.n() + y.len(),
        });
    }
    let y_norm = cvec::norm(y);
    if y_norm == 0.0 {
        return Err(Error::InvalidParameter("y must be nonzero".into()));
    }
    let start_counts = op.counts();
    let (mut h, mut m) = x0.clone().into_parts();
    let fw = op.forward_raw(&h, &m);
    let (mut bh, mut cm) = (fw.bh, fw.cm);
    // residual A(h m^*) - y
    let mut r = cvec::sub(&fw.values, y);

    let mut report = SolverReport {
        x: x0.clone(),
        iterations: 0,
        residuals: vec![cvec::norm(&r) / y_norm],
        costs: vec![cvec::norm_sqr(&r)],
        steps: Vec::new(),
        iterates: Vec::new(),
        count_history: Vec::new(),
        rmse: None,
        counts: Default::default(),
        termination: Termination::MaxIterations,
    };
    if config.record_iterates {
        report.iterates.push(x0.clone());
    }
    let mut why = Termination::MaxIterations;
    if report.residuals[0] <= config.rel_residual_tol {
        why = Termination::ResidualTolerance;
    } else {
        for iter in 1..=config.max_iter {
            // m-block: grad = 2 C^*(conj(r) . Bh), direction a = Bh . conj(C grad)
            let zm: Vec<C64> = r.iter().zip(&bh).map(|(ri, b)| ri.conj() * b * 2.0).collect();
            let g = op.c_adjoint_raw(&zm);
            let cg = op.c_raw(&g);
            let a: Vec<C64> = bh.iter().zip(&cg).map(|(b, c)| b * c.conj()).collect();
            if let Some(t) = exact_step(&r, &a) {
                m = cvec::axpy(&m, -t, &g);
                cm = cvec::axpy(&cm, -t, &cg);
                r = cvec::axpy(&r, -t, &a);
            }
            report.costs.push(cvec::norm_sqr(&r));

            // h-block: grad = 2 B^*(r . Cm), direction a = (B grad) . conj(Cm)
            let zh: Vec<C64> = r.iter().zip(&cm).map(|(ri, c)| ri * c * 2.0).collect();
            let g = op.b_adjoint_raw(&zh);
            let bg = op.b_raw(&g);
            let a: Vec<C64> = bg.iter().zip(&cm).map(|(b, c)| b * c.conj()).collect();
            if let Some(t) = exact_step(&r, &a) {
                h = cvec::axpy(&h, -t, &g);
                bh = cvec::axpy(&bh, -t, &bg);
                r = cvec::axpy(&r, -t, &a);
            }
            report.costs.push(cvec::norm_sqr(&r));

            report.iterations = iter;
            report.residuals.push(cvec::norm(&r) / y_norm);
            report.count_history.push(op.counts() - start_counts);
            if config.record_iterates {
                report.iterates.push(FactorPair::new(h.clone(), m.clone())?);
            }
            if *report.residuals.last().unwrap() <= config.rel_residual_tol {
                why = Termination::ResidualTolerance;
                break;
            }
        }
    }
    report.x = FactorPair::new(h, m)?;
    report.termination = why;
    report.counts = op.counts() - start_counts;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::default_mu;
    use crate::rng;
    use crate::solvers::{rmse, spectral_init, PowerOptions};

    fn random(n: usize, seed: u64) -> Vec<C64> {
        rng::complex_normal_vec(&mut rng::stream(seed), n)
    }

    fn cost(op: &MeasurementOperator, y: &[C64], h: &[C64], m: &[C64]) -> f64 {
        cvec::norm_sqr(&cvec::sub(&op.apply(h, m).unwrap(), y))
    }

    #[test]
    fn ground_truth_terminates_immediately() {
        let op = MeasurementOperator::gaussian(64, 4, 4, 1).unwrap();
        let x = FactorPair::new(random(4, 2), random(4, 3)).unwrap();
        let y = op.apply(x.h(), x.m()).unwrap();
        let r = ama_solve(&op, &y, &x, &SolverConfig::default()).unwrap();
        assert_eq!(r.iterations, 0);
        assert_eq!(r.termination, Termination::ResidualTolerance);
    }

    #[test]
    fn closed_form_step_is_the_exact_minimizer() {
        let op = MeasurementOperator::gaussian(64, 4, 4, 5).unwrap();
        let y = random(64, 6);
        let h = random(4, 7);
        let m = random(4, 8);
        let r = cvec::sub(&op.apply(&h, &m).unwrap(), &y);
        let bh = op.apply_b(&h).unwrap();
        let zm: Vec<C64> = r.iter().zip(&bh).map(|(ri, b)| ri.conj() * b * 2.0).collect();
        let g = op.apply_c_adjoint(&zm).unwrap();
        let a = op.apply(&h, &g).unwrap();
        let t = exact_step(&r, &a).unwrap();
        // the two closed forms coincide
        let alt = cvec::norm_sqr(&g) / (2.0 * cvec::norm_sqr(&a));
        assert!((t - alt).abs() <= 1e-10 * t);
        let f = |s: f64| cost(&op, &y, &h, &cvec::axpy(&m, -s, &g));
        let (f0, ft) = (f(0.0), f(t));
        assert!(ft <= f0);
        assert!(f(1.1 * t) > ft && f(0.9 * t) > ft);
    }

    #[test]
    fn half_steps_are_monotone_and_converge() {
        let (l, k, n) = (256, 8, 8);
        let op = MeasurementOperator::gaussian(l, k, n, 9).unwrap();
        let truth = FactorPair::new(random(k, 10), random(n, 11)).unwrap();
        let y = op.apply(truth.h(), truth.m()).unwrap();
        let init = spectral_init(&op, &y, default_mu(l, k, n), PowerOptions::default(), true).unwrap();
        let r = ama_solve(&op, &y, &init.x0, &SolverConfig::default()).unwrap();
        for w in r.costs.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
        assert_eq!(r.termination, Termination::ResidualTolerance);
        assert!(rmse(&r.x, &truth) < 1e-7);
        let c = r.counts;
        assert_eq!((c.n_bh, c.n_cm), (c.n_fft / 2, c.n_fft / 2));
        assert_eq!(c.n_fft, 4 * r.iterations as u64 + 2);
    }
}
