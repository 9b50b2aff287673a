use crate::cvec;
use crate::error::{Error, Result};
use crate::manifold::{self, FactorPair, Frame};
use crate::objective::{Evaluation, Objective};

use super::{SolverConfig, SolverReport, StepPolicy, Termination};

/// Bounds applied to a Barzilai-Borwein quotient.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BbFallback {
    /// Returned when the quotient is unusable; the last accepted step.
    pub previous: f64,
    /// Quotients above this are rejected.
    pub max: f64,
}

/// `alpha = g(s, y) / g(y, y)` with `s = -alpha_prev grad_k` and
/// `y = grad_{k+1} - grad_k`, both in intrinsic coordinates, where transport
/// is the identity.
pub fn bb_initial_step(grad_prev: &[f64], grad_curr: &[f64], alpha_prev: f64, fb: BbFallback) -> f64 {
    let mut sy = 0.0;
    let mut yy = 0.0;
    for (a, b) in grad_prev.iter().zip(grad_curr) {
        let yi = b - a;
        sy += -alpha_prev * a * yi;
        yy += yi * yi;
    }
    if yy <= 1e-30 {
        return fb.previous;
    }
    let q = sy / yy;
    if !(q > 0.0) || q > fb.max || !q.is_finite() {
        return fb.previous;
    }
    q
}

/// Riemannian steepest descent on the quotient manifold.
///
/// Each iteration starts from a balanced representative, where the Riemannian
/// gradient is `(grad_h / |m|^2, grad_m / |h|^2)` and the update
/// `x - alpha grad` equals `x - (alpha / d_k) (grad_h, grad_m)`, `d_k = |h| |m|`.
pub fn rsd_solve(obj: &Objective, x0: &FactorPair, d: f64, config: &SolverConfig) -> Result<SolverReport> {
    config.validate()?;
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidParameter(format!("d must be > 0, got {d}")));
    }
    let op = obj.op();
    let start_counts = op.counts();
    let y_norm = cvec::norm(obj.y());
    if y_norm == 0.0 {
        return Err(Error::InvalidParameter("y must be nonzero".into()));
    }
    let bt = config.backtracking;

    let mut ev = obj.evaluate(&manifold::balance(x0))?;
    let mut report = SolverReport {
        x: ev.point.clone(),
        iterations: 0,
        residuals: vec![ev.relative_residual(y_norm)],
        costs: vec![ev.value()],
        steps: Vec::new(),
        iterates: Vec::new(),
        count_history: Vec::new(),
        rmse: None,
        counts: Default::default(),
        termination: Termination::MaxIterations,
    };
    if config.record_iterates {
        report.iterates.push(ev.point.clone());
    }
    let finish = |mut report: SolverReport, ev: Evaluation, why| {
        report.x = ev.point;
        report.termination = why;
        report.counts = op.counts() - start_counts;
        report
    };
    if report.residuals[0] <= config.rel_residual_tol {
        return Ok(finish(report, ev, Termination::ResidualTolerance));
    }

    let mut grad = obj.riemannian_gradient(&ev)?;
    let mut gnorm2 = grad.norm().powi(2);
    let g_first = gnorm2.sqrt();
    let bb = matches!(config.step, StepPolicy::BbBacktracking);
    let mut coords = if bb {
        Frame::new(&ev.point).coords(&ev.point, grad.dir())
    } else {
        Vec::new()
    };
    let mut next_alpha = match config.step {
        StepPolicy::Fixed { alpha } => alpha,
        StepPolicy::Backtracking { init } => init.unwrap_or(1.0 / d),
        StepPolicy::BbBacktracking => 1.0 / d,
    };

    for iter in 1..=config.max_iter {
        if gnorm2 == 0.0 {
            return Ok(finish(report, ev, Termination::Stalled));
        }
        let mut alpha = next_alpha;
        let mut accepted = None;
        for _ in 0..bt.max_trials {
            let g = grad.dir();
            let trial = FactorPair::new(
                cvec::axpy(ev.point.h(), -alpha, &g.h),
                cvec::axpy(ev.point.m(), -alpha, &g.m),
            );
            if let Ok(xt) = trial {
                let et = obj.evaluate(&xt)?;
                let fixed = matches!(config.step, StepPolicy::Fixed { .. });
                if et.value().is_finite() && (fixed || et.value() <= ev.value() - bt.c * alpha * gnorm2) {
                    accepted = Some(et);
                    break;
                }
            }
            alpha *= bt.shrink;
        }
        let Some(mut et) = accepted else {
            return Ok(finish(report, ev, Termination::Stalled));
        };
        let (s, t) = manifold::balance_factors(&et.point);
        et.rescale(s, t);
        ev = et;
        report.iterations = iter;
        report.steps.push(alpha);
        report.residuals.push(ev.relative_residual(y_norm));
        report.costs.push(ev.value());
        report.count_history.push(op.counts() - start_counts);
        if config.record_iterates {
            report.iterates.push(ev.point.clone());
        }
        if *report.residuals.last().unwrap() <= config.rel_residual_tol {
            return Ok(finish(report, ev, Termination::ResidualTolerance));
        }

        grad = obj.riemannian_gradient(&ev)?;
        gnorm2 = grad.norm().powi(2);
        if let Some(tol) = config.grad_ratio_tol {
            if gnorm2.sqrt() <= tol * g_first {
                return Ok(finish(report, ev, Termination::GradientRatio));
            }
        }
        next_alpha = match config.step {
            StepPolicy::Fixed { alpha } => alpha,
            StepPolicy::Backtracking { init } => init.unwrap_or(1.0 / d),
            StepPolicy::BbBacktracking => {
                let c = Frame::new(&ev.point).coords(&ev.point, grad.dir());
                let a = bb_initial_step(
                    &coords,
                    &c,
                    alpha,
                    BbFallback {
                        previous: alpha,
                        max: 1e6 / d,
                    },
                );
                coords = c;
                a
            }
        };
    }
    Ok(finish(report, ev, Termination::MaxIterations))
}
