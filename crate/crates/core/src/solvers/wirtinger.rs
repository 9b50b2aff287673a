use crate::cvec::{self, C64};
use crate::error::{Error, Result};
use crate::linops::MeasurementOperator;
use crate::manifold::{FactorPair, TangentPair};
use crate::objective::{g0, g0_prime, Evaluation, PenaltyParams};

use super::{SolverConfig, SolverReport, StepPolicy, Termination};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WirtingerVariant {
    /// Backtracking from `1 / d` every iteration (NCBT).
    FixedInitStep,
    /// Backtracking from a Barzilai-Borwein step (NCBB).
    BbInitStep,
}

/// `F(h, m) = |y - A(h m^*)|^2 + rho [G0(|h|^2 / 2d) + G0(|m|^2 / 2d)
///            + sum_i G0(L |b_i^* h|^2 / (8 d mu^2))]`
/// on `C^K x C^N`, with its Wirtinger derivative.
#[derive(Debug, Clone)]
pub struct WirtingerObjective<'a> {
    op: &'a MeasurementOperator,
    y: &'a [C64],
    penalty: PenaltyParams,
}

impl<'a> WirtingerObjective<'a> {
    pub fn new(op: &'a MeasurementOperator, y: &'a [C64], penalty: PenaltyParams) -> Result<Self> {
        if y.len() != op.l() {
            return Err(Error::DimensionMismatch {
                what: "y",
                expected: op.l(),
                got: y.len(),
            });
        }
        Ok(Self { op, y, penalty })
    }

    fn coherence_scale(&self) -> f64 {
        let p = self.penalty;
        self.op.l() as f64 / (8.0 * p.d * p.mu * p.mu)
    }

    pub fn evaluate(&self, x: &FactorPair) -> Result<Evaluation> {
        if x.k() != self.op.k() || x.n() != self.op.n() {
            return Err(Error::DimensionMismatch {
                what: "factor pair",
                expected: self.op.k() + self.op.n(),
                got: x.k() + x.n(),
            });
        }
        let forward = self.op.forward_raw(x.h(), x.m());
        let residual = cvec::sub(&forward.values, self.y);
        let data = cvec::norm_sqr(&residual);
        let p = self.penalty;
        let penalty = if p.rho == 0.0 {
            0.0
        } else {
            let s = self.coherence_scale();
            let inc: f64 = forward.bh.iter().map(|b| g0(s * b.norm_sqr())).sum();
            p.rho * (g0(cvec::norm_sqr(x.h()) / (2.0 * p.d)) + g0(cvec::norm_sqr(x.m()) / (2.0 * p.d)) + inc)
        };
        Ok(Evaluation {
            point: x.clone(),
            forward,
            residual,
            data,
            penalty,
        })
    }

    /// `(dF/d conj(h), dF/d conj(m))`; half the real gradient.
    pub fn derivative(&self, ev: &Evaluation) -> TangentPair {
        let x = &ev.point;
        let f = &ev.forward;
        let zh: Vec<C64> = ev.residual.iter().zip(&f.cm).map(|(r, c)| r * c).collect();
        let zm: Vec<C64> = ev.residual.iter().zip(&f.bh).map(|(r, b)| r.conj() * b).collect();
        let mut gh = self.op.b_adjoint_raw(&zh);
        let mut gm = self.op.c_adjoint_raw(&zm);
        let p = self.penalty;
        if p.rho > 0.0 {
            let s = self.coherence_scale();
            let z: Vec<C64> = f.bh.iter().map(|b| b * g0_prime(s * b.norm_sqr())).collect();
            let inc = self.op.b_adjoint_same_pass(&z);
            let wh = p.rho * g0_prime(cvec::norm_sqr(x.h()) / (2.0 * p.d)) / (2.0 * p.d);
            let wm = p.rho * g0_prime(cvec::norm_sqr(x.m()) / (2.0 * p.d)) / (2.0 * p.d);
            for ((g, hi), ii) in gh.iter_mut().zip(x.h()).zip(&inc) {
                *g += hi * wh + ii * (p.rho * s);
            }
            for (g, mi) in gm.iter_mut().zip(x.m()) {
                *g += mi * wm;
            }
        }
        TangentPair::new(gh, gm)
    }
}

/// Gradient descent `x <- x - alpha dF/d conj(x)` with backtracking.
pub fn wirtinger_solve(
    op: &MeasurementOperator,
    y: &[C64],
    x0: &FactorPair,
    penalty: PenaltyParams,
    config: &SolverConfig,
    variant: WirtingerVariant,
) -> Result<SolverReport> {
    config.validate()?;
    let d = penalty.d;
    let obj = WirtingerObjective::new(op, y, penalty)?;
    let start_counts = op.counts();
    let y_norm = cvec::norm(y);
    if y_norm == 0.0 {
        return Err(Error::InvalidParameter("y must be nonzero".into()));
    }
    let bt = config.backtracking;
    let fixed = match config.step {
        StepPolicy::Fixed { alpha } => Some(alpha),
        _ => None,
    };
    let base_step = match config.step {
        StepPolicy::Backtracking { init: Some(a) } => a,
        _ => 1.0 / d,
    };

    let mut ev = obj.evaluate(x0)?;
    let mut report = SolverReport {
        x: x0.clone(),
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
        report.iterates.push(x0.clone());
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
    let mut grad = obj.derivative(&ev);
    let mut gnorm2 = grad.norm_sqr();
    let g_first = gnorm2.sqrt();
    let mut next_alpha = fixed.unwrap_or(base_step);

    for iter in 1..=config.max_iter {
        if gnorm2 == 0.0 {
            return Ok(finish(report, ev, Termination::Stalled));
        }
        let mut alpha = next_alpha;
        let mut accepted = None;
        for _ in 0..bt.max_trials {
            let trial = FactorPair::new(
                cvec::axpy(ev.point.h(), -alpha, &grad.h),
                cvec::axpy(ev.point.m(), -alpha, &grad.m),
            );
            if let Ok(xt) = trial {
                let et = obj.evaluate(&xt)?;
                // the real directional derivative along -grad is -2 |grad|^2
                if et.value().is_finite() && (fixed.is_some() || et.value() <= ev.value() - 2.0 * bt.c * alpha * gnorm2)
                {
                    accepted = Some(et);
                    break;
                }
            }
            alpha *= bt.shrink;
        }
        let Some(et) = accepted else {
            return Ok(finish(report, ev, Termination::Stalled));
        };
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
        let new_grad = obj.derivative(&ev);
        gnorm2 = new_grad.norm_sqr();
        if let Some(tol) = config.grad_ratio_tol {
            if gnorm2.sqrt() <= tol * g_first {
                return Ok(finish(report, ev, Termination::GradientRatio));
            }
        }
        next_alpha = if let Some(a) = fixed {
            a
        } else {
            match variant {
                WirtingerVariant::FixedInitStep => base_step,
                WirtingerVariant::BbInitStep => {
                    let yv = new_grad.sub(&grad);
                    let yy = yv.norm_sqr();
                    let q = -alpha * grad.re_dot(&yv) / yy;
                    if yy <= 1e-30 || !(q > 0.0) || q > 1e6 / d || !q.is_finite() {
                        base_step
                    } else {
                        q
                    }
                }
            }
        };
        grad = new_grad;
    }
    Ok(finish(report, ev, Termination::MaxIterations))
}
