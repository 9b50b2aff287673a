//! Penalized least-squares cost on the quotient manifold and its derivatives.
//!
//! `f(h, m) = |y - A(h m^*)|^2 + rho sum_i G0(L |b_i^* h|^2 |m|^2 / (8 d^2 mu^2))`

use serde::{Deserialize, Serialize};

use crate::cvec::{self, C64};
use crate::error::{Error, Result};
use crate::linops::{Forward, MeasurementOperator};
use crate::manifold::{FactorPair, HorizontalVector, TangentPair};

const BALANCE_TOL: f64 = 1e-12;

pub fn g0(t: f64) -> f64 {
    let s = (t - 1.0).max(0.0);
    s * s
}

pub fn g0_prime(t: f64) -> f64 {
    2.0 * (t - 1.0).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyParams {
    pub rho: f64,
    pub d: f64,
    pub mu: f64,
}

impl PenaltyParams {
    pub fn new(rho: f64, d: f64, mu: f64) -> Result<Self> {
        if !(rho >= 0.0 && rho.is_finite()) {
            return Err(Error::InvalidParameter(format!("rho must be >= 0, got {rho}")));
        }
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::InvalidParameter(format!("d must be > 0, got {d}")));
        }
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidParameter(format!("mu must be > 0, got {mu}")));
        }
        Ok(Self { rho, d, mu })
    }

    /// Experiment defaults: `rho = d^2 / 100`, `mu = 6 sqrt(L / (K + N)) / ln L`.
    pub fn experiment(d: f64, l: usize, k: usize, n: usize) -> Result<Self> {
        Self::new(d * d / 100.0, d, default_mu(l, k, n))
    }

    /// The regime of the convergence analysis: `rho = d^2 + 2.5 |e|^2`.
    pub fn theory(d: f64, mu: f64, noise_energy: f64) -> Result<Self> {
        Self::new(d * d + 2.5 * noise_energy, d, mu)
    }

    /// No penalty: the plain data-fit cost.
    pub fn disabled(d: f64) -> Self {
        Self { rho: 0.0, d, mu: 1.0 }
    }

    /// Weight in `t_i = scale * |b_i^* h|^2 |m|^2`.
    fn arg_scale(&self, l: usize) -> f64 {
        l as f64 / (8.0 * self.d * self.d * self.mu * self.mu)
    }
}

pub fn default_mu(l: usize, k: usize, n: usize) -> f64 {
    6.0 * (l as f64 / (k + n) as f64).sqrt() / (l as f64).ln()
}

/// Cached state of one cost evaluation.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub point: FactorPair,
    pub forward: Forward,
    /// `A(h m^*) - y`
    pub residual: Vec<C64>,
    pub data: f64,
    pub penalty: f64,
}

impl Evaluation {
    pub fn value(&self) -> f64 {
        self.data + self.penalty
    }

    /// Relative residual `|y - A(h m^*)| / |y|`.
    pub fn relative_residual(&self, y_norm: f64) -> f64 {
        cvec::norm(&self.residual) / y_norm
    }

    /// Move to `(s h, t m)` with `s t = 1`; the measurements are unchanged
    /// and only the cached factor transforms are rescaled.
    pub fn rescale(&mut self, s: f64, t: f64) {
        let (h, m) = std::mem::replace(&mut self.point, FactorPair::new_unchecked(Vec::new(), Vec::new())).into_parts();
        self.point = FactorPair::new_unchecked(cvec::scale_real(&h, s), cvec::scale_real(&m, t));
        cvec::scale_in_place(&mut self.forward.bh, s);
        cvec::scale_in_place(&mut self.forward.cm, t);
    }
}

#[derive(Debug, Clone)]
pub struct Objective<'a> {
    op: &'a MeasurementOperator,
    y: &'a [C64],
    penalty: PenaltyParams,
}

impl<'a> Objective<'a> {
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

    pub fn op(&self) -> &'a MeasurementOperator {
        self.op
    }

    pub fn y(&self) -> &'a [C64] {
        self.y
    }

    pub fn penalty(&self) -> PenaltyParams {
        self.penalty
    }

    fn check_point(&self, x: &FactorPair) -> Result<()> {
        if x.k() != self.op.k() {
            return Err(Error::DimensionMismatch {
                what: "h",
                expected: self.op.k(),
                got: x.k(),
            });
        }
        if x.n() != self.op.n() {
            return Err(Error::DimensionMismatch {
                what: "m",
                expected: self.op.n(),
                got: x.n(),
            });
        }
        Ok(())
    }

    fn penalty_from_bh(&self, bh: &[C64], m_norm_sqr: f64) -> f64 {
        if self.penalty.rho == 0.0 {
            return 0.0;
        }
        let s = self.penalty.arg_scale(self.op.l()) * m_norm_sqr;
        self.penalty.rho * bh.iter().map(|b| g0(s * b.norm_sqr())).sum::<f64>()
    }

    /// Two transforms: `B h` and `C m`.
    pub fn evaluate(&self, x: &FactorPair) -> Result<Evaluation> {
        self.check_point(x)?;
        let forward = self.op.forward_raw(x.h(), x.m());
        let residual = cvec::sub(&forward.values, self.y);
        let data = cvec::norm_sqr(&residual);
        let penalty = self.penalty_from_bh(&forward.bh, cvec::norm_sqr(x.m()));
        Ok(Evaluation {
            point: x.clone(),
            forward,
            residual,
            data,
            penalty,
        })
    }

    pub fn cost(&self, x: &FactorPair) -> Result<f64> {
        Ok(self.evaluate(x)?.value())
    }

    pub fn penalty_value(&self, x: &FactorPair) -> Result<f64> {
        Ok(self.evaluate(x)?.penalty)
    }

    /// Euclidean gradient at the evaluated point. Three transforms:
    /// `B^*` and `C^*` of the data term and `B^*` of the penalty weights.
    pub fn euclidean_gradient(&self, ev: &Evaluation) -> TangentPair {
        let x = &ev.point;
        let f = &ev.forward;
        let r = &ev.residual;
        let zh: Vec<C64> = r.iter().zip(&f.cm).map(|(ri, ci)| ri * ci * 2.0).collect();
        let zm: Vec<C64> = r.iter().zip(&f.bh).map(|(ri, bi)| ri.conj() * bi * 2.0).collect();
        let mut gh = self.op.b_adjoint_raw(&zh);
        let mut gm = self.op.c_adjoint_raw(&zm);

        let p = self.penalty;
        let m2 = cvec::norm_sqr(x.m());
        let s = p.arg_scale(self.op.l()) * m2;
        let coef = self.op.l() as f64 * p.rho / (4.0 * p.d * p.d * p.mu * p.mu);
        let w: Vec<f64> = f.bh.iter().map(|b| coef * g0_prime(s * b.norm_sqr())).collect();
        if p.rho > 0.0 {
            let z: Vec<C64> = f.bh.iter().zip(&w).map(|(b, wi)| b * *wi).collect();
            let ph = self.op.b_adjoint_same_pass(&z);
            for (g, v) in gh.iter_mut().zip(&ph) {
                *g += v * m2;
            }
            let mw: f64 = f.bh.iter().zip(&w).map(|(b, wi)| wi * b.norm_sqr()).sum();
            for (g, mi) in gm.iter_mut().zip(x.m()) {
                *g += mi * mw;
            }
        }
        TangentPair::new(gh, gm)
    }

    /// Riemannian gradient `(grad_h / |m|^2, grad_m / |h|^2)` at a balanced point.
    pub fn riemannian_gradient(&self, ev: &Evaluation) -> Result<HorizontalVector> {
        let x = &ev.point;
        let (hn, mn) = (x.h_norm(), x.m_norm());
        if (hn - mn).abs() > BALANCE_TOL * hn.max(mn) {
            return Err(Error::NotBalanced { h_norm: hn, m_norm: mn });
        }
        let e = self.euclidean_gradient(ev);
        Ok(HorizontalVector::new_unchecked(x.clone(), scale_blocks(&e, x)))
    }

    /// `d^2/dt^2 f(h + t eta_h, m + t eta_m)` at `t = 0` for the data term:
    /// `2 |A(eta_h m^* + h eta_m^*)|^2 + 4 Re <A(h m^*) - y, A(eta_h eta_m^*)>`.
    pub fn hessian_quadratic_form(&self, ev: &Evaluation, eta: &TangentPair) -> Result<f64> {
        let x = &ev.point;
        if eta.h.len() != x.k() || eta.m.len() != x.n() {
            return Err(Error::DimensionMismatch {
                what: "tangent",
                expected: x.k() + x.n(),
                got: eta.h.len() + eta.m.len(),
            });
        }
        let be = self.op.b_raw(&eta.h);
        let ce = self.op.c_raw(&eta.m);
        let f = &ev.forward;
        let mut first = 0.0;
        let mut second = 0.0;
        for i in 0..self.op.l() {
            let a1 = be[i] * f.cm[i].conj() + f.bh[i] * ce[i].conj();
            let a2 = be[i] * ce[i].conj();
            first += a1.norm_sqr();
            second += (ev.residual[i].conj() * a2).re;
        }
        Ok(2.0 * first + 4.0 * second)
    }
}

/// `(v_h / |m|^2, v_m / |h|^2)`
pub(crate) fn scale_blocks(v: &TangentPair, x: &FactorPair) -> TangentPair {
    TangentPair::new(
        cvec::scale_real(&v.h, 1.0 / cvec::norm_sqr(x.m())),
        cvec::scale_real(&v.m, 1.0 / cvec::norm_sqr(x.h())),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::{dense_b, dense_c};
    use crate::manifold::{self, horizontal_project, metric};
    use crate::rng;

    fn random(n: usize, seed: u64) -> Vec<C64> {
        rng::complex_normal_vec(&mut rng::stream(seed), n)
    }

    fn random_pair(k: usize, n: usize, seed: u64) -> FactorPair {
        FactorPair::new(random(k, seed), random(n, seed + 1000)).unwrap()
    }

    fn along(x: &FactorPair, v: &TangentPair, t: f64) -> FactorPair {
        FactorPair::new(cvec::axpy(x.h(), t, &v.h), cvec::axpy(x.m(), t, &v.m)).unwrap()
    }

    fn fd(obj: &Objective, x: &FactorPair, v: &TangentPair, step: f64) -> f64 {
        let fp = obj.cost(&along(x, v, step)).unwrap();
        let fm = obj.cost(&along(x, v, -step)).unwrap();
        (fp - fm) / (2.0 * step)
    }

    /// Direct summation of the cost from dense `B` and `C`.
    fn dense_cost(op: &MeasurementOperator, y: &[C64], p: PenaltyParams, x: &FactorPair) -> f64 {
        let b = dense_b(op);
        let c = dense_c(op);
        let l = op.l();
        let mut data = 0.0;
        let mut pen = 0.0;
        let m2 = cvec::norm_sqr(x.m());
        for (i, &yi) in y.iter().enumerate().take(l) {
            let mut bh = C64::new(0.0, 0.0);
            for j in 0..op.k() {
                bh += b.get(i, j) * x.h()[j];
            }
            let mut cm = C64::new(0.0, 0.0);
            for j in 0..op.n() {
                cm += c.get(i, j) * x.m()[j];
            }
            data += (bh * cm.conj() - yi).norm_sqr();
            let t = l as f64 * bh.norm_sqr() * m2 / (8.0 * p.d * p.d * p.mu * p.mu);
            pen += g0(t);
        }
        data + p.rho * pen
    }

    #[test]
    fn g0_values() {
        assert_eq!((g0(0.5), g0_prime(0.5)), (0.0, 0.0));
        assert_eq!((g0(2.0), g0_prime(2.0)), (1.0, 2.0));
        assert_eq!((g0(1.0), g0_prime(1.0)), (0.0, 0.0));
        let e = 1e-6;
        assert!(((g0(1.0 + e) - g0(1.0)) / e).abs() < 1e-5);
        assert!(((g0(1.0) - g0(1.0 - e)) / e).abs() < 1e-5);
    }

    #[test]
    fn params_validate() {
        assert!(PenaltyParams::new(-1.0, 1.0, 1.0).is_err());
        assert!(PenaltyParams::new(0.0, 0.0, 1.0).is_err());
        assert!(PenaltyParams::new(0.0, 1.0, 0.0).is_err());
        let p = PenaltyParams::experiment(2.0, 600, 100, 100).unwrap();
        assert!((p.rho - 0.04).abs() < 1e-15);
        assert!((p.mu - 6.0 * 3f64.sqrt() / 600f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn cost_matches_dense_oracle() {
        let op = MeasurementOperator::gaussian(8, 3, 2, 5).unwrap();
        let y = random(8, 6);
        let p = PenaltyParams::new(0.7, 0.3, 0.4).unwrap();
        let obj = Objective::new(&op, &y, p).unwrap();
        for seed in 0..5 {
            let x = random_pair(3, 2, 10 + seed);
            let got = obj.evaluate(&x).unwrap();
            assert!(got.penalty > 0.0);
            let want = dense_cost(&op, &y, p, &x);
            assert!((got.value() - want).abs() <= 1e-12 * want);
        }
    }

    #[test]
    fn cost_vanishes_at_truth_and_tends_to_y_norm() {
        let op = MeasurementOperator::gaussian(64, 4, 4, 1).unwrap();
        let truth = random_pair(4, 4, 2);
        let y = op.apply(truth.h(), truth.m()).unwrap();
        let d = truth.h_norm() * truth.m_norm();
        let p = PenaltyParams::experiment(d, 64, 4, 4).unwrap();
        let obj = Objective::new(&op, &y, p).unwrap();
        let ev = obj.evaluate(&truth).unwrap();
        assert_eq!(ev.penalty, 0.0);
        assert!(ev.value() <= 1e-20 * d * d);

        let tiny = FactorPair::new(cvec::scale_real(truth.h(), 1e-12), truth.m().to_vec()).unwrap();
        let c = obj.cost(&tiny).unwrap();
        assert!((c - cvec::norm_sqr(&y)).abs() <= 1e-9 * cvec::norm_sqr(&y));
    }

    #[test]
    fn cost_and_penalty_are_quotient_invariant() {
        let op = MeasurementOperator::gaussian(32, 4, 3, 3).unwrap();
        let y = random(32, 4);
        let p = PenaltyParams::new(1.0, 0.2, 0.3).unwrap();
        let obj = Objective::new(&op, &y, p).unwrap();
        let x = random_pair(4, 3, 5);
        let ev = obj.evaluate(&x).unwrap();
        assert!(ev.penalty > 0.0);
        for pc in [C64::new(2.0, 0.0), C64::new(0.3, -1.7)] {
            let ey = obj.evaluate(&x.act(pc)).unwrap();
            assert!((ey.value() - ev.value()).abs() <= 1e-10 * ev.value());
            assert!((ey.penalty - ev.penalty).abs() <= 1e-12 * ev.penalty.max(1.0));
        }
    }

    #[test]
    fn gradient_is_zero_at_noiseless_truth() {
        let op = MeasurementOperator::gaussian(128, 6, 5, 7).unwrap();
        let truth = random_pair(6, 5, 8);
        let y = op.apply(truth.h(), truth.m()).unwrap();
        let d = truth.h_norm() * truth.m_norm();
        let obj = Objective::new(&op, &y, PenaltyParams::experiment(d, 128, 6, 5).unwrap()).unwrap();
        let g = obj.euclidean_gradient(&obj.evaluate(&truth).unwrap());
        assert!(g.norm_sqr().sqrt() <= 1e-10 * d);
    }

    #[test]
    fn gradient_matches_finite_differences_without_penalty() {
        let op = MeasurementOperator::gaussian(40, 5, 4, 11).unwrap();
        let y = random(40, 12);
        let obj = Objective::new(&op, &y, PenaltyParams::disabled(1.0)).unwrap();
        for seed in 0..5 {
            let x = random_pair(5, 4, 20 + seed);
            let g = obj.euclidean_gradient(&obj.evaluate(&x).unwrap());
            for j in 0..4 {
                let v = TangentPair::new(random(5, 100 + j), random(4, 200 + j));
                let want = fd(&obj, &x, &v, 1e-6);
                let got = g.re_dot(&v);
                assert!((got - want).abs() <= 1e-6 * want.abs().max(1.0), "{got} {want}");
            }
        }
    }

    #[test]
    fn penalty_gradient_matches_finite_differences() {
        let op = MeasurementOperator::gaussian(32, 4, 3, 13).unwrap();
        // highly coherent h: energy concentrated in one Fourier coefficient
        let mut h = vec![C64::new(0.0, 0.0); 4];
        h[0] = C64::new(3.0, 1.0);
        h[1] = C64::new(0.1, 0.0);
        let x = FactorPair::new(h, random(3, 14)).unwrap();
        let y = op.apply(x.h(), x.m()).unwrap();
        let p = PenaltyParams::new(2.0, 0.5, 0.3).unwrap();
        let obj = Objective::new(&op, &y, p).unwrap();
        let ev = obj.evaluate(&x).unwrap();
        assert!(ev.penalty > 0.0 && ev.data == 0.0);
        let g = obj.euclidean_gradient(&ev);
        for j in 0..6 {
            let v = TangentPair::new(random(4, 300 + j), random(3, 400 + j));
            let want = fd(&obj, &x, &v, 1e-6);
            let got = g.re_dot(&v);
            assert!((got - want).abs() <= 1e-5 * want.abs().max(1.0), "{got} {want}");
        }
    }

    #[test]
    fn riemannian_gradient_properties() {
        let op = MeasurementOperator::gaussian(48, 5, 4, 17).unwrap();
        let y = random(48, 18);
        let p = PenaltyParams::new(0.5, 0.4, 0.3).unwrap();
        let obj = Objective::new(&op, &y, p).unwrap();
        for seed in 0..4 {
            let x = manifold::balance(&random_pair(5, 4, 30 + seed));
            let ev = obj.evaluate(&x).unwrap();
            let grad = obj.riemannian_gradient(&ev).unwrap();
            assert!(HorizontalVector::new(x.clone(), grad.dir().clone()).is_ok());

            let e = obj.euclidean_gradient(&ev);
            let gg = grad.norm().powi(2);
            let want = e.norm_sqr() / (x.h_norm() * x.m_norm());
            assert!((gg - want).abs() <= 1e-10 * want);

            for j in 0..6 {
                let eta = horizontal_project(&x, &TangentPair::new(random(5, 500 + j), random(4, 600 + j))).unwrap();
                let got = metric(&x, grad.dir(), eta.dir());
                let want = fd(&obj, &x, eta.dir(), 1e-6);
                assert!((got - want).abs() <= 1e-5 * (1.0 + got.abs()), "{got} {want}");
            }
        }
        let unbalanced = FactorPair::new(random(5, 1), cvec::scale_real(&random(4, 2), 10.0)).unwrap();
        let ev = obj.evaluate(&unbalanced).unwrap();
        assert!(matches!(obj.riemannian_gradient(&ev), Err(Error::NotBalanced { .. })));
    }

    #[test]
    fn gradient_norm_is_quotient_invariant() {
        let op = MeasurementOperator::gaussian(32, 3, 3, 19).unwrap();
        let y = random(32, 20);
        let obj = Objective::new(&op, &y, PenaltyParams::new(1.0, 0.3, 0.3).unwrap()).unwrap();
        let x = random_pair(3, 3, 21);
        let norm_at = |x: &FactorPair| {
            let ev = obj.evaluate(x).unwrap();
            let e = obj.euclidean_gradient(&ev);
            let g = horizontal_project(x, &scale_blocks(&e, x)).unwrap();
            g.norm()
        };
        let n0 = norm_at(&x);
        let n1 = norm_at(&x.act(C64::new(-0.4, 1.3)));
        assert!((n0 - n1).abs() <= 1e-10 * n0);
    }

    #[test]
    fn hessian_form_matches_second_differences() {
        let op = MeasurementOperator::gaussian(40, 4, 4, 23).unwrap();
        let y = random(40, 24);
        let obj = Objective::new(&op, &y, PenaltyParams::disabled(1.0)).unwrap();
        let x = random_pair(4, 4, 25);
        let ev = obj.evaluate(&x).unwrap();
        let eta = horizontal_project(&x, &TangentPair::new(random(4, 26), random(4, 27))).unwrap();
        let q = obj.hessian_quadratic_form(&ev, eta.dir()).unwrap();
        let f0 = ev.value();
        let sd = |t: f64| {
            let fp = obj.cost(&along(&x, eta.dir(), t)).unwrap();
            let fm = obj.cost(&along(&x, eta.dir(), -t)).unwrap();
            (fp - 2.0 * f0 + fm) / (t * t)
        };
        let (a, b) = (sd(1e-3), sd(1e-4));
        // the quartic term makes the error O(t^2); Richardson removes it
        let rich = (4.0 * sd(5e-4) - sd(1e-3)) / 3.0;
        assert!((rich - q).abs() <= 1e-4 * q.abs());
        assert!((b - q).abs() <= 1e-4 * q.abs(), "{a} {b} {q}");

        let zero = TangentPair::zeros(4, 4);
        assert_eq!(obj.hessian_quadratic_form(&ev, &zero).unwrap(), 0.0);
        let q2 = obj.hessian_quadratic_form(&ev, &eta.dir().scaled(3.0)).unwrap();
        assert!((q2 - 9.0 * q).abs() <= 1e-10 * q.abs());
    }

    #[test]
    fn hessian_form_at_truth_is_nonnegative() {
        let op = MeasurementOperator::gaussian(64, 4, 4, 29).unwrap();
        let truth = random_pair(4, 4, 30);
        let y = op.apply(truth.h(), truth.m()).unwrap();
        let obj = Objective::new(&op, &y, PenaltyParams::disabled(1.0)).unwrap();
        let ev = obj.evaluate(&truth).unwrap();
        for j in 0..10 {
            let eta = TangentPair::new(random(4, 700 + j), random(4, 800 + j));
            assert!(obj.hessian_quadratic_form(&ev, &eta).unwrap() >= 0.0);
        }
    }

    #[test]
    fn evaluation_and_gradient_counts() {
        let op = MeasurementOperator::gaussian(16, 3, 3, 31).unwrap();
        let y = random(16, 32);
        let obj = Objective::new(&op, &y, PenaltyParams::new(1.0, 1.0, 1.0).unwrap()).unwrap();
        let x = random_pair(3, 3, 33);
        op.reset_counts();
        let ev = obj.evaluate(&x).unwrap();
        let c = op.counts();
        assert_eq!((c.n_bh, c.n_cm, c.n_fft), (1, 1, 2));
        obj.euclidean_gradient(&ev);
        let c = op.counts();
        assert_eq!((c.n_bh, c.n_cm, c.n_fft), (2, 2, 5));
    }

    #[test]
    fn rescaled_evaluation_matches_fresh_one() {
        let op = MeasurementOperator::gaussian(16, 3, 3, 34).unwrap();
        let y = random(16, 35);
        let obj = Objective::new(&op, &y, PenaltyParams::new(1.0, 0.2, 0.3).unwrap()).unwrap();
        let x = FactorPair::new(cvec::scale_real(&random(3, 36), 5.0), random(3, 37)).unwrap();
        let mut ev = obj.evaluate(&x).unwrap();
        let (s, t) = manifold::balance_factors(&x);
        ev.rescale(s, t);
        let fresh = obj.evaluate(&manifold::balance(&x)).unwrap();
        for (a, b) in ev.forward.bh.iter().zip(&fresh.forward.bh) {
            assert!((a - b).norm() < 1e-12 * (1.0 + b.norm()));
        }
        assert!((ev.value() - fresh.value()).abs() < 1e-10 * fresh.value());
    }
}
