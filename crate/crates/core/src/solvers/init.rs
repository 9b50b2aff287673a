use crate::cvec::{self, C64};
use crate::error::{Error, Result};
use crate::linops::{leading_singular_triple, MeasurementOperator};
use crate::manifold::{self, FactorPair};

const PROJECT_MAX_ITER: usize = 50;
const PROJECT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            max_iter: 500,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpectralInit {
    /// `(h0, m0)` as produced by the projection step (not rescaled).
    pub x0: FactorPair,
    /// Leading singular value of `A^*(y)`.
    pub d: f64,
    /// The power iteration stopped at `max_iter` and `x0` uses its best iterate.
    pub power_converged: bool,
}

impl SpectralInit {
    pub fn balanced(&self) -> FactorPair {
        manifold::balance(&self.x0)
    }
}

/// `h0 = P(sqrt(d) h~)`, `m0 = sqrt(d) m~`, where `(d, h~, m~)` is the leading
/// singular triple of `A^*(y)` and `P` enforces `sqrt(L) |B z|_inf <= 2 sqrt(d) mu`.
///
/// With `allow_unconverged`, a power iteration that hits its iteration cap
/// still yields the best iterate instead of an error.
pub fn spectral_init(
    op: &MeasurementOperator,
    y: &[C64],
    mu: f64,
    opts: PowerOptions,
    allow_unconverged: bool,
) -> Result<SpectralInit> {
    if !(mu > 0.0) {
        return Err(Error::InvalidParameter("mu must be > 0".into()));
    }
    let (triple, power_converged) = match leading_singular_triple(op, y, opts.tol, opts.max_iter, opts.seed) {
        Ok(t) => (t, true),
        Err(Error::NoConvergence { best, .. }) if allow_unconverged => (*best, false),
        Err(e) => return Err(e),
    };
    let d = triple.value;
    let s = d.sqrt();
    let h = cvec::scale_real(&triple.left, s);
    let m = cvec::scale_real(&triple.right, s);
    let h0 = coherence_project(op, &h, 2.0 * s * mu)?;
    Ok(SpectralInit {
        x0: FactorPair::new(h0, m)?,
        d,
        power_converged,
    })
}

/// Pull `z` into `{z : sqrt(L) |B z|_inf <= bound}`.
///
/// Iterates `z <- z - B^*(B z - clip(B z))`, clipping each entry of `B z`
/// above `bound / sqrt(L)` back to that magnitude with its phase kept, until
/// feasible. The result is compared with the uniformly rescaled candidate and
/// the closer of the two to `z` is returned.
pub fn coherence_project(op: &MeasurementOperator, z: &[C64], bound: f64) -> Result<Vec<C64>> {
    if !(bound > 0.0 && bound.is_finite()) {
        return Err(Error::InvalidParameter(format!("bound must be > 0, got {bound}")));
    }
    if z.len() != op.k() {
        return Err(Error::DimensionMismatch {
            what: "z",
            expected: op.k(),
            got: z.len(),
        });
    }
    let cap = bound / (op.l() as f64).sqrt();
    let bz = op.b_raw(z);
    let peak = cvec::norm_inf(&bz);
    if peak <= cap {
        return Ok(z.to_vec());
    }
    let rescaled = cvec::scale_real(z, cap / peak);

    let mut cur = z.to_vec();
    let mut bcur = bz;
    for _ in 0..PROJECT_MAX_ITER {
        let excess: Vec<C64> = bcur
            .iter()
            .map(|&v| {
                let a = v.norm();
                if a > cap {
                    v * (1.0 - cap / a)
                } else {
                    C64::new(0.0, 0.0)
                }
            })
            .collect();
        let step = op.b_adjoint_raw(&excess);
        cur = cvec::sub(&cur, &step);
        bcur = op.b_raw(&cur);
        if cvec::norm_inf(&bcur) <= cap * (1.0 + PROJECT_TOL) {
            break;
        }
    }
    let peak = cvec::norm_inf(&bcur);
    if peak > cap {
        cvec::scale_in_place(&mut cur, cap / peak);
    }
    let d_clip = cvec::norm(&cvec::sub(&cur, z));
    let d_scale = cvec::norm(&cvec::sub(&rescaled, z));
    Ok(if d_clip <= d_scale { cur } else { rescaled })
}
