//! Geometry of the rank-one quotient manifold `C*^K x C*^N / C*`.
//!
//! A point is represented by any `(h, m)` in its orbit
//! `{(h p^{-1}, m p^*) : p in C*}`. Tangent vectors are stored extrinsically as
//! pairs of complex vectors; the horizontal space is the metric complement of
//! the vertical (in-orbit) directions `(-h λ, m conj(λ))`.
//!
//! The metric is `g((a_h, a_m), (b_h, b_m)) = Re(a_h^* b_h) |m|^2 + Re(a_m^* b_m) |h|^2`.

use crate::cvec::{self, C64, ZERO};
use crate::dense::CMatrix;
use crate::error::{Error, Result};

const HORIZONTAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct FactorPair {
    h: Vec<C64>,
    m: Vec<C64>,
}

impl FactorPair {
    pub fn new(h: Vec<C64>, m: Vec<C64>) -> Result<Self> {
        if !cvec::all_finite(&h) || !cvec::all_finite(&m) {
            return Err(Error::NonFinite("factor pair"));
        }
        if h.is_empty() || cvec::norm_sqr(&h) == 0.0 {
            return Err(Error::LeftManifold("h"));
        }
        if m.is_empty() || cvec::norm_sqr(&m) == 0.0 {
            return Err(Error::LeftManifold("m"));
        }
        Ok(Self { h, m })
    }

    pub(crate) fn new_unchecked(h: Vec<C64>, m: Vec<C64>) -> Self {
        Self { h, m }
    }

    pub fn h(&self) -> &[C64] {
        &self.h
    }

    pub fn m(&self) -> &[C64] {
        &self.m
    }

    pub fn k(&self) -> usize {
        self.h.len()
    }

    pub fn n(&self) -> usize {
        self.m.len()
    }

    pub fn h_norm(&self) -> f64 {
        cvec::norm(&self.h)
    }

    pub fn m_norm(&self) -> f64 {
        cvec::norm(&self.m)
    }

    /// Group action `(h p^{-1}, m p^*)`.
    pub fn act(&self, p: C64) -> FactorPair {
        let inv = p.inv();
        let pc = p.conj();
        Self {
            h: cvec::scale(&self.h, inv),
            m: cvec::scale(&self.m, pc),
        }
    }

    /// The rank-one matrix `h m^*`.
    pub fn product(&self) -> CMatrix {
        CMatrix::outer(&self.h, &self.m)
    }

    pub fn into_parts(self) -> (Vec<C64>, Vec<C64>) {
        (self.h, self.m)
    }

    pub fn is_balanced(&self, rel_tol: f64) -> bool {
        let (a, b) = (self.h_norm(), self.m_norm());
        (a - b).abs() <= rel_tol * a.max(b)
    }
}

/// A tangent vector of the total space `C^K x C^N`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentPair {
    pub h: Vec<C64>,
    pub m: Vec<C64>,
}

impl TangentPair {
    pub fn new(h: Vec<C64>, m: Vec<C64>) -> Self {
        Self { h, m }
    }

    pub fn zeros(k: usize, n: usize) -> Self {
        Self {
            h: vec![ZERO; k],
            m: vec![ZERO; n],
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            h: cvec::scale_real(&self.h, s),
            m: cvec::scale_real(&self.m, s),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            h: cvec::add(&self.h, &other.h),
            m: cvec::add(&self.m, &other.m),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            h: cvec::sub(&self.h, &other.h),
            m: cvec::sub(&self.m, &other.m),
        }
    }

    /// Euclidean `Re <self, other>` on `C^K x C^N`.
    pub fn re_dot(&self, other: &Self) -> f64 {
        cvec::re_dot(&self.h, &other.h) + cvec::re_dot(&self.m, &other.m)
    }

    pub fn norm_sqr(&self) -> f64 {
        cvec::norm_sqr(&self.h) + cvec::norm_sqr(&self.m)
    }

    /// Transform componentwise as a lift: `(v_h p^{-1}, v_m p^*)`.
    pub fn act(&self, p: C64) -> Self {
        Self {
            h: cvec::scale(&self.h, p.inv()),
            m: cvec::scale(&self.m, p.conj()),
        }
    }
}

/// A horizontal tangent vector together with the point it is anchored at.
#[derive(Debug, Clone, PartialEq)]
pub struct HorizontalVector {
    base: FactorPair,
    dir: TangentPair,
}

impl HorizontalVector {
    /// Wrap `dir` after checking it is horizontal at `base`.
    pub fn new(base: FactorPair, dir: TangentPair) -> Result<Self> {
        check_dims(&base, &dir)?;
        let lam = vertical_coefficient(&base, &dir);
        let scale = (cvec::norm_sqr(&dir.h) / cvec::norm_sqr(&base.h)
            + cvec::norm_sqr(&dir.m) / cvec::norm_sqr(&base.m))
        .sqrt();
        if lam.norm() > HORIZONTAL_TOL * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::InvalidParameter(format!(
                "vector is not horizontal (vertical coefficient {:e})",
                lam.norm()
            )));
        }
        Ok(Self { base, dir })
    }

    pub(crate) fn new_unchecked(base: FactorPair, dir: TangentPair) -> Self {
        Self { base, dir }
    }

    pub fn zero(base: FactorPair) -> Self {
        let dir = TangentPair::zeros(base.k(), base.n());
        Self { base, dir }
    }

    pub fn base(&self) -> &FactorPair {
        &self.base
    }

    pub fn dir(&self) -> &TangentPair {
        &self.dir
    }

    pub fn into_dir(self) -> TangentPair {
        self.dir
    }

    /// Metric between two vectors anchored at the same point.
    pub fn inner(&self, other: &HorizontalVector) -> Result<f64> {
        if self.base != other.base {
            return Err(Error::BaseMismatch);
        }
        Ok(metric(&self.base, &self.dir, &other.dir))
    }

    pub fn norm(&self) -> f64 {
        metric(&self.base, &self.dir, &self.dir).sqrt()
    }
}

fn check_dims(x: &FactorPair, v: &TangentPair) -> Result<()> {
    if v.h.len() != x.k() {
        return Err(Error::DimensionMismatch {
            what: "tangent h-part",
            expected: x.k(),
            got: v.h.len(),
        });
    }
    if v.m.len() != x.n() {
        return Err(Error::DimensionMismatch {
            what: "tangent m-part",
            expected: x.n(),
            got: v.m.len(),
        });
    }
    Ok(())
}

pub fn metric(x: &FactorPair, eta: &TangentPair, xi: &TangentPair) -> f64 {
    cvec::re_dot(&eta.h, &xi.h) * cvec::norm_sqr(&x.m) + cvec::re_dot(&eta.m, &xi.m) * cvec::norm_sqr(&x.h)
}

/// `Λ = (conj(m^* v_m) / |m|^2 - h^* v_h / |h|^2) / 2`.
fn vertical_coefficient(x: &FactorPair, v: &TangentPair) -> C64 {
    let a = cvec::dot(&x.m, &v.m).conj() / cvec::norm_sqr(&x.m);
    let b = cvec::dot(&x.h, &v.h) / cvec::norm_sqr(&x.h);
    (a - b) * 0.5
}

/// Orthogonal projection onto the vertical space: `(-h Λ, m conj(Λ))`.
pub fn vertical_project(x: &FactorPair, v: &TangentPair) -> TangentPair {
    let lam = vertical_coefficient(x, v);
    TangentPair {
        h: cvec::scale(&x.h, -lam),
        m: cvec::scale(&x.m, lam.conj()),
    }
}

/// Orthogonal projection onto the horizontal space, `v - P^v v`.
pub fn horizontal_project(x: &FactorPair, v: &TangentPair) -> Result<HorizontalVector> {
    check_dims(x, v)?;
    let dir = v.sub(&vertical_project(x, v));
    Ok(HorizontalVector { base: x.clone(), dir })
}

/// `(h + η_h, m + η_m)`.
pub fn retract(x: &FactorPair, eta: &TangentPair) -> Result<FactorPair> {
    check_dims(x, eta)?;
    FactorPair::new(cvec::add(&x.h, &eta.h), cvec::add(&x.m, &eta.m))
}

/// Rescale so that `|h| = |m| = sqrt(|h| |m|)`; the orbit is unchanged.
pub fn balance(x: &FactorPair) -> FactorPair {
    let (s, t) = balance_factors(x);
    FactorPair {
        h: cvec::scale_real(&x.h, s),
        m: cvec::scale_real(&x.m, t),
    }
}

/// Real factors `(s, t)` with `s t = 1` such that `(s h, t m)` is balanced.
pub fn balance_factors(x: &FactorPair) -> (f64, f64) {
    let (hn, mn) = (x.h_norm(), x.m_norm());
    let s = (mn / hn).sqrt();
    (s, 1.0 / s)
}

/// The orthogonal complement of `span(v)` through the last `n - 1` columns of
/// the Householder reflector `I - 2 w w^* / |w|^2`, `w = v - |v| e^{i arg v_1} e_1`.
#[derive(Debug, Clone)]
struct Complement {
    w: Vec<C64>,
    w_norm_sqr: f64,
}

impl Complement {
    fn new(v: &[C64]) -> Self {
        let vn = cvec::norm(v);
        let phase = if v[0] == ZERO {
            C64::new(1.0, 0.0)
        } else {
            v[0] / v[0].norm()
        };
        let mut w = v.to_vec();
        w[0] -= phase * vn;
        let w_norm_sqr = cvec::norm_sqr(&w);
        // Degenerate reflector: v is already a multiple of e_1 and the
        // complement is e_2, ..., e_n.
        if w_norm_sqr <= 1e-16 * vn * vn {
            return Self {
                w: Vec::new(),
                w_norm_sqr: 0.0,
            };
        }
        Self { w, w_norm_sqr }
    }

    /// `Q x`, with `Q` Hermitian and unitary.
    fn reflect(&self, x: &mut [C64]) {
        if self.w.is_empty() {
            return;
        }
        let coef = cvec::dot(&self.w, x) * (2.0 / self.w_norm_sqr);
        for (xi, wi) in x.iter_mut().zip(&self.w) {
            *xi -= wi * coef;
        }
    }

    /// `V_perp^* x` (length `n - 1`).
    fn coords(&self, x: &[C64]) -> Vec<C64> {
        let mut y = x.to_vec();
        self.reflect(&mut y);
        y.remove(0);
        y
    }

    /// `V_perp c` (length `n`).
    fn expand(&self, c: &[C64]) -> Vec<C64> {
        let mut y = Vec::with_capacity(c.len() + 1);
        y.push(ZERO);
        y.extend_from_slice(c);
        self.reflect(&mut y);
        y
    }
}

/// Coordinates of a horizontal vector in the orthonormal basis of
/// [`build_basis`]. Length `2(K + N) - 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntrinsicCoords {
    pub base: FactorPair,
    pub coords: Vec<f64>,
}

/// Reusable basis data at one point. Building it is O(K + N).
#[derive(Debug, Clone)]
pub struct Frame {
    h_perp: Complement,
    m_perp: Complement,
    h_norm: f64,
    m_norm: f64,
    k: usize,
    n: usize,
}

impl Frame {
    pub fn new(x: &FactorPair) -> Self {
        Self {
            h_perp: Complement::new(&x.h),
            m_perp: Complement::new(&x.m),
            h_norm: x.h_norm(),
            m_norm: x.m_norm(),
            k: x.k(),
            n: x.n(),
        }
    }

    pub fn dim(&self) -> usize {
        2 * (self.k + self.n) - 2
    }

    /// Coordinates of the horizontal part of `v` at `x`.
    pub fn coords(&self, x: &FactorPair, v: &TangentPair) -> Vec<f64> {
        let (hn, mn) = (self.h_norm, self.m_norm);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let hv = cvec::dot(&x.h, &v.h);
        let mv = cvec::dot(&x.m, &v.m);
        let mut out = Vec::with_capacity(self.dim());
        out.push(s * (hv.re * mn / hn + mv.re * hn / mn));
        out.push(s * (hv.im * mn / hn - mv.im * hn / mn));
        let hp = self.h_perp.coords(&v.h);
        out.extend(hp.iter().map(|c| c.re * mn));
        out.extend(hp.iter().map(|c| c.im * mn));
        let mp = self.m_perp.coords(&v.m);
        out.extend(mp.iter().map(|c| c.re * hn));
        out.extend(mp.iter().map(|c| c.im * hn));
        out
    }

    /// Horizontal vector at `x` with the given coordinates.
    pub fn vector(&self, x: &FactorPair, c: &[f64]) -> TangentPair {
        let (k, n) = (self.k, self.n);
        assert_eq!(c.len(), self.dim());
        let (hn, mn) = (self.h_norm, self.m_norm);
        let s = std::f64::consts::FRAC_1_SQRT_2 / (hn * mn);
        let along_h = C64::new(c[0], c[1]) * s;
        let along_m = C64::new(c[0], -c[1]) * s;
        let hp: Vec<C64> = (0..k - 1)
            .map(|i| C64::new(c[2 + i], c[2 + (k - 1) + i]) / mn)
            .collect();
        let off = 2 + 2 * (k - 1);
        let mp: Vec<C64> = (0..n - 1)
            .map(|i| C64::new(c[off + i], c[off + (n - 1) + i]) / hn)
            .collect();
        let mut h = self.h_perp.expand(&hp);
        for (o, xi) in h.iter_mut().zip(&x.h) {
            *o += xi * along_h;
        }
        let mut m = self.m_perp.expand(&mp);
        for (o, xi) in m.iter_mut().zip(&x.m) {
            *o += xi * along_m;
        }
        TangentPair { h, m }
    }
}

/// Ordered orthonormal basis of the horizontal space at `x`:
/// the two `(h, m)`-direction vectors, then `(h_perp e_i / |m|, 0)` and their
/// `i`-multiples, then `(0, m_perp e_j / |h|)` and their `i`-multiples.
pub fn build_basis(x: &FactorPair) -> Vec<HorizontalVector> {
    let frame = Frame::new(x);
    let dim = frame.dim();
    (0..dim)
        .map(|i| {
            let mut e = vec![0.0; dim];
            e[i] = 1.0;
            HorizontalVector {
                base: x.clone(),
                dir: frame.vector(x, &e),
            }
        })
        .collect()
}

pub fn to_intrinsic(xi: &HorizontalVector) -> IntrinsicCoords {
    let frame = Frame::new(&xi.base);
    IntrinsicCoords {
        base: xi.base.clone(),
        coords: frame.coords(&xi.base, &xi.dir),
    }
}

pub fn from_intrinsic(c: &IntrinsicCoords) -> Result<HorizontalVector> {
    let frame = Frame::new(&c.base);
    if c.coords.len() != frame.dim() {
        return Err(Error::DimensionMismatch {
            what: "intrinsic coordinates",
            expected: frame.dim(),
            got: c.coords.len(),
        });
    }
    Ok(HorizontalVector {
        base: c.base.clone(),
        dir: frame.vector(&c.base, &c.coords),
    })
}

/// Vector transport by parallelization: carry `xi` to `retract(base, eta_move)`
/// keeping its intrinsic coordinates.
pub fn transport(eta_move: &HorizontalVector, xi: &HorizontalVector) -> Result<HorizontalVector> {
    if eta_move.base != xi.base {
        return Err(Error::BaseMismatch);
    }
    let target = retract(&eta_move.base, &eta_move.dir)?;
    let coords = Frame::new(&xi.base).coords(&xi.base, &xi.dir);
    let dir = Frame::new(&target).vector(&target, &coords);
    Ok(HorizontalVector { base: target, dir })
}
