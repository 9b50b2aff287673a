//! Small helpers over `[Complex64]` slices. Inner products are conjugate-linear
//! in the first argument.

use num_complex::Complex64;

pub type C64 = Complex64;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[inline]
pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// `Re <a, b>`, the real inner product on C^n viewed as R^{2n}.
#[inline]
pub fn re_dot(a: &[C64], b: &[C64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

#[inline]
pub fn norm_sqr(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

#[inline]
pub fn norm(a: &[C64]) -> f64 {
    norm_sqr(a).sqrt()
}

pub fn norm_inf(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

pub fn scale(a: &[C64], s: C64) -> Vec<C64> {
    a.iter().map(|x| x * s).collect()
}

pub fn scale_real(a: &[C64], s: f64) -> Vec<C64> {
    a.iter().map(|x| x * s).collect()
}

pub fn scale_in_place(a: &mut [C64], s: f64) {
    a.iter_mut().for_each(|x| *x *= s);
}

pub fn add(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn sub(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `a + s * b`
pub fn axpy(a: &[C64], s: f64, b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(x, y)| x + y * s).collect()
}

pub fn all_finite(a: &[C64]) -> bool {
    a.iter().all(|x| x.re.is_finite() && x.im.is_finite())
}

/// `|| h m^* - a b^* ||_F` formed entrywise, so small differences do not
/// cancel against the O(|h||m|) magnitudes.
pub fn rank_one_distance(h: &[C64], m: &[C64], a: &[C64], b: &[C64]) -> f64 {
    let mut acc = 0.0;
    for (hi, ai) in h.iter().zip(a) {
        for (mj, bj) in m.iter().zip(b) {
            acc += (hi * mj.conj() - ai * bj.conj()).norm_sqr();
        }
    }
    acc.sqrt()
}
