//! Orthonormal 2D Haar wavelet transform on column-major `rows x cols` images
//! with power-of-two sides. The pyramid is taken all the way down to a single
//! scaling coefficient at index 0.

use std::ops::{Add, Mul, Sub};

use crate::error::{Error, Result};

const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

pub trait Sample: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {}
impl<T: Copy + Add<Output = T> + Sub<Output = T> + Mul<f64, Output = T>> Sample for T {}

fn check(rows: usize, cols: usize, len: usize) -> Result<()> {
    if rows == 0 || cols == 0 || !rows.is_power_of_two() || !cols.is_power_of_two() {
        return Err(Error::InvalidDimension(format!(
            "Haar transform needs power-of-two sides, got {rows}x{cols}"
        )));
    }
    if len != rows * cols {
        return Err(Error::DimensionMismatch {
            what: "image buffer",
            expected: rows * cols,
            got: len,
        });
    }
    Ok(())
}

/// Sizes of the active low-pass block at each level, coarsest last.
fn levels(rows: usize, cols: usize) -> Vec<(usize, usize)> {
    let (mut h, mut w) = (rows, cols);
    let mut out = Vec::new();
    while h > 1 || w > 1 {
        out.push((h, w));
        if h > 1 {
            h /= 2;
        }
        if w > 1 {
            w /= 2;
        }
    }
    out
}

fn step_forward<T: Sample>(x: &mut [T], n: usize, stride: usize, buf: &mut Vec<T>) {
    buf.clear();
    let half = n / 2;
    for i in 0..half {
        buf.push((x[2 * i * stride] + x[(2 * i + 1) * stride]) * S);
    }
    for i in 0..half {
        buf.push((x[2 * i * stride] - x[(2 * i + 1) * stride]) * S);
    }
    for (i, v) in buf.iter().enumerate() {
        x[i * stride] = *v;
    }
}

fn step_inverse<T: Sample>(x: &mut [T], n: usize, stride: usize, buf: &mut Vec<T>) {
    buf.clear();
    let half = n / 2;
    for i in 0..half {
        let a = x[i * stride];
        let d = x[(half + i) * stride];
        buf.push((a + d) * S);
        buf.push((a - d) * S);
    }
    for (i, v) in buf.iter().enumerate() {
        x[i * stride] = *v;
    }
}

pub fn analysis_in_place<T: Sample>(data: &mut [T], rows: usize, cols: usize) -> Result<()> {
    check(rows, cols, data.len())?;
    let mut buf = Vec::with_capacity(rows.max(cols));
    for (h, w) in levels(rows, cols) {
        if h > 1 {
            for c in 0..w {
                step_forward(&mut data[c * rows..], h, 1, &mut buf);
            }
        }
        if w > 1 {
            for r in 0..h {
                step_forward(&mut data[r..], w, rows, &mut buf);
            }
        }
    }
    Ok(())
}

pub fn synthesis_in_place<T: Sample>(data: &mut [T], rows: usize, cols: usize) -> Result<()> {
    check(rows, cols, data.len())?;
    let mut buf = Vec::with_capacity(rows.max(cols));
    for (h, w) in levels(rows, cols).into_iter().rev() {
        if w > 1 {
            for r in 0..h {
                step_inverse(&mut data[r..], w, rows, &mut buf);
            }
        }
        if h > 1 {
            for c in 0..w {
                step_inverse(&mut data[c * rows..], h, 1, &mut buf);
            }
        }
    }
    Ok(())
}

/// Haar coefficients of a column-major image.
pub fn haar_analysis(image: &[f64], rows: usize, cols: usize) -> Result<Vec<f64>> {
    let mut out = image.to_vec();
    analysis_in_place(&mut out, rows, cols)?;
    Ok(out)
}

/// Inverse of [`haar_analysis`].
pub fn haar_synthesis(coeffs: &[f64], rows: usize, cols: usize) -> Result<Vec<f64>> {
    let mut out = coeffs.to_vec();
    synthesis_in_place(&mut out, rows, cols)?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn random_image(rows: usize, cols: usize, seed: u64) -> Vec<f64> {
        let mut s = rng::stream(seed);
        (0..rows * cols).map(|_| rng::real_normal(&mut s)).collect()
    }

    #[test]
    fn constant_image_has_single_coefficient() {
        let img = vec![0.25; 8 * 16];
        let c = haar_analysis(&img, 8, 16).unwrap();
        let nonzero: Vec<usize> = (0..c.len()).filter(|&i| c[i].abs() > 1e-12).collect();
        assert_eq!(nonzero, vec![0]);
        assert!((c[0] - 0.25 * (128f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn round_trip_8x8() {
        let img = random_image(8, 8, 3);
        let back = haar_synthesis(&haar_analysis(&img, 8, 8).unwrap(), 8, 8).unwrap();
        let err = img.iter().zip(&back).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err <= 1e-12, "{err}");
    }

    #[test]
    fn parseval_16x16() {
        let img = random_image(16, 16, 4);
        let c = haar_analysis(&img, 16, 16).unwrap();
        let e0: f64 = img.iter().map(|v| v * v).sum();
        let e1: f64 = c.iter().map(|v| v * v).sum();
        assert!(((e0 - e1) / e0).abs() <= 1e-12);
    }

    #[test]
    fn rectangular_round_trip() {
        let img = random_image(4, 32, 5);
        let back = haar_synthesis(&haar_analysis(&img, 4, 32).unwrap(), 4, 32).unwrap();
        for (a, b) in img.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_power_of_two() {
        assert!(matches!(
            haar_analysis(&[0.0; 12], 3, 4),
            Err(Error::InvalidDimension(_))
        ));
        assert!(haar_synthesis(&[0.0; 8], 8, 2).is_err());
    }

    #[test]
    fn basis_columns_are_orthonormal() {
        // Synthesis of unit coefficient vectors gives the columns of W.
        let (r, c) = (4, 8);
        let cols: Vec<Vec<f64>> = (0..r * c)
            .map(|i| {
                let mut e = vec![0.0; r * c];
                e[i] = 1.0;
                haar_synthesis(&e, r, c).unwrap()
            })
            .collect();
        for i in 0..cols.len() {
            for j in 0..cols.len() {
                let g: f64 = cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g - want).abs() < 1e-12);
            }
        }
    }
}
