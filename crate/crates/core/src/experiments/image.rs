//! Grayscale images stored column-major, and the procedural test image.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    pub rows: usize,
    pub cols: usize,
    /// `data[r + c * rows]`
    pub data: Vec<f64>,
}

impl GrayImage {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::InvalidDimension(format!(
                "{rows}x{cols} image with {} samples",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r + c * self.rows]
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Circular convolution with a kernel given as `(row, col, value)` taps.
    pub fn convolve(&self, taps: &[(isize, isize, f64)]) -> GrayImage {
        let (rows, cols) = (self.rows as isize, self.cols as isize);
        let mut out = vec![0.0; self.data.len()];
        for &(dr, dc, w) in taps {
            for c in 0..cols {
                let sc = (c - dc).rem_euclid(cols) as usize;
                for r in 0..rows {
                    let sr = (r - dr).rem_euclid(rows) as usize;
                    out[r as usize + c as usize * self.rows] += w * self.data[sr + sc * self.rows];
                }
            }
        }
        GrayImage {
            rows: self.rows,
            cols: self.cols,
            data: out,
        }
    }
}

/// A piecewise-smooth `size x size` scene in `[0, 1]`: a shaded background,
/// axis-aligned blocks, a disc, an ellipse and a bar pattern. Mostly flat
/// regions, so few Haar coefficients carry most of the energy.
pub fn test_image(size: usize) -> GrayImage {
    let s = size as f64;
    let mut data = vec![0.0; size * size];
    for c in 0..size {
        for r in 0..size {
            let (y, x) = (r as f64 / s, c as f64 / s);
            let mut v = 0.25 + 0.2 * x;
            if (0.12..0.42).contains(&y) && (0.1..0.35).contains(&x) {
                v = 0.85;
            }
            if (0.55..0.9).contains(&y) && (0.08..0.3).contains(&x) {
                v = 0.1;
            }
            let (dy, dx) = (y - 0.3, x - 0.68);
            if dy * dy + dx * dx < 0.18 * 0.18 {
                v = 0.65 + 0.25 * (1.0 - (dy * dy + dx * dx).sqrt() / 0.18);
            }
            let (ey, ex) = ((y - 0.72) / 0.14, (x - 0.62) / 0.26);
            if ey * ey + ex * ex < 1.0 {
                v = 0.45;
            }
            if (0.62..0.82).contains(&y) && (0.4..0.56).contains(&x) && ((x * s) as usize / 8).is_multiple_of(2) {
                v = 0.95;
            }
            data[r + c * size] = v.clamp(0.0, 1.0);
        }
    }
    GrayImage {
        rows: size,
        cols: size,
        data,
    }
}
