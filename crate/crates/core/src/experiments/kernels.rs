//! Blur kernels on a small centered patch.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelKind {
    /// Linear motion of `len` pixels at `angle_deg` counterclockwise,
    /// rasterized as MATLAB's `fspecial('motion', len, angle)`.
    Motion { len: f64, angle_deg: f64 },
    /// `exp(-v^T V^{-1} v / (2 s^2))` on the ellipse `v^T V^{-1} v <= 9 s^2`.
    Gaussian { scale: f64, cov: [[f64; 2]; 2] },
    /// Separable sine window `sin(pi (i+1)/(len+1)) sin(pi (j+1)/(len+1))` on a
    /// `len x len` patch.
    Sin { len: usize },
}

impl KernelKind {
    pub fn motion(len: f64) -> Self {
        KernelKind::Motion { len, angle_deg: 45.0 }
    }

    pub fn gaussian(scale: f64) -> Self {
        KernelKind::Gaussian {
            scale,
            cov: [[1.0, 0.8], [0.8, 1.0]],
        }
    }
}

/// Kernel values on an odd-sized patch, column-major, centered at
/// `(rows / 2, cols / 2)`. Sums to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<f64>,
}

impl Kernel {
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r + c * self.rows]
    }

    /// Nonzero taps as `(row offset, col offset, value)` relative to the center.
    pub fn taps(&self) -> Vec<(isize, isize, f64)> {
        let (cr, cc) = ((self.rows / 2) as isize, (self.cols / 2) as isize);
        let mut out = Vec::new();
        for c in 0..self.cols {
            for r in 0..self.rows {
                let v = self.get(r, c);
                if v != 0.0 {
                    out.push((r as isize - cr, c as isize - cc, v));
                }
            }
        }
        out
    }

    pub fn nnz(&self) -> usize {
        self.values.iter().filter(|&&v| v != 0.0).count()
    }

    pub fn identity() -> Self {
        Self {
            rows: 1,
            cols: 1,
            values: vec![1.0],
        }
    }

    fn normalized(rows: usize, cols: usize, mut values: Vec<f64>) -> Result<Self> {
        let s: f64 = values.iter().sum();
        if !(s > 0.0) {
            return Err(Error::InvalidParameter("kernel has no mass".into()));
        }
        values.iter_mut().for_each(|v| *v /= s);
        Ok(Self { rows, cols, values })
    }
}

pub fn make_kernel(kind: KernelKind) -> Result<Kernel> {
    match kind {
        KernelKind::Motion { len, angle_deg } => motion(len, angle_deg),
        KernelKind::Gaussian { scale, cov } => gaussian(scale, cov),
        KernelKind::Sin { len } => sin_window(len),
    }
}

fn motion(len: f64, angle_deg: f64) -> Result<Kernel> {
    if !(len.is_finite() && angle_deg.is_finite()) {
        return Err(Error::InvalidParameter(
            "motion kernel parameters must be finite".into(),
        ));
    }
    let eps = f64::EPSILON;
    let len = len.max(1.0);
    let half = (len - 1.0) / 2.0;
    let phi = angle_deg.rem_euclid(180.0).to_radians();
    let (sinphi, cosphi) = phi.sin_cos();
    let xsign = if cosphi > 0.0 {
        1.0
    } else if cosphi < 0.0 {
        -1.0
    } else {
        0.0
    };
    let width = 1.0;
    let sx = (half * cosphi + width * xsign - len * eps).trunc();
    let sy = (half * sinphi + width - len * eps).trunc();
    // the half patch: x in 0, xsign, .., sx ; y in 0..=sy
    let xs: Vec<f64> = if xsign == 0.0 {
        vec![0.0]
    } else {
        let steps = (sx / xsign).max(0.0) as usize;
        (0..=steps).map(|i| i as f64 * xsign).collect()
    };
    let ys: Vec<f64> = (0..=sy.max(0.0) as usize).map(|i| i as f64).collect();
    let (hr, hc) = (ys.len(), xs.len());
    let mut half_patch = vec![0.0; hr * hc];
    for (c, &x) in xs.iter().enumerate() {
        for (r, &y) in ys.iter().enumerate() {
            let mut dist = y * cosphi - x * sinphi;
            let rad = (x * x + y * y).sqrt();
            if rad >= half && dist.abs() <= width {
                let along = half - ((x + dist * sinphi) / cosphi).abs();
                dist = (dist * dist + along * along).sqrt();
            }
            half_patch[r + c * hr] = (width + eps - dist.abs()).max(0.0);
        }
    }
    // mirror into the full patch: upper-left is the half patch rotated by 180
    // degrees, lower-right the half patch itself, sharing the center
    let (rows, cols) = (2 * hr - 1, 2 * hc - 1);
    let mut full = vec![0.0; rows * cols];
    for c in 0..hc {
        for r in 0..hr {
            let v = half_patch[r + c * hr];
            full[(hr - 1 - r) + (hc - 1 - c) * rows] = v;
            full[(hr - 1 + r) + (hc - 1 + c) * rows] = v;
        }
    }
    if cosphi > 0.0 {
        let mut flipped = vec![0.0; rows * cols];
        for c in 0..cols {
            for r in 0..rows {
                flipped[(rows - 1 - r) + c * rows] = full[r + c * rows];
            }
        }
        full = flipped;
    }
    Kernel::normalized(rows, cols, full)
}

fn gaussian(scale: f64, cov: [[f64; 2]; 2]) -> Result<Kernel> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidParameter("gaussian scale must be > 0".into()));
    }
    let [[a, b], [b2, c]] = cov;
    let det = a * c - b * b2;
    if (b - b2).abs() > 1e-12 * (a.abs() + c.abs()) || !(a > 0.0) || !(det > 1e-12 * a * c) {
        return Err(Error::InvalidParameter(
            "covariance must be symmetric positive definite".into(),
        ));
    }
    // inverse of [[a, b], [b, c]]
    let (ia, ib, ic) = (c / det, -b / det, a / det);
    let cutoff = 9.0;
    // bounding box of the ellipse q(v) <= 9 s^2
    let rr = (3.0 * scale * a.sqrt()).floor() as isize;
    let rc = (3.0 * scale * c.sqrt()).floor() as isize;
    let rows = (2 * rr + 1) as usize;
    let cols = (2 * rc + 1) as usize;
    let mut v = vec![0.0; rows * cols];
    for j in -rc..=rc {
        for i in -rr..=rr {
            let (x, y) = (i as f64 / scale, j as f64 / scale);
            let q = ia * x * x + 2.0 * ib * x * y + ic * y * y;
            if q <= cutoff {
                v[(i + rr) as usize + (j + rc) as usize * rows] = (-0.5 * q).exp();
            }
        }
    }
    Kernel::normalized(rows, cols, v)
}

fn sin_window(len: usize) -> Result<Kernel> {
    if len == 0 {
        return Err(Error::InvalidParameter("sin kernel length must be >= 1".into()));
    }
    let n = if len.is_multiple_of(2) { len + 1 } else { len };
    let w: Vec<f64> = (0..n)
        .map(|i| (std::f64::consts::PI * (i + 1) as f64 / (n + 1) as f64).sin())
        .collect();
    let mut v = vec![0.0; n * n];
    for c in 0..n {
        for r in 0..n {
            v[r + c * n] = w[r] * w[c];
        }
    }
    Kernel::normalized(n, n, v)
}
