//! Column-major dense complex matrices. Used for small oracles and for
//! materializing `A^*(z)` when that is explicitly requested.

use crate::cvec::{C64, ZERO};

#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn from_columns(rows: usize, columns: &[Vec<C64>]) -> Self {
        let mut data = Vec::with_capacity(rows * columns.len());
        for c in columns {
            assert_eq!(c.len(), rows);
            data.extend_from_slice(c);
        }
        Self {
            rows,
            cols: columns.len(),
            data,
        }
    }

    /// `h m^*`
    pub fn outer(h: &[C64], m: &[C64]) -> Self {
        let mut out = Self::zeros(h.len(), m.len());
        for (j, mj) in m.iter().enumerate() {
            let mc = mj.conj();
            for (i, hi) in h.iter().enumerate() {
                out.data[i + j * h.len()] = hi * mc;
            }
        }
        out
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.data[r + c * self.rows]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: C64) {
        self.data[r + c * self.rows] = v;
    }

    pub fn column(&self, c: usize) -> &[C64] {
        &self.data[c * self.rows..(c + 1) * self.rows]
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols);
        let mut out = vec![ZERO; self.rows];
        for (c, vc) in v.iter().enumerate() {
            for (o, a) in out.iter_mut().zip(self.column(c)) {
                *o += a * vc;
            }
        }
        out
    }

    /// `self^* v`
    pub fn adjoint_mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.rows);
        (0..self.cols).map(|c| crate::cvec::dot(self.column(c), v)).collect()
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows);
        let cols: Vec<Vec<C64>> = (0..other.cols).map(|c| self.mul_vec(other.column(c))).collect();
        CMatrix::from_columns(self.rows, &cols)
    }

    pub fn adjoint(&self) -> CMatrix {
        let mut out = CMatrix::zeros(self.cols, self.rows);
        for c in 0..self.cols {
            for r in 0..self.rows {
                out.set(c, r, self.get(r, c).conj());
            }
        }
        out
    }

    pub fn frobenius(&self) -> f64 {
        crate::cvec::norm(&self.data)
    }

    /// `Re tr(self^* other)`
    pub fn re_inner(&self, other: &CMatrix) -> f64 {
        crate::cvec::re_dot(&self.data, &other.data)
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: crate::cvec::sub(&self.data, &other.data),
        }
    }
}
