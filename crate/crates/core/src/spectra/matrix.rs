//! Dense column-major Hermitian and real symmetric matrices.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatrixError {
    #[error("expected {expected} entries for a square matrix, got {got}")]
    NotSquare { expected: usize, got: usize },
    #[error("matrix is not Hermitian: max |M - M^H| = {0:e}")]
    NotHermitian(f64),
    #[error("vector length {got} does not match dimension {dim}")]
    LengthMismatch { dim: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![Complex64::new(0.0, 0.0); dim * dim] }
    }

    /// Accepts row-major entries and checks Hermiticity within `tol`.
    pub fn from_row_major(dim: usize, rows: &[Complex64], tol: f64) -> Result<Self, MatrixError> {
        if rows.len() != dim * dim {
            return Err(MatrixError::NotSquare { expected: dim * dim, got: rows.len() });
        }
        let mut m = Self::zeros(dim);
        for r in 0..dim {
            for c in 0..dim {
                m.data[c * dim + r] = rows[r * dim + c];
            }
        }
        let defect = m.hermitian_defect();
        if defect > tol {
            return Err(MatrixError::NotHermitian(defect));
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[c * self.dim + r]
    }

    /// Column-major storage.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub(crate) fn lower_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Copy the strict lower triangle onto the upper one and make the
    /// diagonal real.
    pub(crate) fn mirror_lower(&mut self) {
        let n = self.dim;
        for c in 0..n {
            let d = &mut self.data[c * n + c];
            *d = Complex64::new(d.re, 0.0);
            for r in c + 1..n {
                self.data[r * n + c] = self.data[c * n + r].conj();
            }
        }
    }

    pub fn hermitian_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for c in 0..n {
            for r in c..n {
                worst = worst.max((self.get(r, c) - self.get(c, r).conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i).re).sum()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Result<Vec<Complex64>, MatrixError> {
        if v.len() != self.dim {
            return Err(MatrixError::LengthMismatch { dim: self.dim, got: v.len() });
        }
        let n = self.dim;
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for (c, &vc) in v.iter().enumerate() {
            let col = &self.data[c * n..(c + 1) * n];
            for (o, &m) in out.iter_mut().zip(col) {
                *o += m * vc;
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim * dim] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[c * self.dim + r]
    }

    #[inline]
    pub(crate) fn add(&mut self, r: usize, c: usize, v: f64) {
        self.data[c * self.dim + r] += v;
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn symmetry_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for c in 0..n {
            for r in c + 1..n {
                worst = worst.max((self.get(r, c) - self.get(c, r)).abs());
            }
        }
        worst
    }

    pub(crate) fn mirror_lower(&mut self) {
        let n = self.dim;
        for c in 0..n {
            for r in c + 1..n {
                self.data[r * n + c] = self.data[c * n + r];
            }
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }
}
