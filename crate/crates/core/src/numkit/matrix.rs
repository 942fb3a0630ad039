//! Dense square matrices and the PSD handling the rest of the crate needs.
//!
//! Dimensions in this crate stay small (d <= 16), so everything is stored
//! row-major in a flat `Vec<f64>` with no blocking or sparsity tricks.

use std::fmt;
use std::ops::{Index, IndexMut};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pivots in `[-CLAMP_TOL, 0]` are treated as exact zeros by [`cholesky`].
pub const CLAMP_TOL: f64 = 1e-10;

const SYMMETRY_TOL: f64 = 1e-12;
const POWER_ITER_TOL: f64 = 1e-12;
const POWER_ITER_MAX: usize = 10_000;

#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    dim: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.len();
        let mut data = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { dim, data })
    }

    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                got: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.dim.max(1)).map(<[f64]>::to_vec).collect()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matmul dimension mismatch");
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..d {
                    out.data[i * d + j] += a * other.data[k * d + j];
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.dim, v.len(), "matvec dimension mismatch");
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "add dimension mismatch");
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "sub dimension mismatch");
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    /// `self += s * other`
    pub fn add_scaled(&mut self, s: f64, other: &Self) {
        assert_eq!(self.dim, other.dim, "add_scaled dimension mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += s * b;
        }
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    /// Largest singular value.
    ///
    /// Closed forms for d <= 2, power iteration on `MᵀM` otherwise.
    pub fn spectral_norm(&self) -> f64 {
        match self.dim {
            0 => 0.0,
            1 => self.data[0].abs(),
            2 => {
                // eigenvalues of MᵀM
                let g = self.transpose().matmul(self);
                let (a, b, d) = (g[(0, 0)], g[(0, 1)], g[(1, 1)]);
                let half_tr = 0.5 * (a + d);
                let disc = (0.25 * (a - d) * (a - d) + b * b).sqrt();
                (half_tr + disc).max(0.0).sqrt()
            }
            _ => {
                let g = self.transpose().matmul(self);
                dominant_eigenvalue(&g).max(0.0).sqrt()
            }
        }
    }

    pub fn is_symmetric(&self) -> bool {
        let scale = self.data.iter().fold(1.0_f64, |m, a| m.max(a.abs()));
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                if (self[(i, j)] - self[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return false;
                }
            }
        }
        true
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.dim + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.rows()).finish()
    }
}

/// Power iteration for a symmetric PSD matrix; returns the top eigenvalue.
fn dominant_eigenvalue(g: &Matrix) -> f64 {
    let d = g.dim();
    // Start from the all-ones direction nudged off any axis of symmetry.
    let mut v: Vec<f64> = (0..d).map(|i| 1.0 + 0.01 * i as f64).collect();
    let mut lambda = 0.0;
    for _ in 0..POWER_ITER_MAX {
        let w = g.matvec(&v);
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return 0.0;
        }
        let next: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>()
            / v.iter().map(|x| x * x).sum::<f64>();
        v = w.into_iter().map(|x| x / norm).collect();
        if (next - lambda).abs() <= POWER_ITER_TOL * next.abs() {
            return next;
        }
        lambda = next;
    }
    lambda
}

/// Lower-triangular `L` with `L·Lᵀ = m`.
///
/// Slightly negative pivots from round-off (down to `-CLAMP_TOL`, scaled by
/// the largest diagonal entry) are clamped to zero; anything below fails.
pub fn cholesky(m: &Matrix) -> Result<Matrix> {
    let d = m.dim();
    let scale = (0..d).fold(1.0_f64, |s, i| s.max(m[(i, i)].abs()));
    let mut l = Matrix::zeros(d);
    for j in 0..d {
        let mut pivot = m[(j, j)];
        for k in 0..j {
            pivot -= l[(j, k)] * l[(j, k)];
        }
        if pivot < -CLAMP_TOL * scale {
            return Err(Error::NotPsd { row: j, pivot });
        }
        let ljj = pivot.max(0.0).sqrt();
        l[(j, j)] = ljj;
        for i in (j + 1)..d {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = if ljj > 0.0 { s / ljj } else { 0.0 };
        }
    }
    Ok(l)
}

/// Inverse of a symmetric positive-definite matrix via Cholesky.
pub fn spd_inverse(m: &Matrix) -> Result<Matrix> {
    let l = cholesky(m)?;
    let d = m.dim();
    let max_diag = (0..d).fold(0.0_f64, |s, i| s.max(l[(i, i)]));
    if (0..d).any(|i| l[(i, i)] <= max_diag * 1e-12 || l[(i, i)] == 0.0) {
        return Err(Error::Singular);
    }
    let mut inv = Matrix::zeros(d);
    let mut col = vec![0.0; d];
    for c in 0..d {
        // forward: L y = e_c
        for i in 0..d {
            let mut s = if i == c { 1.0 } else { 0.0 };
            for k in 0..i {
                s -= l[(i, k)] * col[k];
            }
            col[i] = s / l[(i, i)];
        }
        // backward: Lᵀ x = y
        for i in (0..d).rev() {
            let mut s = col[i];
            for k in (i + 1)..d {
                s -= l[(k, i)] * col[k];
            }
            col[i] = s / l[(i, i)];
        }
        for i in 0..d {
            inv[(i, c)] = col[i];
        }
    }
    // symmetrize away round-off
    for i in 0..d {
        for j in (i + 1)..d {
            let avg = 0.5 * (inv[(i, j)] + inv[(j, i)]);
            inv[(i, j)] = avg;
            inv[(j, i)] = avg;
        }
    }
    Ok(inv)
}

/// A validated symmetric positive-semidefinite matrix.
#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Matrix", into = "Matrix")]
pub struct PsdMatrix(Matrix);

impl PsdMatrix {
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
        cholesky(&m)?;
        Ok(Self(m))
    }

    pub fn identity(dim: usize) -> Self {
        Self(Matrix::identity(dim))
    }

    pub fn diag(values: &[f64]) -> Result<Self> {
        Self::new(Matrix::diag(values))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_inner(self) -> Matrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.frobenius_norm()
    }

    pub fn spectral_norm(&self) -> f64 {
        self.0.spectral_norm()
    }

    pub fn cholesky(&self) -> Matrix {
        cholesky(&self.0).expect("validated at construction")
    }

    pub fn inverse(&self) -> Result<Matrix> {
        spd_inverse(&self.0)
    }
}

impl TryFrom<Matrix> for PsdMatrix {
    type Error = Error;
    fn try_from(m: Matrix) -> Result<Self> {
        Self::new(m)
    }
}

impl From<PsdMatrix> for Matrix {
    fn from(p: PsdMatrix) -> Matrix {
        p.0
    }
}

impl fmt::Debug for PsdMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}
