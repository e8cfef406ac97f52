//! Dense complex and real matrices.
//!
//! Both types wrap an `nalgebra` dense matrix and enforce the shape and
//! finiteness invariants at construction. Row-major ordering is used for
//! every flat entry list that crosses the public API.

use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Dense complex matrix with at least one row and one column and only
/// finite entries.
#[derive(Clone, PartialEq)]
pub struct CMatrix(DMatrix<C64>);

impl CMatrix {
    /// Builds a matrix from `rows * cols` entries in row-major order.
    pub fn from_row_slice(rows: usize, cols: usize, entries: &[C64]) -> Result<Self> {
        check_shape(rows, cols, entries.len())?;
        if let Some(k) = entries
            .iter()
            .position(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(Error::invalid(format!(
                "non-finite entry at ({}, {})",
                k / cols,
                k % cols
            )));
        }
        Ok(Self(DMatrix::from_row_slice(rows, cols, entries)))
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().position(|r| r.len() != n_cols) {
            return Err(Error::dim(format!(
                "ragged rows: row {r} has {} entries, expected {n_cols}",
                rows[r].len()
            )));
        }
        let flat: Vec<C64> = rows.iter().flatten().copied().collect();
        Self::from_row_slice(n_rows, n_cols, &flat)
    }

    /// Builds a complex matrix from real entries in row-major order.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        let flat: Vec<C64> = entries.iter().map(|&x| c(x, 0.0)).collect();
        Self::from_row_slice(rows, cols, &flat)
    }

    /// Panics on a zero dimension.
    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self(DMatrix::from_fn(rows, cols, f))
    }

    pub fn identity(n: usize) -> Self {
        assert!(n > 0, "identity dimension must be positive");
        Self(DMatrix::identity(n, n))
    }

    /// Panics on a zero dimension.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self(DMatrix::zeros(rows, cols))
    }

    /// Panics if `diag` is empty.
    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { diag[i] } else { ZERO })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&x| c(x, 0.0)).collect();
        Self::from_diagonal(&d)
    }

    /// Outer product `u v†`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<C64>]) -> Result<Self> {
        let n_cols = cols.len();
        let n_rows = cols.first().map_or(0, Vec::len);
        if n_cols == 0 || n_rows == 0 || cols.iter().any(|c| c.len() != n_rows) {
            return Err(Error::dim("columns must be non-empty and of equal length"));
        }
        let m = Self::from_fn(n_rows, n_cols, |i, j| cols[j][i]);
        Self::from_row_slice(n_rows, n_cols, &m.to_row_major())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    /// Side length of a square matrix.
    pub fn square_dim(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows())
        } else {
            Err(Error::dim(format!(
                "expected a square matrix, got {}x{}",
                self.rows(),
                self.cols()
            )))
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Option<C64> {
        self.0.get((i, j)).copied()
    }

    pub fn set(&mut self, i: usize, j: usize, z: C64) {
        self.0[(i, j)] = z;
    }

    pub fn to_row_major(&self) -> Vec<C64> {
        let (r, c) = self.shape();
        let mut out = Vec::with_capacity(r * c);
        for i in 0..r {
            for j in 0..c {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        (0..self.rows()).map(|i| self.row(i)).collect()
    }

    pub fn row(&self, i: usize) -> Vec<C64> {
        (0..self.cols()).map(|j| self.0[(i, j)]).collect()
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows()).map(|i| self.0[(i, j)]).collect()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows().min(self.cols()))
            .map(|i| self.0[(i, i)])
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn conj(&self) -> Self {
        Self(self.0.conjugate())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, z: C64) -> Self {
        Self(&self.0 * z)
    }

    pub fn scale_re(&self, x: f64) -> Self {
        self.scale(c(x, 0.0))
    }

    /// `(self + self†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self((&self.0 + self.0.adjoint()) * c(0.5, 0.0))
    }

    /// Shape-checked matrix product.
    pub fn matmul(&self, other: &CMatrix) -> Result<Self> {
        if self.cols() != other.rows() {
            return Err(Error::dim(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        Ok(Self(&self.0 * &other.0))
    }

    pub fn mul_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols() {
            return Err(Error::dim(format!(
                "cannot apply {}x{} matrix to vector of length {}",
                self.rows(),
                self.cols(),
                v.len()
            )));
        }
        Ok((0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self.0[(i, j)] * v[j]).sum())
            .collect())
    }

    /// `[a, b] = ab − ba`.
    pub fn commutator(a: &CMatrix, b: &CMatrix) -> Self {
        a * b - b * a
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self − other`; infinite on shape mismatch.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        if self.shape() != other.shape() {
            return f64::INFINITY;
        }
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Entrywise modulus-squares `|m_ij|²`.
    pub fn modulus_squared(&self) -> RMatrix {
        RMatrix(self.0.map(|z| z.norm_sqr()))
    }

    /// Real and imaginary parts.
    pub fn split(&self) -> (RMatrix, RMatrix) {
        (RMatrix(self.0.map(|z| z.re)), RMatrix(self.0.map(|z| z.im)))
    }

    /// Eigen-decomposition of the Hermitian part, eigenvalues in ascending
    /// order with eigenvectors as the matching columns.
    pub fn hermitian_eigen(&self) -> Result<(Vec<f64>, CMatrix)> {
        let n = self.square_dim()?;
        let eig = self.hermitian_part().0.symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = Self::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
        Ok((values, vectors))
    }

    /// Applies `f` to the eigenvalues of a self-adjoint matrix:
    /// `V diag(f(λ)) V†`.
    pub fn hermitian_function(&self, f: impl Fn(f64) -> C64) -> Result<Self> {
        let (values, vectors) = self.hermitian_eigen()?;
        let d: Vec<C64> = values.into_iter().map(f).collect();
        Ok(&(&vectors * &Self::from_diagonal(&d)) * &vectors.adjoint())
    }

    pub fn singular_values(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self
            .0
            .clone()
            .svd(false, false)
            .singular_values
            .iter()
            .copied()
            .collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    pub(crate) fn inner(&self) -> &DMatrix<C64> {
        &self.0
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    fn index(&self, idx: (usize, usize)) -> &C64 {
        &self.0[idx]
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CMatrix{:?}", self.to_rows())
    }
}

impl fmt::Display for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows() {
            let row: Vec<String> = self
                .row(i)
                .iter()
                .map(|z| format!("{:+.6}{:+.6}i", z.re, z.im))
                .collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

// Operator impls panic on shape mismatch, like the underlying nalgebra
// operators. Public operations check shapes before reaching them.
impl Mul for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        CMatrix(&self.0 * &rhs.0)
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &CMatrix) -> CMatrix {
        CMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &CMatrix) -> CMatrix {
        CMatrix(&self.0 - &rhs.0)
    }
}

impl Add for CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: CMatrix) -> CMatrix {
        CMatrix(self.0 + rhs.0)
    }
}

impl Sub for CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: CMatrix) -> CMatrix {
        CMatrix(self.0 - rhs.0)
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;

    fn neg(self) -> CMatrix {
        CMatrix(-&self.0)
    }
}

/// Dense real matrix with the same shape and finiteness invariants as
/// [`CMatrix`]. Holds transition matrices and their pseudo-stochastic
/// relatives.
#[derive(Clone, PartialEq)]
pub struct RMatrix(DMatrix<f64>);

impl RMatrix {
    pub fn from_row_slice(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        check_shape(rows, cols, entries.len())?;
        if let Some(k) = entries.iter().position(|x| !x.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite entry at ({}, {})",
                k / cols,
                k % cols
            )));
        }
        Ok(Self(DMatrix::from_row_slice(rows, cols, entries)))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().position(|r| r.len() != n_cols) {
            return Err(Error::dim(format!(
                "ragged rows: row {r} has {} entries, expected {n_cols}",
                rows[r].len()
            )));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Self::from_row_slice(n_rows, n_cols, &flat)
    }

    /// Panics on a zero dimension.
    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self(DMatrix::from_fn(rows, cols, f))
    }

    pub fn identity(n: usize) -> Self {
        assert!(n > 0, "identity dimension must be positive");
        Self(DMatrix::identity(n, n))
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn square_dim(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows())
        } else {
            Err(Error::dim(format!(
                "expected a square matrix, got {}x{}",
                self.rows(),
                self.cols()
            )))
        }
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.0.get((i, j)).copied()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self.0[(i, j)]).collect())
            .collect()
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        self.to_rows().into_iter().flatten().collect()
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn matmul(&self, other: &RMatrix) -> Result<Self> {
        if self.cols() != other.rows() {
            return Err(Error::dim(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows(),
                self.cols(),
                other.rows(),
                other.cols()
            )));
        }
        Ok(Self(&self.0 * &other.0))
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols() {
            return Err(Error::dim(format!(
                "cannot apply {}x{} matrix to vector of length {}",
                self.rows(),
                self.cols(),
                v.len()
            )));
        }
        Ok((0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self.0[(i, j)] * v[j]).sum())
            .collect())
    }

    pub fn column_sums(&self) -> Vec<f64> {
        (0..self.cols()).map(|j| self.0.column(j).sum()).collect()
    }

    pub fn min_entry(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_diff(&self, other: &RMatrix) -> f64 {
        if self.shape() != other.shape() {
            return f64::INFINITY;
        }
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn singular_values(&self) -> Vec<f64> {
        let mut s: Vec<f64> = self
            .0
            .clone()
            .svd(false, false)
            .singular_values
            .iter()
            .copied()
            .collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }

    pub fn try_inverse(&self) -> Option<Self> {
        self.0.clone().try_inverse().map(Self)
    }

    pub fn to_complex(&self) -> CMatrix {
        CMatrix(self.0.map(|x| c(x, 0.0)))
    }

    /// Integer matrix power by repeated squaring; `n = 0` gives the identity.
    pub fn pow(&self, mut n: u32) -> Result<Self> {
        let d = self.square_dim()?;
        let mut result = DMatrix::identity(d, d);
        let mut base = self.0.clone();
        while n > 0 {
            if n & 1 == 1 {
                result = &result * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        Ok(Self(result))
    }
}

impl Index<(usize, usize)> for RMatrix {
    type Output = f64;

    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.0[idx]
    }
}

impl fmt::Debug for RMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RMatrix{:?}", self.to_rows())
    }
}

impl fmt::Display for RMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.to_rows() {
            let row: Vec<String> = row.iter().map(|x| format!("{x:+.6}")).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl Mul for &RMatrix {
    type Output = RMatrix;

    fn mul(self, rhs: &RMatrix) -> RMatrix {
        RMatrix(&self.0 * &rhs.0)
    }
}

impl Add for &RMatrix {
    type Output = RMatrix;

    fn add(self, rhs: &RMatrix) -> RMatrix {
        RMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &RMatrix {
    type Output = RMatrix;

    fn sub(self, rhs: &RMatrix) -> RMatrix {
        RMatrix(&self.0 - &rhs.0)
    }
}

fn check_shape(rows: usize, cols: usize, len: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(Error::dim(format!(
            "matrix dimensions must be positive, got {rows}x{cols}"
        )));
    }
    if rows * cols != len {
        return Err(Error::dim(format!(
            "{rows}x{cols} matrix needs {} entries, got {len}",
            rows * cols
        )));
    }
    Ok(())
}

/// Standard single-qubit matrices used throughout tests and built-ins.
pub mod named {
    use super::*;

    pub fn pauli_x() -> CMatrix {
        CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    pub fn pauli_y() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]).unwrap()
    }

    pub fn pauli_z() -> CMatrix {
        CMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]).unwrap()
    }

    /// `[[1, 1], [1, −1]] / √2`.
    pub fn hadamard() -> CMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        CMatrix::from_real(2, 2, &[s, s, s, -s]).unwrap()
    }

    /// Column-major permutation matrix sending basis vector `j` to `perm[j]`.
    pub fn permutation(perm: &[usize]) -> CMatrix {
        let n = perm.len();
        CMatrix::from_fn(n, n, |i, j| if perm[j] == i { ONE } else { ZERO })
    }
}
