//! Entrywise and tensor products, and the partial trace over an internal
//! factor.
//!
//! Tensor layout is system-major: in `A ⊗ B` with `A` of size `n` and `B`
//! of size `d`, the composite index `(a, γ)` maps to `a * d + γ`. Every
//! dilation routine relies on this layout.

use crate::error::{Error, Result};
use crate::matrix::CMatrix;

/// `(X ⊙ Y)_ij = X_ij Y_ij`.
pub fn schur_hadamard(x: &CMatrix, y: &CMatrix) -> Result<CMatrix> {
    if x.shape() != y.shape() {
        return Err(Error::dim(format!(
            "Schur-Hadamard product needs equal shapes, got {:?} and {:?}",
            x.shape(),
            y.shape()
        )));
    }
    Ok(CMatrix::from_fn(x.rows(), x.cols(), |i, j| {
        x[(i, j)] * y[(i, j)]
    }))
}

/// Kronecker product, `result[(a₁,b₁),(a₂,b₂)] = a[a₁,a₂] · b[b₁,b₂]`.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (br, bc) = b.shape();
    CMatrix::from_fn(a.rows() * br, a.cols() * bc, |r, c| {
        a[(r / br, c / bc)] * b[(r % br, c % bc)]
    })
}

/// Traces out the internal factor of an `(n·d) × (n·d)` matrix:
/// `result_ab = Σ_γ m[(a,γ),(b,γ)]`.
pub fn partial_trace_internal(m: &CMatrix, n: usize, d: usize) -> Result<CMatrix> {
    check_composite(m, n, d)?;
    Ok(CMatrix::from_fn(n, n, |a, b| {
        (0..d).map(|g| m[(a * d + g, b * d + g)]).sum()
    }))
}

/// The `d × d` block `(i, j)` of an `(n·d) × (n·d)` matrix.
pub fn block(m: &CMatrix, d: usize, i: usize, j: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |r, c| m[(i * d + r, j * d + c)])
}

/// Relative Frobenius distance from `m` to the nearest product `A ⊗ B`
/// with `A` of size `n` and `B` of size `d`.
///
/// Uses the Van Loan–Pitsianis rearrangement: `m` is a Kronecker product
/// exactly when the `n² × d²` matrix of vectorised blocks has rank one, and
/// the discarded singular values measure the best-fit error.
pub fn tensor_factorization_error(m: &CMatrix, n: usize, d: usize) -> Result<f64> {
    check_composite(m, n, d)?;
    let norm = m.frobenius_norm();
    if norm == 0.0 {
        return Ok(0.0);
    }
    let rearranged = CMatrix::from_fn(n * n, d * d, |row, col| {
        let (i, j) = (row / n, row % n);
        let (alpha, beta) = (col / d, col % d);
        m[(i * d + alpha, j * d + beta)]
    });
    let s = rearranged.singular_values();
    let residual: f64 = s.iter().skip(1).map(|x| x * x).sum();
    Ok(residual.sqrt() / norm)
}

fn check_composite(m: &CMatrix, n: usize, d: usize) -> Result<()> {
    if n == 0 || d == 0 {
        return Err(Error::dim("factor dimensions must be positive"));
    }
    if m.shape() != (n * d, n * d) {
        return Err(Error::dim(format!(
            "expected a {0}x{0} matrix for factors {n} and {d}, got {1}x{2}",
            n * d,
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}
