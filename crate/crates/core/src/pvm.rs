//! Orthonormal bases and projection-valued measures.

use crate::error::{Error, Result};
use crate::matrix::{CMatrix, C64, ONE, ZERO};
use crate::tolerance::Tolerance;
use crate::validate::{is_projector, is_unitary};

/// A complete family of mutually exclusive orthogonal projectors.
///
/// Validated eagerly: a `Pvm` value always satisfies self-adjointness,
/// idempotence, `P_i P_j = δ_ij P_i` and `Σ P_i = 1` to the tolerance it
/// was built with.
#[derive(Debug, Clone, PartialEq)]
pub struct Pvm {
    dim: usize,
    projectors: Vec<CMatrix>,
}

impl Pvm {
    pub fn new(projectors: Vec<CMatrix>, tol: Tolerance) -> Result<Self> {
        let first = projectors
            .first()
            .ok_or_else(|| Error::dim("a PVM needs at least one projector"))?;
        let dim = first.square_dim()?;
        for (k, p) in projectors.iter().enumerate() {
            if p.shape() != (dim, dim) {
                return Err(Error::dim(format!(
                    "projector {k} is {}x{}, expected {dim}x{dim}",
                    p.rows(),
                    p.cols()
                )));
            }
            let chk = is_projector(p, tol.alg())?;
            if !chk.holds {
                return Err(Error::invalid(format!(
                    "element {k} is not an orthogonal projector (deviation {:.3e})",
                    chk.deviation
                )));
            }
        }
        let zero = CMatrix::zeros(dim, dim);
        for a in 0..projectors.len() {
            for b in (a + 1)..projectors.len() {
                let dev = (&projectors[a] * &projectors[b]).max_abs_diff(&zero);
                if dev > tol.alg() {
                    return Err(Error::invalid(format!(
                        "projectors {a} and {b} are not mutually exclusive (deviation {dev:.3e})"
                    )));
                }
            }
        }
        let sum = projectors
            .iter()
            .skip(1)
            .fold(first.clone(), |acc, p| &acc + p);
        let dev = sum.max_abs_diff(&CMatrix::identity(dim));
        if dev > tol.alg() {
            return Err(Error::invalid(format!(
                "projectors do not sum to the identity (deviation {dev:.3e})"
            )));
        }
        Ok(Self { dim, projectors })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    pub fn projector(&self, i: usize) -> Result<&CMatrix> {
        self.projectors.get(i).ok_or(Error::IndexOutOfRange {
            index: i,
            len: self.projectors.len(),
        })
    }

    /// Conjugates every projector, `P_i ↦ W P_i W†`. `W` must be unitary;
    /// the result is a PVM again.
    pub(crate) fn conjugated_by(&self, w: &CMatrix) -> Self {
        let wd = w.adjoint();
        Self {
            dim: self.dim,
            projectors: self.projectors.iter().map(|p| &(w * p) * &wd).collect(),
        }
    }
}

/// An orthonormal basis, stored as the columns of a unitary matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    columns: CMatrix,
}

impl Basis {
    pub fn new(columns: CMatrix, tol: Tolerance) -> Result<Self> {
        let chk = is_unitary(&columns, tol.alg())?;
        if !chk.holds {
            return Err(Error::invalid(format!(
                "basis vectors are not orthonormal (deviation {:.3e})",
                chk.deviation
            )));
        }
        Ok(Self { columns })
    }

    /// The configuration basis `e_1, …, e_N`.
    pub fn standard(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::dim("basis dimension must be at least 1"));
        }
        Ok(Self {
            columns: CMatrix::identity(n),
        })
    }

    pub fn dim(&self) -> usize {
        self.columns.rows()
    }

    pub fn vector(&self, i: usize) -> Result<Vec<C64>> {
        crate::error::check_index(i, self.dim())?;
        Ok(self.columns.column(i))
    }

    /// Columns as a unitary matrix.
    pub fn as_matrix(&self) -> &CMatrix {
        &self.columns
    }

    /// Rank-one projectors `e_i e_i†`.
    pub fn to_pvm(&self) -> Pvm {
        let projectors = (0..self.dim())
            .map(|i| {
                let e = self.columns.column(i);
                CMatrix::outer(&e, &e)
            })
            .collect();
        Pvm {
            dim: self.dim(),
            projectors,
        }
    }
}

/// Configuration projectors `P_i = diag(0, …, 1, …, 0)`.
pub fn configuration_pvm(n: usize) -> Result<Pvm> {
    if n == 0 {
        return Err(Error::dim(
            "configuration space must have at least one configuration",
        ));
    }
    let projectors = (0..n)
        .map(|i| CMatrix::from_fn(n, n, |r, c| if r == i && c == i { ONE } else { ZERO }))
        .collect();
    Ok(Pvm { dim: n, projectors })
}

/// `P_i ↦ V† P_i V` for unitary `V`.
pub fn pvm_from_unitary(v: &CMatrix, base: &Pvm, tol: Tolerance) -> Result<Pvm> {
    let n = v.square_dim()?;
    if n != base.dim() {
        return Err(Error::dim(format!(
            "unitary is {n}x{n} but PVM acts on dimension {}",
            base.dim()
        )));
    }
    let chk = is_unitary(v, tol.alg())?;
    if !chk.holds {
        return Err(Error::invalid(format!(
            "transformation is not unitary (deviation {:.3e})",
            chk.deviation
        )));
    }
    Ok(base.conjugated_by(&v.adjoint()))
}
