//! Validation predicates for square matrices.
//!
//! Each predicate returns a [`Check`]: the boolean verdict plus the
//! deviation it was computed from, so reports can show how close a
//! failing matrix came.

use serde::Serialize;

use crate::error::Result;
use crate::matrix::CMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Check {
    pub holds: bool,
    pub deviation: f64,
}

impl Check {
    pub fn within(deviation: f64, tol: f64) -> Self {
        Self {
            holds: deviation <= tol,
            deviation,
        }
    }
}

/// `max |M†M − 1|`.
pub fn is_unitary(m: &CMatrix, tol: f64) -> Result<Check> {
    let n = m.square_dim()?;
    let dev = (&m.adjoint() * m).max_abs_diff(&CMatrix::identity(n));
    Ok(Check::within(dev, tol))
}

/// `max |M − M†|`.
pub fn is_self_adjoint(m: &CMatrix, tol: f64) -> Result<Check> {
    m.square_dim()?;
    Ok(Check::within(m.max_abs_diff(&m.adjoint()), tol))
}

/// A matrix that is not self-adjoint is reported as failing with the
/// self-adjointness deviation. Otherwise the deviation is the magnitude of
/// the most negative eigenvalue (zero when none is negative).
pub fn is_psd(m: &CMatrix, tol: f64) -> Result<Check> {
    let sa = is_self_adjoint(m, tol)?;
    if !sa.holds {
        return Ok(Check {
            holds: false,
            deviation: sa.deviation,
        });
    }
    let (values, _) = m.hermitian_eigen()?;
    let dev = (-values[0]).max(0.0);
    Ok(Check::within(dev, tol))
}

/// Self-adjoint and idempotent: `max(|P − P†|, |P² − P|)`.
pub fn is_projector(m: &CMatrix, tol: f64) -> Result<Check> {
    let sa = is_self_adjoint(m, tol)?;
    let idem = (m * m).max_abs_diff(m);
    Ok(Check::within(sa.deviation.max(idem), tol))
}
