//! Kraus decompositions and dilations onto `system ⊗ internal` spaces.
//!
//! Composite indices follow the system-major layout of [`crate::algebra`]:
//! `(a, γ) ↦ a · D + γ`, so block `(i, j)` of a dilated operator is the
//! `D × D` submatrix at rows `i·D..`, columns `j·D..`.

use serde::Serialize;

use crate::algebra::{block, tensor};
use crate::correspondence::{DensityMatrix, EvolutionOperator};
use crate::error::{check_index, Error, Result};
use crate::matrix::{CMatrix, RMatrix, C64, ZERO};
use crate::pvm::{configuration_pvm, Pvm};
use crate::stochastic::{stochastic_deviation, TransitionMatrix};
use crate::tolerance::Tolerance;
use crate::validate::is_unitary;

/// Operators `K_β` with `Σ_β K_β† K_β = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KrausSet {
    operators: Vec<CMatrix>,
    target_time: f64,
}

/// `max |Σ_β K_β† K_β − 1|`.
pub fn kraus_identity_error(operators: &[CMatrix]) -> f64 {
    let Some(first) = operators.first() else {
        return f64::INFINITY;
    };
    let n = first.rows();
    let sum = operators
        .iter()
        .fold(CMatrix::zeros(n, n), |acc, k| &acc + &(&k.adjoint() * k));
    sum.max_abs_diff(&CMatrix::identity(n))
}

impl KrausSet {
    pub fn new(operators: Vec<CMatrix>, tol: Tolerance) -> Result<Self> {
        let Some(first) = operators.first() else {
            return Err(Error::dim("a Kraus set needs at least one operator"));
        };
        let n = first.square_dim()?;
        if let Some(k) = operators.iter().position(|k| k.shape() != (n, n)) {
            return Err(Error::dim(format!("Kraus operator {k} is not {n}x{n}")));
        }
        let err = kraus_identity_error(&operators);
        if err > tol.alg() {
            return Err(Error::invalid(format!(
                "Kraus identity violated by {err:.3e}"
            )));
        }
        Ok(Self {
            operators,
            target_time: 0.0,
        })
    }

    pub fn at(mut self, t: f64) -> Self {
        self.target_time = t;
        self
    }

    /// The bit-flip channel `ρ ↦ (1−p) ρ + p σx ρ σx`.
    pub fn bit_flip(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!(
                "flip probability {p} outside [0, 1]"
            )));
        }
        let keep = CMatrix::identity(2).scale_re((1.0 - p).sqrt());
        let flip = crate::matrix::named::pauli_x().scale_re(p.sqrt());
        Self::new(vec![keep, flip], Tolerance::default())
    }

    pub fn dim(&self) -> usize {
        self.operators[0].rows()
    }

    pub fn len(&self) -> usize {
        self.operators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.operators.is_empty()
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.operators
    }

    pub fn target_time(&self) -> f64 {
        self.target_time
    }
}

/// `K_β = Θ P_β`: column `β` of `Θ`, zero elsewhere.
pub fn kraus_from_theta(theta: &EvolutionOperator) -> KrausSet {
    let n = theta.dim();
    let t = theta.matrix();
    let operators = (0..n)
        .map(|b| CMatrix::from_fn(n, n, |i, j| if j == b { t[(i, j)] } else { ZERO }))
        .collect();
    KrausSet {
        operators,
        target_time: theta.target_time(),
    }
}

fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    (a * b).trace()
}

fn require_stochastic(gamma: RMatrix, tol: Tolerance) -> Result<TransitionMatrix> {
    let (min, col_err) = stochastic_deviation(&gamma);
    if min < -tol.alg() || col_err > tol.alg() {
        let sums = gamma.column_sums();
        let worst = (0..gamma.cols())
            .max_by(|&a, &b| (sums[a] - 1.0).abs().total_cmp(&(sums[b] - 1.0).abs()))
            .unwrap_or(0);
        return Err(Error::invalid(format!(
            "reconstructed matrix is not stochastic: worst column {worst} sums to {}, smallest entry {min:.3e}",
            sums[worst]
        )));
    }
    Ok(TransitionMatrix::from_trusted(gamma))
}

/// `Γ_ij = Σ_β tr(K_β† P_i K_β P_j)`.
pub fn gamma_from_kraus(ks: &KrausSet, pvm: &Pvm, tol: Tolerance) -> Result<TransitionMatrix> {
    let n = ks.dim();
    if pvm.dim() != n || pvm.len() != n {
        return Err(Error::dim(format!(
            "need {n} projectors on dimension {n}, got {} on dimension {}",
            pvm.len(),
            pvm.dim()
        )));
    }
    let err = kraus_identity_error(ks.operators());
    if err > tol.alg() {
        return Err(Error::invalid(format!(
            "Kraus identity violated by {err:.3e}"
        )));
    }
    let sandwiched: Vec<Vec<CMatrix>> = ks
        .operators()
        .iter()
        .map(|k| {
            pvm.projectors()
                .iter()
                .map(|p| &(&k.adjoint() * p) * k)
                .collect()
        })
        .collect();
    let gamma = RMatrix::from_fn(n, n, |i, j| {
        sandwiched
            .iter()
            .map(|per_op| trace_product(&per_op[i], &pvm.projectors()[j]).re)
            .sum()
    });
    Ok(require_stochastic(gamma, tol)?.at(ks.target_time()))
}

/// `ρ(t) = Σ_β K_β ρ(0) K_β†`.
pub fn evolve_density_kraus(
    rho0: &DensityMatrix,
    ks: &KrausSet,
    tol: Tolerance,
) -> Result<DensityMatrix> {
    if rho0.dim() != ks.dim() {
        return Err(Error::dim(
            "density matrix and Kraus operators differ in size",
        ));
    }
    let err = kraus_identity_error(ks.operators());
    if err > tol.alg() {
        return Err(Error::invalid(format!(
            "Kraus identity violated by {err:.3e}"
        )));
    }
    let n = ks.dim();
    let rho = ks.operators().iter().fold(CMatrix::zeros(n, n), |acc, k| {
        &acc + &(&(k * rho0.matrix()) * &k.adjoint())
    });
    DensityMatrix::new(rho.hermitian_part(), tol)
}

/// An evolution operator on `system ⊗ internal` together with the internal
/// projector family and the internal label `γ` used at the anchor.
#[derive(Debug, Clone, Serialize)]
pub struct DilatedSystem {
    system_dim: usize,
    internal_dim: usize,
    gamma_index: usize,
    #[serde(skip)]
    internal_pvm: Pvm,
    evolution: CMatrix,
}

impl DilatedSystem {
    /// `P_γ` must have unit trace; a higher-rank projector would multiply
    /// every reconstructed probability by its rank.
    pub fn new(
        evolution: CMatrix,
        system_dim: usize,
        internal_pvm: Pvm,
        gamma_index: usize,
        tol: Tolerance,
    ) -> Result<Self> {
        let d = internal_pvm.dim();
        if system_dim == 0 || evolution.shape() != (system_dim * d, system_dim * d) {
            return Err(Error::dim(format!(
                "dilated operator is {}x{}, expected {1}x{1}",
                evolution.rows(),
                system_dim * d
            )));
        }
        let p = internal_pvm.projector(gamma_index)?;
        let rank = p.trace().re;
        if (rank - 1.0).abs() > tol.alg() {
            return Err(Error::invalid(format!(
                "internal projector {gamma_index} has rank {rank:.3}, expected a rank-one projector"
            )));
        }
        Ok(Self {
            system_dim,
            internal_dim: d,
            gamma_index,
            internal_pvm,
            evolution,
        })
    }

    pub fn system_dim(&self) -> usize {
        self.system_dim
    }

    pub fn internal_dim(&self) -> usize {
        self.internal_dim
    }

    pub fn gamma_index(&self) -> usize {
        self.gamma_index
    }

    pub fn internal_pvm(&self) -> &Pvm {
        &self.internal_pvm
    }

    pub fn evolution(&self) -> &CMatrix {
        &self.evolution
    }

    /// The `D × D` block `[Θ̃_ij]`.
    pub fn block(&self, i: usize, j: usize) -> Result<CMatrix> {
        check_index(i, self.system_dim)?;
        check_index(j, self.system_dim)?;
        Ok(block(&self.evolution, self.internal_dim, i, j))
    }
}

/// `Θ ↦ Θ ⊗ 1_D`.
pub fn dilate_trivial(
    theta: &EvolutionOperator,
    d: usize,
    internal_pvm: Pvm,
    gamma_index: usize,
    tol: Tolerance,
) -> Result<DilatedSystem> {
    if d == 0 || internal_pvm.dim() != d {
        return Err(Error::dim(format!(
            "internal PVM acts on dimension {}, expected {d}",
            internal_pvm.dim()
        )));
    }
    let evolution = tensor(theta.matrix(), &CMatrix::identity(d));
    DilatedSystem::new(evolution, theta.dim(), internal_pvm, gamma_index, tol)
}

/// `Γ_ij = tr([Θ̃_ij]† [Θ̃_ij] P_γ)`, the block form of the partial-trace
/// dictionary.
pub fn reconstruct_gamma(ds: &DilatedSystem, tol: Tolerance) -> Result<TransitionMatrix> {
    let n = ds.system_dim;
    let d = ds.internal_dim;
    let p = ds.internal_pvm.projector(ds.gamma_index)?;
    let gamma = RMatrix::from_fn(n, n, |i, j| {
        let b = block(&ds.evolution, d, i, j);
        trace_product(&(&b.adjoint() * &b), p).re
    });
    require_stochastic(gamma, tol)
}

/// Left-multiplies block `(i, j)` by `blocks[i·N + j]`.
pub fn blockwise_gauge(
    ds: &DilatedSystem,
    blocks: &[CMatrix],
    tol: Tolerance,
) -> Result<DilatedSystem> {
    let n = ds.system_dim;
    let d = ds.internal_dim;
    if blocks.len() != n * n {
        return Err(Error::dim(format!(
            "need {} blocks, got {}",
            n * n,
            blocks.len()
        )));
    }
    for (k, v) in blocks.iter().enumerate() {
        if v.shape() != (d, d) {
            return Err(Error::dim(format!("block unitary {k} is not {d}x{d}")));
        }
        let check = is_unitary(v, tol.alg())?;
        if !check.holds {
            return Err(Error::invalid(format!(
                "block unitary ({}, {}) is not unitary (deviation {:.3e})",
                k / n,
                k % n,
                check.deviation
            )));
        }
    }
    let moved: Vec<CMatrix> = (0..n * n)
        .map(|k| &blocks[k] * &block(&ds.evolution, d, k / n, k % n))
        .collect();
    let evolution = CMatrix::from_fn(n * d, n * d, |r, c| {
        moved[(r / d) * n + c / d][(r % d, c % d)]
    });
    Ok(DilatedSystem {
        evolution,
        ..ds.clone()
    })
}

/// Dilates a Kraus set to a unitary on `system ⊗ internal` with `D` equal to
/// the number of operators: the isometry `ψ ⊗ e₀ ↦ Σ_β K_β ψ ⊗ e_β` fills
/// the `γ = 0` columns, and the rest are completed by Gram-Schmidt over
/// standard basis vectors, taking the largest remaining component each time
/// so the completion is deterministic.
pub fn stinespring_unitary(ks: &KrausSet, tol: Tolerance) -> Result<DilatedSystem> {
    let err = kraus_identity_error(ks.operators());
    if err > tol.alg() {
        return Err(Error::invalid(format!(
            "Kraus identity violated by {err:.3e}"
        )));
    }
    let n = ks.dim();
    let d = ks.len();
    let total = n * d;
    let mut columns: Vec<Option<Vec<C64>>> = vec![None; total];
    for j in 0..n {
        let mut col = vec![ZERO; total];
        for (b, k) in ks.operators().iter().enumerate() {
            for i in 0..n {
                col[i * d + b] = k[(i, j)];
            }
        }
        columns[j * d] = Some(col);
    }

    let mut basis: Vec<Vec<C64>> = columns.iter().flatten().cloned().collect();
    let project_out = |v: &mut Vec<C64>, basis: &[Vec<C64>]| {
        // Two passes of classical Gram-Schmidt keep the result orthogonal
        // to rounding.
        for _ in 0..2 {
            for q in basis {
                let overlap: C64 = q.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
                for (x, y) in v.iter_mut().zip(q) {
                    *x -= overlap * y;
                }
            }
        }
    };
    for slot in columns.iter_mut().filter(|c| c.is_none()) {
        let mut best: Option<(f64, Vec<C64>)> = None;
        for e in 0..total {
            let mut v = vec![ZERO; total];
            v[e] = C64::new(1.0, 0.0);
            project_out(&mut v, &basis);
            let norm = crate::correspondence::norm(&v);
            if best.as_ref().is_none_or(|(b, _)| norm > *b) {
                best = Some((norm, v));
            }
        }
        let (norm, v) = best.expect("at least one candidate");
        let v: Vec<C64> = v.into_iter().map(|z| z / norm).collect();
        basis.push(v.clone());
        *slot = Some(v);
    }
    let cols: Vec<Vec<C64>> = columns.into_iter().flatten().collect();
    let u = CMatrix::from_columns(&cols)?;
    DilatedSystem::new(u, n, configuration_pvm(d)?, 0, tol)
}

/// Replaces each entry `a + bi` by the real block `[[a, −b], [b, a]]`.
pub fn realify(m: &CMatrix) -> RMatrix {
    RMatrix::from_fn(2 * m.rows(), 2 * m.cols(), |r, c| {
        let z = m[(r / 2, c / 2)];
        match (r % 2, c % 2) {
            (0, 0) | (1, 1) => z.re,
            (0, 1) => -z.im,
            _ => z.im,
        }
    })
}

/// Conjugates a realified matrix by the block-diagonal swap
/// `K = ⊕ [[0, 1], [1, 0]]`, which maps `realify(M)` to
/// `realify(conj(M))`.
pub fn apply_conjugation_real(m: &RMatrix) -> Result<RMatrix> {
    if !m.rows().is_multiple_of(2) || !m.cols().is_multiple_of(2) {
        return Err(Error::dim(format!(
            "realified matrices have even dimensions, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(RMatrix::from_fn(m.rows(), m.cols(), |r, c| {
        m[(r ^ 1, c ^ 1)]
    }))
}

/// The `2N × 2N` conjugation matrix `K`.
pub fn conjugation_matrix(n: usize) -> RMatrix {
    RMatrix::from_fn(2 * n, 2 * n, |r, c| if r == (c ^ 1) { 1.0 } else { 0.0 })
}
