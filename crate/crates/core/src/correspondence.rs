//! The dictionary between transition matrices and Hilbert-space objects:
//! evolution operators, density matrices, state vectors, the Born rule and
//! observables in the Schrödinger and Heisenberg pictures.

use serde::Serialize;

use crate::dynamics::UnitaryFamily;
use crate::error::{check_index, Error, Result};
use crate::literal::to_entries;
use crate::matrix::{CMatrix, RMatrix, C64, ZERO};
use crate::pvm::Pvm;
use crate::stochastic::{ProbVector, TransitionMatrix};
use crate::tolerance::Tolerance;
use crate::validate::{is_psd, is_self_adjoint};

/// Second-largest eigenvalue below which a density matrix counts as pure.
pub const RANK_ONE_TOL: f64 = 1e-8;

/// A complex matrix `Θ(t←anchor)` whose columns have unit modulus-square
/// sums, so that `|Θ_ij|²` is a transition matrix. Unitary matrices are
/// the special case.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolutionOperator {
    theta: CMatrix,
    target_time: f64,
    anchor_time: f64,
}

impl EvolutionOperator {
    pub fn new(theta: CMatrix, tol: Tolerance) -> Result<Self> {
        theta.square_dim()?;
        let sums = theta.modulus_squared().column_sums();
        if let Some((j, s)) = sums
            .iter()
            .enumerate()
            .find(|(_, s)| (*s - 1.0).abs() > tol.alg())
        {
            return Err(Error::invalid(format!(
                "column {j} of the evolution operator has modulus-square sum {s}, not 1"
            )));
        }
        Ok(Self::from_trusted(theta))
    }

    pub(crate) fn from_trusted(theta: CMatrix) -> Self {
        Self {
            theta,
            target_time: 0.0,
            anchor_time: 0.0,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_trusted(CMatrix::identity(n))
    }

    pub fn at(mut self, t: f64) -> Self {
        self.target_time = t;
        self
    }

    pub fn anchored_at(mut self, t0: f64) -> Self {
        self.anchor_time = t0;
        self
    }

    pub fn dim(&self) -> usize {
        self.theta.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.theta
    }

    pub fn target_time(&self) -> f64 {
        self.target_time
    }

    pub fn anchor_time(&self) -> f64 {
        self.anchor_time
    }
}

/// `Γ_ij = |Θ_ij|²`.
pub fn gamma_from_theta(theta: &EvolutionOperator) -> TransitionMatrix {
    TransitionMatrix::from_trusted(theta.matrix().modulus_squared())
        .at(theta.target_time())
        .anchored_at(theta.anchor_time())
}

/// `Θ_ij = √Γ_ij · e^{iφ_ij}`; without phases every entry is the
/// non-negative square root.
pub fn theta_from_gamma(
    gamma: &TransitionMatrix,
    phases: Option<&RMatrix>,
) -> Result<EvolutionOperator> {
    let g = gamma.matrix();
    let n = gamma.dim();
    if let Some(p) = phases {
        if p.shape() != (n, n) {
            return Err(Error::dim(format!(
                "phase matrix is {}x{}, expected {n}x{n}",
                p.rows(),
                p.cols()
            )));
        }
    }
    let theta = CMatrix::from_fn(n, n, |i, j| {
        let modulus = g[(i, j)].max(0.0).sqrt();
        match phases {
            Some(p) => C64::from_polar(modulus, p[(i, j)]),
            None => C64::new(modulus, 0.0),
        }
    });
    Ok(EvolutionOperator::from_trusted(theta)
        .at(gamma.target_time())
        .anchored_at(gamma.anchor_time()))
}

fn trace_of_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.rows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

fn require_dim(n: usize, pvm: &Pvm) -> Result<()> {
    if pvm.dim() != n {
        return Err(Error::dim(format!(
            "PVM acts on dimension {}, expected {n}",
            pvm.dim()
        )));
    }
    Ok(())
}

/// `tr(Θ† P_i Θ P_j)`.
pub fn dictionary_rhs(theta: &EvolutionOperator, pvm: &Pvm, i: usize, j: usize) -> Result<f64> {
    dictionary_rhs_between(theta, pvm, pvm, i, j)
}

/// `tr(Θ† P_i Θ Q_j)` with separate projector families at the target and
/// the anchor. This is what a frame change with different unitaries at the
/// two times requires.
pub fn dictionary_rhs_between(
    theta: &EvolutionOperator,
    target: &Pvm,
    source: &Pvm,
    i: usize,
    j: usize,
) -> Result<f64> {
    let n = theta.dim();
    require_dim(n, target)?;
    require_dim(n, source)?;
    let p_i = target.projector(i)?;
    let q_j = source.projector(j)?;
    let t = theta.matrix();
    let left = &(&t.adjoint() * p_i) * t;
    Ok(trace_of_product(&left, q_j).re)
}

/// A self-adjoint, positive-semidefinite, unit-trace matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct DensityMatrix(CMatrix);

impl DensityMatrix {
    pub fn new(rho: CMatrix, tol: Tolerance) -> Result<Self> {
        let sa = is_self_adjoint(&rho, tol.alg())?;
        if !sa.holds {
            return Err(Error::invalid(format!(
                "density matrix is not self-adjoint (deviation {:.3e})",
                sa.deviation
            )));
        }
        let psd = is_psd(&rho, tol.alg())?;
        if !psd.holds {
            return Err(Error::invalid(format!(
                "density matrix has negative eigenvalue {:.3e}",
                -psd.deviation
            )));
        }
        let tr = rho.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > tol.alg() {
            return Err(Error::invalid(format!("density matrix has trace {tr}")));
        }
        Ok(Self(rho))
    }

    pub fn pure(psi: &StateVector) -> Self {
        Self(CMatrix::outer(psi.components(), psi.components()))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    /// `tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        trace_of_product(&self.0, &self.0).re
    }

    /// Whether all off-diagonal entries vanish. Only diagonal initial data
    /// corresponds directly to a probability distribution over
    /// configurations.
    pub fn is_configuration_diagonal(&self, tol: f64) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.0[(i, j)].norm() <= tol))
    }
}

/// A unit-norm column vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector(Vec<C64>);

impl Serialize for StateVector {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        to_entries(&self.0).serialize(ser)
    }
}

impl StateVector {
    pub fn new(psi: Vec<C64>, tol: Tolerance) -> Result<Self> {
        if psi.is_empty() {
            return Err(Error::dim("state vector must be non-empty"));
        }
        if psi.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("state vector has non-finite component"));
        }
        let norm = norm(&psi);
        if (norm - 1.0).abs() > tol.alg() {
            return Err(Error::invalid(format!(
                "state vector has norm {norm}, not 1"
            )));
        }
        Ok(Self::from_trusted(psi))
    }

    /// Scales a non-zero vector to unit norm.
    pub fn normalized(psi: Vec<C64>) -> Result<Self> {
        let n = norm(&psi);
        if psi.is_empty() || n == 0.0 || !n.is_finite() {
            return Err(Error::invalid(
                "cannot normalize a zero or non-finite vector",
            ));
        }
        Ok(Self::from_trusted(psi.into_iter().map(|z| z / n).collect()))
    }

    pub(crate) fn from_trusted(psi: Vec<C64>) -> Self {
        Self(psi)
    }

    pub fn basis(n: usize, i: usize) -> Result<Self> {
        check_index(i, n)?;
        let mut v = vec![ZERO; n];
        v[i] = C64::new(1.0, 0.0);
        Ok(Self::from_trusted(v))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn components(&self) -> &[C64] {
        &self.0
    }

    pub fn to_vec(&self) -> Vec<C64> {
        self.components().to_vec()
    }

    /// `|⟨a, b⟩|`, which is 1 exactly when the two states agree up to a
    /// global phase.
    pub fn overlap(&self, other: &StateVector) -> f64 {
        self.components()
            .iter()
            .zip(other.components())
            .map(|(a, b)| a.conj() * b)
            .sum::<C64>()
            .norm()
    }
}

pub(crate) fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `ρ(0) = diag(p)`.
pub fn initial_density(p0: &ProbVector) -> DensityMatrix {
    DensityMatrix(CMatrix::from_real_diagonal(p0.values()))
}

/// `ρ(t) = Θ ρ(0) Θ†`, re-validated. For a non-unitary `Θ` the trace is only
/// guaranteed when `ρ(0)` is diagonal in the configuration basis.
pub fn evolve_density(
    rho0: &DensityMatrix,
    theta: &EvolutionOperator,
    tol: Tolerance,
) -> Result<DensityMatrix> {
    if rho0.dim() != theta.dim() {
        return Err(Error::dim(format!(
            "density matrix of size {} with evolution operator of size {}",
            rho0.dim(),
            theta.dim()
        )));
    }
    let t = theta.matrix();
    let rho = (&(t * rho0.matrix()) * &t.adjoint()).hermitian_part();
    DensityMatrix::new(rho, tol)
}

/// `p_i = tr(P_i ρ)`, unclamped.
pub fn born_rule(rho: &DensityMatrix, pvm: &Pvm, i: usize) -> Result<f64> {
    require_dim(rho.dim(), pvm)?;
    Ok(trace_of_product(pvm.projector(i)?, rho.matrix()).re)
}

/// `p_i = |Ψ_i|²`.
pub fn born_rule_state(psi: &StateVector, i: usize) -> Result<f64> {
    check_index(i, psi.dim())?;
    Ok(psi.components()[i].norm_sqr())
}

/// Recovers `Ψ` from a pure `ρ = ΨΨ†`, with the first non-zero component
/// made real and positive.
pub fn factor_rank_one(rho: &DensityMatrix) -> Result<StateVector> {
    let (values, vectors) = rho.matrix().hermitian_eigen()?;
    let n = values.len();
    let second = if n > 1 { values[n - 2] } else { 0.0 };
    if second.abs() >= RANK_ONE_TOL {
        return Err(Error::NotRankOne {
            second_eigenvalue: second,
        });
    }
    let v = vectors.column(n - 1);
    let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let lead = v
        .iter()
        .find(|z| z.norm() > 1e-8 * scale)
        .copied()
        .unwrap_or(C64::new(1.0, 0.0));
    let phase = lead.conj() / lead.norm();
    StateVector::normalized(v.into_iter().map(|z| z * phase).collect())
}

/// A self-adjoint observable.
pub trait Observable {
    fn matrix(&self) -> CMatrix;
}

/// An observable diagonal in the configuration basis, with value `a_i` on
/// configuration `i` at its explicit time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Beable {
    values: Vec<f64>,
    time: f64,
}

impl Beable {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::dim("beable needs at least one value"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("beable values must be finite"));
        }
        Ok(Self { values, time: 0.0 })
    }

    pub fn at(mut self, t: f64) -> Self {
        self.time = t;
        self
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }
}

impl Observable for Beable {
    fn matrix(&self) -> CMatrix {
        CMatrix::from_real_diagonal(&self.values)
    }
}

/// A general self-adjoint matrix, typically not diagonal in the
/// configuration basis.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Emergeable(CMatrix);

impl Emergeable {
    pub fn new(m: CMatrix, tol: Tolerance) -> Result<Self> {
        let sa = is_self_adjoint(&m, tol.alg())?;
        if !sa.holds {
            return Err(Error::invalid(format!(
                "observable is not self-adjoint (deviation {:.3e})",
                sa.deviation
            )));
        }
        Ok(Self(m))
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }
}

impl Observable for Emergeable {
    fn matrix(&self) -> CMatrix {
        self.0.clone()
    }
}

impl Observable for CMatrix {
    fn matrix(&self) -> CMatrix {
        self.clone()
    }
}

/// `⟨A⟩ = tr(A ρ)`. The imaginary part must vanish to `τ_alg`.
pub fn expect_obs(a: &impl Observable, rho: &DensityMatrix, tol: Tolerance) -> Result<f64> {
    let m = a.matrix();
    if m.shape() != (rho.dim(), rho.dim()) {
        return Err(Error::dim(format!(
            "observable is {}x{}, state has dimension {}",
            m.rows(),
            m.cols(),
            rho.dim()
        )));
    }
    let sa = is_self_adjoint(&m, tol.alg())?;
    if !sa.holds {
        return Err(Error::invalid(format!(
            "observable is not self-adjoint (deviation {:.3e})",
            sa.deviation
        )));
    }
    let z = trace_of_product(&m, rho.matrix());
    if z.im.abs() > tol.alg() {
        return Err(Error::invalid(format!(
            "expectation value has imaginary part {:.3e}",
            z.im
        )));
    }
    Ok(z.re)
}

/// `A^H = Θ† A Θ`.
pub fn to_heisenberg(a: &impl Observable, theta: &EvolutionOperator) -> Result<Emergeable> {
    let m = a.matrix();
    let t = theta.matrix();
    let h = (&t.adjoint() * &m).matmul(t)?;
    Ok(Emergeable(h.hermitian_part()))
}

/// `Ȧ = dA^H/dt` at `t = 0` by a central difference of step `h`,
/// symmetrized to be exactly self-adjoint.
pub fn emergeable_rate(a: &Beable, family: &UnitaryFamily, h: f64) -> Result<Emergeable> {
    if !h.is_finite() || h <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "step must be positive, got {h}"
        )));
    }
    if a.dim() != family.dim() {
        return Err(Error::dim(format!(
            "beable of size {} with family of size {}",
            a.dim(),
            family.dim()
        )));
    }
    let m = a.matrix();
    let heis = |s: f64| -> Result<CMatrix> {
        let u = family.at(s)?;
        Ok(&(&u.adjoint() * &m) * &u)
    };
    let rate = (heis(h)? - heis(-h)?).scale_re(0.5 / h);
    Ok(Emergeable(rate.hermitian_part()))
}
