//! Schur-Hadamard (entrywise phase) and Foldy-Wouthuysen (time-local
//! unitary) gauge transformations, the transformation law of the
//! Hamiltonian, and the covariant derivative.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::correspondence::{
    born_rule, dictionary_rhs_between, evolve_density, expect_obs, DensityMatrix,
    EvolutionOperator, StateVector,
};
use crate::dynamics::{check_step, Hamiltonian, MatrixFn, UnitaryFamily};
use crate::error::{Error, Result};
use crate::matrix::{CMatrix, RMatrix, C64, I};
use crate::pvm::configuration_pvm;
use crate::tolerance::Tolerance;
use crate::validate::is_unitary;

/// Real phases `φ_ij` attached to one target time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseMatrix {
    phases: RMatrix,
    time: f64,
}

impl PhaseMatrix {
    pub fn new(phases: RMatrix) -> Result<Self> {
        phases.square_dim()?;
        Ok(Self { phases, time: 0.0 })
    }

    pub fn zeros(n: usize) -> Self {
        Self::uniform(n, 0.0)
    }

    pub fn uniform(n: usize, phi: f64) -> Self {
        Self {
            phases: RMatrix::from_fn(n, n, |_, _| phi),
            time: 0.0,
        }
    }

    pub fn at(mut self, t: f64) -> Self {
        self.time = t;
        self
    }

    pub fn dim(&self) -> usize {
        self.phases.rows()
    }

    pub fn matrix(&self) -> &RMatrix {
        &self.phases
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Phases reduced into `[0, 2π)`, for display.
    pub fn reduced(&self) -> RMatrix {
        let n = self.dim();
        RMatrix::from_fn(n, n, |i, j| {
            self.phases[(i, j)].rem_euclid(std::f64::consts::TAU)
        })
    }

    /// `e^{iφ_ij}` entrywise.
    pub fn exponentiated(&self) -> CMatrix {
        let n = self.dim();
        CMatrix::from_fn(n, n, |i, j| C64::from_polar(1.0, self.phases[(i, j)]))
    }

    pub fn add(&self, other: &PhaseMatrix) -> Result<PhaseMatrix> {
        if self.dim() != other.dim() {
            return Err(Error::dim("phase matrices differ in size"));
        }
        Ok(Self {
            phases: &self.phases + &other.phases,
            time: self.time,
        })
    }
}

/// `Θ ↦ Θ ⊙ e^{iφ}`. Leaves `Γ = |Θ|²` untouched but generally destroys
/// unitarity.
pub fn sh_gauge(theta: &EvolutionOperator, phi: &PhaseMatrix) -> Result<EvolutionOperator> {
    let m = crate::algebra::schur_hadamard(theta.matrix(), &phi.exponentiated())?;
    Ok(EvolutionOperator::from_trusted(m)
        .at(theta.target_time())
        .anchored_at(theta.anchor_time()))
}

/// A time-dependent change of frame `V(t)`.
#[derive(Clone)]
pub struct FWTransform {
    dim: usize,
    eval: MatrixFn,
    tol: Tolerance,
}

impl fmt::Debug for FWTransform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FWTransform")
            .field("dim", &self.dim)
            .finish_non_exhaustive()
    }
}

impl FWTransform {
    pub fn from_fn(
        dim: usize,
        eval: impl Fn(f64) -> CMatrix + Send + Sync + 'static,
        tol: Tolerance,
    ) -> Self {
        Self {
            dim,
            eval: Arc::new(eval),
            tol,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, move |_| CMatrix::identity(dim), Tolerance::default())
    }

    /// The same unitary at every time.
    pub fn constant(v: CMatrix, tol: Tolerance) -> Result<Self> {
        let dim = v.square_dim()?;
        let t = Self::from_fn(dim, move |_| v.clone(), tol);
        t.at(0.0)?;
        Ok(t)
    }

    /// `V(t) = exp(−iGt)` for a self-adjoint generator `G`.
    pub fn exp_generator(g: &CMatrix, tol: Tolerance) -> Result<Self> {
        let fam = crate::dynamics::family_from_constant_h(g, 1.0, tol)?;
        Ok(Self::from_family(&fam))
    }

    /// `V(t) = U(t←0)`.
    pub fn from_family(fam: &UnitaryFamily) -> Self {
        let f = fam.clone();
        Self::from_fn(
            fam.dim(),
            move |t| f.at(t).expect("family validated at query"),
            Tolerance::default(),
        )
    }

    /// `V(t) = U†(t←0)`, the choice that moves all time dependence onto
    /// observables.
    pub fn adjoint_of(fam: &UnitaryFamily) -> Self {
        let f = fam.clone();
        Self::from_fn(
            fam.dim(),
            move |t| f.at(t).expect("family validated at query").adjoint(),
            Tolerance::default(),
        )
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `V(t)`, validated.
    pub fn at(&self, t: f64) -> Result<CMatrix> {
        let v = (self.eval)(t);
        if v.shape() != (self.dim, self.dim) {
            return Err(Error::dim(format!(
                "V({t}) is {}x{}, expected {1}x{1}",
                v.rows(),
                self.dim
            )));
        }
        let check = is_unitary(&v, self.tol.alg())?;
        if !check.holds {
            return Err(Error::invalid(format!(
                "V({t}) is not unitary (deviation {:.3e})",
                check.deviation
            )));
        }
        Ok(v)
    }
}

/// Everything in the new frame, plus the worst disagreement between
/// physical predictions computed in the two frames.
#[derive(Debug, Clone, Serialize)]
pub struct FwBundle {
    /// `Θ_V = V(t) Θ V†(0)`.
    pub theta: CMatrix,
    /// `ρ_V(0) = V(0) ρ(0) V†(0)`.
    pub rho_initial: CMatrix,
    /// `ρ_V(t) = Θ_V ρ_V(0) Θ_V†`.
    pub rho: CMatrix,
    /// `A_V = V(t) A V†(t)` for each observable.
    pub observables: Vec<CMatrix>,
    /// `Ψ_V = V(t) Ψ(t)` when a state vector was supplied.
    pub psi: Option<StateVector>,
    pub max_probability_deviation: f64,
    pub max_expectation_deviation: f64,
    pub max_gamma_deviation: f64,
    pub holds: bool,
}

/// Applies the frame change `V` at target time `t` (and `V(0)` at the
/// anchor) to an evolution operator, an initial density matrix, observables
/// at time `t`, and optionally the state vector at time `t`.
///
/// Probabilities in the new frame use the co-moving projectors
/// `V(t) P_i V†(t)`, and `Γ` is recomputed from the dictionary with the
/// target projectors moved by `V(t)` and the source projectors by `V(0)`.
pub fn fw_gauge(
    theta: &EvolutionOperator,
    rho0: &DensityMatrix,
    observables: &[CMatrix],
    psi: Option<&StateVector>,
    v: &FWTransform,
    t: f64,
    tol: Tolerance,
) -> Result<FwBundle> {
    let n = theta.dim();
    if rho0.dim() != n || v.dim() != n || observables.iter().any(|a| a.shape() != (n, n)) {
        return Err(Error::dim("bundle members must share the dimension of Θ"));
    }
    if psi.is_some_and(|p| p.dim() != n) {
        return Err(Error::dim("state vector size differs from Θ"));
    }
    let vt = v.at(t)?;
    let v0 = v.at(0.0)?;
    let conj = |m: &CMatrix, w: &CMatrix| &(w * m) * &w.adjoint();

    let theta_v = &(&vt * theta.matrix()) * &v0.adjoint();
    let rho_v0 = conj(rho0.matrix(), &v0).hermitian_part();
    let rho_vt = conj(&rho_v0, &theta_v).hermitian_part();
    let obs_v: Vec<CMatrix> = observables.iter().map(|a| conj(a, &vt)).collect();

    let rho_t = evolve_density(rho0, theta, tol)?;
    let loose = Tolerance::new(tol.alg().max(1e-9), tol.int())?;
    let rho_vt_dm = DensityMatrix::new(rho_vt.clone(), loose)?;

    let config = configuration_pvm(n)?;
    let moved_t = config.conjugated_by(&vt);
    let moved_0 = config.conjugated_by(&v0);

    let mut prob_dev = 0.0f64;
    for i in 0..n {
        let before = born_rule(&rho_t, &config, i)?;
        let after = born_rule(&rho_vt_dm, &moved_t, i)?;
        prob_dev = prob_dev.max((before - after).abs());
    }

    let mut expect_dev = 0.0f64;
    for (a, a_v) in observables.iter().zip(&obs_v) {
        let before = expect_obs(a, &rho_t, tol)?;
        let after = expect_obs(a_v, &rho_vt_dm, loose)?;
        expect_dev = expect_dev.max((before - after).abs());
    }

    let psi_v = match psi {
        Some(p) => {
            let moved = vt.mul_vec(p.components())?;
            for (i, z) in p.components().iter().enumerate() {
                let before = z.norm_sqr();
                let after = moved_t.projector(i)?.mul_vec(&moved)?;
                let after: f64 = moved
                    .iter()
                    .zip(&after)
                    .map(|(a, b)| (a.conj() * b).re)
                    .sum();
                prob_dev = prob_dev.max((before - after).abs());
            }
            Some(StateVector::normalized(moved)?)
        }
        None => None,
    };

    let theta_v_op = EvolutionOperator::from_trusted(theta_v.clone());
    let mut gamma_dev = 0.0f64;
    let gamma = theta.matrix().modulus_squared();
    for i in 0..n {
        for j in 0..n {
            let after = dictionary_rhs_between(&theta_v_op, &moved_t, &moved_0, i, j)?;
            gamma_dev = gamma_dev.max((gamma[(i, j)] - after).abs());
        }
    }

    let holds = prob_dev <= tol.alg() && expect_dev <= tol.alg() && gamma_dev <= tol.alg();
    Ok(FwBundle {
        theta: theta_v,
        rho_initial: rho_v0,
        rho: rho_vt,
        observables: obs_v,
        psi: psi_v,
        max_probability_deviation: prob_dev,
        max_expectation_deviation: expect_dev,
        max_gamma_deviation: gamma_dev,
        holds,
    })
}

/// `H_V = V H V† − iħ V ∂V†/∂t` with a central difference. Not symmetrized,
/// so its distance from self-adjointness measures the difference error.
pub fn transform_hamiltonian(
    h: &Hamiltonian,
    v: &FWTransform,
    t: f64,
    h_step: f64,
) -> Result<CMatrix> {
    check_step(h_step)?;
    if h.dim() != v.dim() {
        return Err(Error::dim("Hamiltonian and transform differ in size"));
    }
    let vt = v.at(t)?;
    let homogeneous = &(&vt * &h.at(t)?) * &vt.adjoint();
    let dv_adj = (v.at(t + h_step)?.adjoint() - v.at(t - h_step)?.adjoint()).scale_re(0.5 / h_step);
    let inhomogeneous = (&vt * &dv_adj).scale(-I * h.hbar());
    Ok(&homogeneous + &inhomogeneous)
}

#[derive(Debug, Clone, Serialize)]
pub struct CovariantReport {
    /// `‖V D ψ − D_V (V ψ)‖`.
    pub residual: f64,
    /// `‖V D ψ‖`, for scale.
    pub lhs_norm: f64,
}

/// Checks `V (∂_t + iH/ħ) ψ = (∂_t + iH_V/ħ)(V ψ)` at time `t`.
///
/// The identity holds for any differentiable `ψ(s)`; the trajectory used is
/// `ψ(s) = exp(−i (s − t) H(t) / 2ħ) ψ`, which passes through `ψ` at `t`
/// and is not annihilated by either side.
pub fn check_covariant_derivative(
    h: &Hamiltonian,
    v: &FWTransform,
    psi: &StateVector,
    t: f64,
    h_step: f64,
) -> Result<CovariantReport> {
    check_step(h_step)?;
    let n = h.dim();
    if v.dim() != n || psi.dim() != n {
        return Err(Error::dim(
            "Hamiltonian, transform and state must share a dimension",
        ));
    }
    let hbar = h.hbar();
    let ht = h.at(t)?;
    let flow = crate::dynamics::family_from_constant_h(&ht, 2.0 * hbar, Tolerance::default())?;
    let traj = |s: f64| -> Result<Vec<C64>> { flow.at(s - t)?.mul_vec(psi.components()) };

    let (before, now, after) = (traj(t - h_step)?, traj(t)?, traj(t + h_step)?);
    let diff = |a: &[C64], b: &[C64]| -> Vec<C64> {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y) / (2.0 * h_step))
            .collect()
    };
    let add = |a: &[C64], b: &[C64]| -> Vec<C64> { a.iter().zip(b).map(|(x, y)| x + y).collect() };
    let scale = |a: Vec<C64>, z: C64| -> Vec<C64> { a.into_iter().map(|x| x * z).collect() };

    let vt = v.at(t)?;
    let inner = add(&diff(&after, &before), &scale(ht.mul_vec(&now)?, I / hbar));
    let lhs = vt.mul_vec(&inner)?;

    let moved_after = v.at(t + h_step)?.mul_vec(&after)?;
    let moved_before = v.at(t - h_step)?.mul_vec(&before)?;
    let moved_now = vt.mul_vec(&now)?;
    let h_v = transform_hamiltonian(h, v, t, h_step)?;
    let rhs = add(
        &diff(&moved_after, &moved_before),
        &scale(h_v.mul_vec(&moved_now)?, I / hbar),
    );

    let residual =
        crate::correspondence::norm(&lhs.iter().zip(&rhs).map(|(a, b)| a - b).collect::<Vec<_>>());
    Ok(CovariantReport {
        residual,
        lhs_norm: crate::correspondence::norm(&lhs),
    })
}
