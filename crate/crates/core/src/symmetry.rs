//! Dynamical symmetries: unitaries `V` with `|(VΘV†)_ij| = |Θ_ij|`, their
//! classification, basis-independent (Wigner) testing, and conservation of
//! commuting generators.

use serde::Serialize;

use crate::correspondence::{DensityMatrix, EvolutionOperator};
use crate::dynamics::UnitaryFamily;
use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::sample::{haar_unitary, seeded};
use crate::tolerance::Tolerance;
use crate::validate::{is_self_adjoint, is_unitary, Check};

/// Default number of random bases tried by [`check_wigner`].
pub const DEFAULT_WIGNER_TRIALS: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KindHint {
    #[default]
    Unknown,
    Unitary,
    /// Treat the candidate as the anti-unitary operator `V K`, with `K`
    /// complex conjugation in the configuration basis.
    AntiUnitary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryCandidate {
    v: CMatrix,
    kind_hint: KindHint,
}

impl SymmetryCandidate {
    pub fn new(v: CMatrix, kind_hint: KindHint, tol: Tolerance) -> Result<Self> {
        let check = is_unitary(&v, tol.alg())?;
        if !check.holds {
            return Err(Error::invalid(format!(
                "symmetry candidate is not unitary (deviation {:.3e})",
                check.deviation
            )));
        }
        Ok(Self { v, kind_hint })
    }

    pub fn unitary(v: CMatrix, tol: Tolerance) -> Result<Self> {
        Self::new(v, KindHint::Unknown, tol)
    }

    pub fn dim(&self) -> usize {
        self.v.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.v
    }

    pub fn kind_hint(&self) -> KindHint {
        self.kind_hint
    }

    /// `VΘV†`, or `V conj(Θ) V†` for an anti-unitary hint.
    fn transform(&self, theta: &CMatrix) -> CMatrix {
        let inner = match self.kind_hint {
            KindHint::AntiUnitary => theta.conj(),
            _ => theta.clone(),
        };
        &(&self.v * &inner) * &self.v.adjoint()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    /// `VΘV† = Θ`.
    Unitary,
    /// `VΘV† = conj(Θ)`.
    AntiUnitary,
    /// Equal moduli, but neither of the above.
    PhaseGeneral,
    None,
}

#[derive(Debug, Clone, Serialize)]
pub struct SymmetryVerdict {
    pub holds: bool,
    pub classification: Classification,
    /// `arg(Θ̃_ij) − arg(Θ_ij)` in `(−π, π]`; `None` where `|Θ_ij|` is too
    /// small for a phase to be defined. Present only when the symmetry holds.
    pub recovered_phases: Option<Vec<Vec<Option<f64>>>>,
    /// `max | |Θ̃_ij|² − |Θ_ij|² |`.
    pub max_violation: f64,
}

fn require_same_dim(v: &SymmetryCandidate, theta: &EvolutionOperator) -> Result<()> {
    if v.dim() != theta.dim() {
        return Err(Error::dim(format!(
            "candidate of size {} with evolution operator of size {}",
            v.dim(),
            theta.dim()
        )));
    }
    Ok(())
}

fn modulus_violation(a: &CMatrix, b: &CMatrix) -> f64 {
    a.modulus_squared().max_abs_diff(&b.modulus_squared())
}

fn wrap_phase(x: f64) -> f64 {
    let pi = std::f64::consts::PI;
    let r = (x + pi).rem_euclid(std::f64::consts::TAU) - pi;
    if r <= -pi {
        r + std::f64::consts::TAU
    } else {
        r
    }
}

/// Tests whether `V` is a dynamical symmetry of `Θ` by comparing the
/// moduli of `Θ̃ = VΘV†` and `Θ` entrywise.
pub fn check_dynamical_symmetry(
    v: &SymmetryCandidate,
    theta: &EvolutionOperator,
    tol: Tolerance,
) -> Result<SymmetryVerdict> {
    require_same_dim(v, theta)?;
    let t = theta.matrix();
    let transformed = &(v.matrix() * t) * &v.matrix().adjoint();
    let max_violation = modulus_violation(&transformed, t);
    let holds = max_violation <= tol.alg();
    if !holds {
        return Ok(SymmetryVerdict {
            holds,
            classification: Classification::None,
            recovered_phases: None,
            max_violation,
        });
    }
    let classification = if transformed.max_abs_diff(t) <= tol.alg() {
        Classification::Unitary
    } else if transformed.max_abs_diff(&t.conj()) <= tol.alg() {
        Classification::AntiUnitary
    } else {
        Classification::PhaseGeneral
    };
    let n = theta.dim();
    let phases = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (t[(i, j)].norm() > tol.alg())
                        .then(|| wrap_phase(transformed[(i, j)].arg() - t[(i, j)].arg()))
                })
                .collect()
        })
        .collect();
    Ok(SymmetryVerdict {
        holds,
        classification,
        recovered_phases: Some(phases),
        max_violation,
    })
}

/// `V conj(Θ) V† = Θ`, the condition for the anti-unitary operator `VK` to
/// commute with the evolution.
pub fn check_antiunitary_form(
    v: &SymmetryCandidate,
    theta: &EvolutionOperator,
    tol: Tolerance,
) -> Result<Check> {
    require_same_dim(v, theta)?;
    let t = theta.matrix();
    let lhs = &(v.matrix() * &t.conj()) * &v.matrix().adjoint();
    Ok(Check::within(lhs.max_abs_diff(t), tol.alg()))
}

#[derive(Debug, Clone, Serialize)]
pub struct Counterexample {
    /// 0 is the configuration basis; later trials are random.
    pub trial: usize,
    /// Basis vectors as columns.
    pub basis: CMatrix,
    pub violation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct WignerVerdict {
    pub holds: bool,
    pub bases_tested: usize,
    pub max_violation: f64,
    pub counterexample: Option<Counterexample>,
}

/// Compares the moduli of matrix elements of `Θ` and of the transformed
/// operator in the configuration basis and in `trials` Haar-random
/// orthonormal bases drawn from `seed`. Stops at the first failing basis.
pub fn check_wigner(
    v: &SymmetryCandidate,
    theta: &EvolutionOperator,
    trials: usize,
    seed: u64,
    tol: Tolerance,
) -> Result<WignerVerdict> {
    require_same_dim(v, theta)?;
    if trials == 0 {
        return Err(Error::InvalidArgument(
            "at least one trial is required".into(),
        ));
    }
    let n = theta.dim();
    let t = theta.matrix();
    let transformed = v.transform(t);
    let mut rng = seeded(seed, 0);
    let mut max_violation = 0.0f64;
    for trial in 0..=trials {
        let basis = if trial == 0 {
            CMatrix::identity(n)
        } else {
            haar_unitary(&mut rng, n)
        };
        let in_basis = |m: &CMatrix| &(&basis.adjoint() * m) * &basis;
        let violation = modulus_violation(&in_basis(&transformed), &in_basis(t));
        max_violation = max_violation.max(violation);
        if violation > tol.alg() {
            return Ok(WignerVerdict {
                holds: false,
                bases_tested: trial + 1,
                max_violation,
                counterexample: Some(Counterexample {
                    trial,
                    basis,
                    violation,
                }),
            });
        }
    }
    Ok(WignerVerdict {
        holds: true,
        bases_tested: trials + 1,
        max_violation,
        counterexample: None,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct NoetherReport {
    /// `max_t |⟨G(t)⟩ − ⟨G(0)⟩|`.
    pub max_drift: f64,
    /// `max_t ‖[G, U(t)]‖` (largest entry).
    pub max_commutator: f64,
    /// Whether `[G, U(t)] = 0` to `τ_alg` at every time. When false, any
    /// drift reflects genuine dynamics rather than a broken conservation law.
    pub commutes: bool,
    pub expectations: Vec<f64>,
}

/// Tracks `⟨G(t)⟩ = tr(G U ρ(0) U†)` over `times`.
pub fn noether_check(
    g: &CMatrix,
    fam: &UnitaryFamily,
    rho0: &DensityMatrix,
    times: &[f64],
    tol: Tolerance,
) -> Result<NoetherReport> {
    let check = is_self_adjoint(g, tol.alg())?;
    if !check.holds {
        return Err(Error::invalid(format!(
            "generator is not self-adjoint (deviation {:.3e})",
            check.deviation
        )));
    }
    if g.rows() != fam.dim() || rho0.dim() != fam.dim() {
        return Err(Error::dim(
            "generator, family and state must share a dimension",
        ));
    }
    let initial = (g * rho0.matrix()).trace().re;
    let mut max_drift = 0.0f64;
    let mut max_commutator = 0.0f64;
    let mut expectations = Vec::with_capacity(times.len());
    for &t in times {
        let u = fam.at(t)?;
        max_commutator = max_commutator.max(CMatrix::commutator(g, &u).max_abs());
        let rho_t = &(&u * rho0.matrix()) * &u.adjoint();
        let value = (g * &rho_t).trace().re;
        max_drift = max_drift.max((value - initial).abs());
        expectations.push(value);
    }
    Ok(NoetherReport {
        max_drift,
        max_commutator,
        commutes: max_commutator <= tol.alg(),
        expectations,
    })
}

/// An involutive symmetry `V² = 1` is self-adjoint and serves directly as a
/// conserved observable.
pub fn involution_generator(v: &SymmetryCandidate, tol: Tolerance) -> Result<CMatrix> {
    let m = v.matrix();
    let dev = (m * m).max_abs_diff(&CMatrix::identity(v.dim()));
    if dev > tol.alg() {
        return Err(Error::invalid(format!(
            "V² differs from the identity by {dev:.3e}"
        )));
    }
    Ok(m.clone())
}
