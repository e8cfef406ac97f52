//! Unitary evolution families, Hamiltonians, and numerical checks of the
//! Schrödinger, von Neumann, Ehrenfest and Heisenberg equations.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::correspondence::{Beable, DensityMatrix, EvolutionOperator, StateVector};
use crate::error::{Error, Result};
use crate::matrix::{CMatrix, C64, I};
use crate::tolerance::Tolerance;
use crate::validate::{is_self_adjoint, is_unitary};

/// Default fixed integration step.
pub const DEFAULT_DT: f64 = 1e-3;

/// Default central-difference step.
pub const DEFAULT_H_STEP: f64 = 1e-5;

pub(crate) type MatrixFn = Arc<dyn Fn(f64) -> CMatrix + Send + Sync>;
type ValuesFn = Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>;

fn check_hbar(hbar: f64) -> Result<()> {
    if hbar > 0.0 && hbar.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "hbar must be positive, got {hbar}"
        )))
    }
}

pub(crate) fn check_step(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "step must be positive, got {h}"
        )))
    }
}

fn check_shape(m: &CMatrix, n: usize, what: &str) -> Result<()> {
    if m.shape() == (n, n) {
        Ok(())
    } else {
        Err(Error::dim(format!(
            "{what} is {}x{}, expected {n}x{n}",
            m.rows(),
            m.cols()
        )))
    }
}

/// A map `t ↦ U(t←0)` into unitary matrices with `U(0) = 1`.
#[derive(Clone)]
pub struct UnitaryFamily {
    dim: usize,
    hbar: f64,
    eval: MatrixFn,
    tol: Tolerance,
}

impl fmt::Debug for UnitaryFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UnitaryFamily")
            .field("dim", &self.dim)
            .field("hbar", &self.hbar)
            .finish_non_exhaustive()
    }
}

impl UnitaryFamily {
    /// `eval` must be a pure function of time. Unitarity is checked at
    /// every query; continuity at 0 is checked here.
    pub fn from_fn(
        dim: usize,
        eval: impl Fn(f64) -> CMatrix + Send + Sync + 'static,
        tol: Tolerance,
    ) -> Result<Self> {
        let fam = Self {
            dim,
            hbar: 1.0,
            eval: Arc::new(eval),
            tol,
        };
        let u0 = fam.at(0.0)?;
        let dev = u0.max_abs_diff(&CMatrix::identity(dim));
        if dev > tol.alg() {
            return Err(Error::invalid(format!(
                "U(0) differs from the identity by {dev:.3e}"
            )));
        }
        Ok(fam)
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            hbar: 1.0,
            eval: Arc::new(move |_| CMatrix::identity(dim)),
            tol: Tolerance::default(),
        }
    }

    pub fn with_hbar(mut self, hbar: f64) -> Result<Self> {
        check_hbar(hbar)?;
        self.hbar = hbar;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// `U(t←0)`, validated.
    pub fn at(&self, t: f64) -> Result<CMatrix> {
        let u = (self.eval)(t);
        check_shape(&u, self.dim, "family member")?;
        let check = is_unitary(&u, self.tol.alg())?;
        if !check.holds {
            return Err(Error::invalid(format!(
                "U({t}) is not unitary (deviation {:.3e})",
                check.deviation
            )));
        }
        Ok(u)
    }

    pub fn evolution_operator(&self, t: f64) -> Result<EvolutionOperator> {
        Ok(EvolutionOperator::from_trusted(self.at(t)?).at(t))
    }
}

/// A map `t ↦ H(t)` into self-adjoint matrices.
#[derive(Clone)]
pub struct Hamiltonian {
    dim: usize,
    hbar: f64,
    eval: MatrixFn,
    constant: Option<CMatrix>,
    tol: Tolerance,
}

impl fmt::Debug for Hamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Hamiltonian")
            .field("dim", &self.dim)
            .field("hbar", &self.hbar)
            .field("constant", &self.constant)
            .finish_non_exhaustive()
    }
}

impl Hamiltonian {
    pub fn constant(h: CMatrix, tol: Tolerance) -> Result<Self> {
        let dim = h.square_dim()?;
        let check = is_self_adjoint(&h, tol.alg())?;
        if !check.holds {
            return Err(Error::invalid(format!(
                "Hamiltonian is not self-adjoint (deviation {:.3e})",
                check.deviation
            )));
        }
        let stored = h.clone();
        Ok(Self {
            dim,
            hbar: 1.0,
            eval: Arc::new(move |_| stored.clone()),
            constant: Some(h),
            tol,
        })
    }

    pub fn from_fn(
        dim: usize,
        eval: impl Fn(f64) -> CMatrix + Send + Sync + 'static,
        tol: Tolerance,
    ) -> Self {
        Self {
            dim,
            hbar: 1.0,
            eval: Arc::new(eval),
            constant: None,
            tol,
        }
    }

    pub fn with_hbar(mut self, hbar: f64) -> Result<Self> {
        check_hbar(hbar)?;
        self.hbar = hbar;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn as_constant(&self) -> Option<&CMatrix> {
        self.constant.as_ref()
    }

    /// `H(t)`, validated.
    pub fn at(&self, t: f64) -> Result<CMatrix> {
        let h = (self.eval)(t);
        check_shape(&h, self.dim, "Hamiltonian")?;
        let check = is_self_adjoint(&h, self.tol.alg())?;
        if !check.holds {
            return Err(Error::invalid(format!(
                "H({t}) is not self-adjoint (deviation {:.3e})",
                check.deviation
            )));
        }
        Ok(h)
    }

    /// The generator `−(i/ħ) H(t)` of the Schrödinger flow, unvalidated.
    fn generator(&self, t: f64) -> CMatrix {
        (self.eval)(t).scale(-I / self.hbar)
    }
}

/// A beable whose values may depend explicitly on time.
#[derive(Clone)]
pub struct BeableFamily {
    dim: usize,
    eval: ValuesFn,
}

impl fmt::Debug for BeableFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BeableFamily")
            .field("dim", &self.dim)
            .finish_non_exhaustive()
    }
}

impl BeableFamily {
    pub fn constant(a: Beable) -> Self {
        let values = a.values().to_vec();
        Self {
            dim: values.len(),
            eval: Arc::new(move |_| values.clone()),
        }
    }

    pub fn from_fn(dim: usize, eval: impl Fn(f64) -> Vec<f64> + Send + Sync + 'static) -> Self {
        Self {
            dim,
            eval: Arc::new(eval),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn at(&self, t: f64) -> Result<Beable> {
        let values = (self.eval)(t);
        if values.len() != self.dim {
            return Err(Error::dim(format!(
                "beable returned {} values, expected {}",
                values.len(),
                self.dim
            )));
        }
        Ok(Beable::new(values)?.at(t))
    }

    /// `∂a_i/∂t` by central difference.
    pub fn rate(&self, t: f64, h: f64) -> Result<Vec<f64>> {
        let plus = self.at(t + h)?;
        let minus = self.at(t - h)?;
        Ok(plus
            .values()
            .iter()
            .zip(minus.values())
            .map(|(p, m)| (p - m) / (2.0 * h))
            .collect())
    }

    fn matrix(&self, t: f64) -> Result<CMatrix> {
        Ok(CMatrix::from_real_diagonal(self.at(t)?.values()))
    }
}

/// `U(t) = exp(−iHt/ħ)` from the eigendecomposition of a constant `H`.
pub fn family_from_constant_h(h: &CMatrix, hbar: f64, tol: Tolerance) -> Result<UnitaryFamily> {
    check_hbar(hbar)?;
    let dim = h.square_dim()?;
    let check = is_self_adjoint(h, tol.alg())?;
    if !check.holds {
        return Err(Error::invalid(format!(
            "Hamiltonian is not self-adjoint (deviation {:.3e})",
            check.deviation
        )));
    }
    let (energies, vectors) = h.hermitian_eigen()?;
    let vectors_adj = vectors.adjoint();
    let eval = move |t: f64| {
        let phases: Vec<C64> = energies
            .iter()
            .map(|e| C64::from_polar(1.0, -e * t / hbar))
            .collect();
        &(&vectors * &CMatrix::from_diagonal(&phases)) * &vectors_adj
    };
    UnitaryFamily::from_fn(dim, eval, tol)?.with_hbar(hbar)
}

/// `H(t) = iħ (∂U/∂t) U†` with a central difference, symmetrized.
pub fn extract_hamiltonian(fam: &UnitaryFamily, t: f64, h_step: f64) -> Result<CMatrix> {
    check_step(h_step)?;
    let du = (fam.at(t + h_step)? - fam.at(t - h_step)?).scale_re(0.5 / h_step);
    let u = fam.at(t)?;
    Ok((&du * &u.adjoint()).scale(I * fam.hbar()).hermitian_part())
}

/// Classical fourth-order Runge-Kutta from `t0` to `t1` in `steps` equal
/// steps. Works in either time direction.
fn rk4(
    f: impl Fn(f64, &CMatrix) -> CMatrix,
    y0: CMatrix,
    t0: f64,
    t1: f64,
    steps: usize,
) -> CMatrix {
    let h = (t1 - t0) / steps as f64;
    let mut y = y0;
    for k in 0..steps {
        let t = t0 + k as f64 * h;
        let k1 = f(t, &y);
        let k2 = f(t + 0.5 * h, &(&y + &k1.scale_re(0.5 * h)));
        let k3 = f(t + 0.5 * h, &(&y + &k2.scale_re(0.5 * h)));
        let k4 = f(t + h, &(&y + &k3.scale_re(h)));
        let incr = &(&k1 + &k4) + &(&k2 + &k3).scale_re(2.0);
        y = &y + &incr.scale_re(h / 6.0);
    }
    y
}

fn steps_for(span: f64, dt: f64) -> usize {
    ((span.abs() / dt).ceil() as usize).max(1)
}

fn check_span(t_end: f64, dt: f64) -> Result<()> {
    check_step(dt)?;
    if !(t_end.is_finite() && dt <= t_end) {
        return Err(Error::InvalidArgument(format!(
            "step {dt} must not exceed the end time {t_end}"
        )));
    }
    Ok(())
}

/// Result of a fixed-step integration.
#[derive(Debug, Clone, Serialize)]
pub struct Integrated<T> {
    pub state: T,
    pub steps: usize,
    /// Deviation of the conserved quantity (norm or trace) from 1 before
    /// renormalization.
    pub drift: f64,
}

fn schrodinger_rhs(h: &Hamiltonian) -> impl Fn(f64, &CMatrix) -> CMatrix + '_ {
    move |t, psi| &h.generator(t) * psi
}

fn von_neumann_rhs(h: &Hamiltonian) -> impl Fn(f64, &CMatrix) -> CMatrix + '_ {
    move |t, rho| {
        let g = h.generator(t);
        &(&g * rho) - &(rho * &g)
    }
}

/// Integrates `iħ ∂Ψ/∂t = H(t)Ψ` from 0 to `t_end`.
pub fn integrate_schrodinger(
    h: &Hamiltonian,
    psi0: &StateVector,
    t_end: f64,
    dt: f64,
    tol: Tolerance,
) -> Result<Integrated<StateVector>> {
    check_span(t_end, dt)?;
    if psi0.dim() != h.dim() {
        return Err(Error::dim(format!(
            "state of size {} with Hamiltonian of size {}",
            psi0.dim(),
            h.dim()
        )));
    }
    h.at(0.0)?;
    h.at(t_end)?;
    let steps = steps_for(t_end, dt);
    let y0 = CMatrix::from_columns(&[psi0.to_vec()])?;
    let y = rk4(schrodinger_rhs(h), y0, 0.0, t_end, steps);
    let psi = y.column(0);
    let drift = (crate::correspondence::norm(&psi) - 1.0).abs();
    if drift > tol.int() {
        return Err(Error::invalid(format!(
            "norm drifted by {drift:.3e}; use a smaller step"
        )));
    }
    Ok(Integrated {
        state: StateVector::normalized(psi)?,
        steps,
        drift,
    })
}

/// Integrates `iħ ∂ρ/∂t = [H(t), ρ]` from 0 to `t_end`.
pub fn integrate_von_neumann(
    h: &Hamiltonian,
    rho0: &DensityMatrix,
    t_end: f64,
    dt: f64,
    tol: Tolerance,
) -> Result<Integrated<DensityMatrix>> {
    check_span(t_end, dt)?;
    if rho0.dim() != h.dim() {
        return Err(Error::dim(format!(
            "density matrix of size {} with Hamiltonian of size {}",
            rho0.dim(),
            h.dim()
        )));
    }
    h.at(0.0)?;
    h.at(t_end)?;
    let steps = steps_for(t_end, dt);
    let rho = rk4(von_neumann_rhs(h), rho0.matrix().clone(), 0.0, t_end, steps);
    let tr = rho.trace();
    let drift = (tr - C64::new(1.0, 0.0))
        .norm()
        .max(rho.max_abs_diff(&rho.adjoint()));
    if drift > tol.int() {
        return Err(Error::invalid(format!(
            "trace or self-adjointness drifted by {drift:.3e}; use a smaller step"
        )));
    }
    let loose = Tolerance::new(tol.int(), tol.int())?;
    let state = DensityMatrix::new(rho.hermitian_part().scale_re(1.0 / tr.re), loose)?;
    Ok(Integrated {
        state,
        steps,
        drift,
    })
}

/// Density matrices at `t − h`, `t`, `t + h`. The base integration runs to
/// `t − h` and the last two points follow by single steps of size `h`, so
/// integration error is common to all three and cancels in differences.
fn density_stencil(h: &Hamiltonian, rho0: &DensityMatrix, t: f64, h_step: f64) -> [CMatrix; 3] {
    let rhs = von_neumann_rhs(h);
    let start = t - h_step;
    let before = rk4(
        &rhs,
        rho0.matrix().clone(),
        0.0,
        start,
        steps_for(start, DEFAULT_DT),
    );
    let now = rk4(&rhs, before.clone(), start, t, 1);
    let after = rk4(&rhs, now.clone(), t, t + h_step, 1);
    [before, now, after]
}

fn real_trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    (a * b).trace().re
}

#[derive(Debug, Clone, Serialize)]
pub struct EhrenfestReport {
    /// `d⟨A⟩/dt` by central difference.
    pub lhs: f64,
    /// `⟨(i/ħ)[H, A]⟩ + ⟨∂A/∂t⟩`.
    pub rhs: f64,
    pub residual: f64,
}

/// Compares the rate of change of `⟨A⟩` with the commutator formula at
/// time `t`, evolving `ρ0` under `h`.
pub fn check_ehrenfest(
    h: &Hamiltonian,
    a: &BeableFamily,
    rho0: &DensityMatrix,
    t: f64,
    h_step: f64,
) -> Result<EhrenfestReport> {
    check_step(h_step)?;
    if a.dim() != h.dim() || rho0.dim() != h.dim() {
        return Err(Error::dim(
            "beable, state and Hamiltonian must share a dimension",
        ));
    }
    let [before, now, after] = density_stencil(h, rho0, t, h_step);
    let expect =
        |rho: &CMatrix, s: f64| -> Result<f64> { Ok(real_trace_product(&a.matrix(s)?, rho)) };
    let lhs = (expect(&after, t + h_step)? - expect(&before, t - h_step)?) / (2.0 * h_step);
    let ham = h.at(t)?;
    let am = a.matrix(t)?;
    let comm = CMatrix::commutator(&ham, &am).scale(I / h.hbar());
    let rate = CMatrix::from_real_diagonal(&a.rate(t, h_step)?);
    let rhs = real_trace_product(&comm, &now) + real_trace_product(&rate, &now);
    Ok(EhrenfestReport {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct HeisenbergReport {
    /// `dA^H/dt` by central difference.
    pub derivative: CMatrix,
    /// `(i/ħ)[H^H, A^H] + (∂A/∂t)^H`.
    pub rhs: CMatrix,
    /// Frobenius norm of the difference.
    pub residual: f64,
}

/// Checks the Heisenberg equation of motion at `t`, with `A^H = U†AU` and
/// `H^H = U†HU`. The family should be the one generated by `h`.
pub fn check_heisenberg_eom(
    h: &Hamiltonian,
    a: &BeableFamily,
    fam: &UnitaryFamily,
    t: f64,
    h_step: f64,
) -> Result<HeisenbergReport> {
    check_step(h_step)?;
    if a.dim() != h.dim() || fam.dim() != h.dim() {
        return Err(Error::dim(
            "beable, family and Hamiltonian must share a dimension",
        ));
    }
    let heis = |m: &CMatrix, u: &CMatrix| &(&u.adjoint() * m) * u;
    let plus = heis(&a.matrix(t + h_step)?, &fam.at(t + h_step)?);
    let minus = heis(&a.matrix(t - h_step)?, &fam.at(t - h_step)?);
    let derivative = (plus - minus).scale_re(0.5 / h_step);
    let u = fam.at(t)?;
    let h_heis = heis(&h.at(t)?, &u);
    let a_heis = heis(&a.matrix(t)?, &u);
    let rate = heis(&CMatrix::from_real_diagonal(&a.rate(t, h_step)?), &u);
    let rhs = &CMatrix::commutator(&h_heis, &a_heis).scale(I / h.hbar()) + &rate;
    let residual = (&derivative - &rhs).frobenius_norm();
    Ok(HeisenbergReport {
        derivative,
        rhs,
        residual,
    })
}
