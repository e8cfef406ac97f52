//! Execution of individual scenario tasks.

use rand::Rng;
use serde_json::{json, Value};
use unistoch_core::algebra::tensor_factorization_error;
use unistoch_core::correspondence::{
    born_rule, dictionary_rhs, evolve_density, gamma_from_theta, initial_density, DensityMatrix,
};
use unistoch_core::dilation::{
    apply_conjugation_real, blockwise_gauge, dilate_trivial, gamma_from_kraus,
    kraus_identity_error, realify, reconstruct_gamma, stinespring_unitary,
};
use unistoch_core::dynamics::{
    check_ehrenfest, check_heisenberg_eom, integrate_schrodinger, integrate_von_neumann,
    BeableFamily,
};
use unistoch_core::gauge::{check_covariant_derivative, fw_gauge, sh_gauge, transform_hamiltonian};
use unistoch_core::sample::{haar_unitary, seeded};
use unistoch_core::stochastic::{
    is_divisible_at, propagate, stochastic_deviation, stochastic_inverse_classify,
};
use unistoch_core::symmetry::{
    check_antiunitary_form, check_dynamical_symmetry, check_wigner, noether_check, KindHint,
    SymmetryCandidate,
};
use unistoch_core::validate::{is_projector, is_psd, is_self_adjoint, is_unitary};
use unistoch_core::{
    configuration_pvm, CMatrix, EvolutionOperator, RMatrix, StateVector, Tolerance,
};

use crate::error::{CliError, CliResult};
use crate::objects::Registry;
use crate::scenario::{CheckKind, HintSpec, MatrixRef, Task};

/// What a task produced: an optional verdict and its result payload.
pub struct Outcome {
    pub verdict: Option<bool>,
    pub result: Value,
}

impl Outcome {
    fn verdict(holds: bool, result: Value) -> Self {
        Outcome {
            verdict: Some(holds),
            result,
        }
    }

    fn plain(result: Value) -> Self {
        Outcome {
            verdict: None,
            result,
        }
    }
}

pub struct TaskContext<'a> {
    pub registry: &'a Registry,
    pub tol: Tolerance,
    pub seed: u64,
    pub index: usize,
}

impl TaskContext<'_> {
    fn loc(&self, task: &Task) -> String {
        format!("task {} ({})", self.index, task.kind())
    }
}

/// Finite-difference checks are held to the truncation bound plus the
/// integration tolerance.
fn fd_bound(h_step: f64, tol: Tolerance) -> f64 {
    10.0 * h_step * h_step + tol.int()
}

fn real_part(m: &CMatrix, tol: Tolerance, loc: &str) -> CliResult<RMatrix> {
    let (re, im) = m.split();
    let worst = im.to_row_major().iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if worst > tol.alg() {
        return Err(CliError::validation(
            loc,
            format!("expected a real matrix, imaginary part {worst:.3e}"),
        ));
    }
    Ok(re)
}

fn max_abs(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

/// Checks that every object the task names exists with the right kind.
pub fn check_references(task: &Task, registry: &Registry, loc: &str) -> CliResult<()> {
    let matrices: Vec<&MatrixRef> = match task {
        Task::GammaFromTheta { theta }
        | Task::Dictionary { theta }
        | Task::Evolve { theta, .. }
        | Task::ShGauge { theta, .. }
        | Task::Dilate { theta, .. } => vec![theta],
        Task::Validate { matrix, .. } | Task::Realify { matrix } => vec![matrix],
        Task::FwGauge {
            theta, observables, ..
        } => std::iter::once(theta).chain(observables).collect(),
        Task::TransformHamiltonian { expected, .. } => expected.iter().collect(),
        Task::Symmetry {
            theta, candidate, ..
        } => vec![theta, candidate],
        Task::Noether { generator, .. } => vec![generator],
        _ => Vec::new(),
    };
    for m in matrices {
        registry.matrix(m, loc)?;
    }
    let named: Vec<(&str, &str)> = match task {
        Task::Evolve { initial, .. } => vec![(initial, "distribution")],
        Task::Integrate {
            hamiltonian,
            state,
            density,
            ..
        } => {
            let mut v = vec![(hamiltonian.as_str(), "hamiltonian")];
            v.extend(state.as_deref().map(|s| (s, "state")));
            v.extend(density.as_deref().map(|d| (d, "density")));
            v
        }
        Task::Divisibility { process, .. } | Task::InverseClass { process, .. } => {
            vec![(process, "process")]
        }
        Task::ShGauge { phases, .. } => vec![(phases, "phases")],
        Task::FwGauge {
            density,
            state,
            transform,
            ..
        } => {
            let mut v = vec![
                (density.as_str(), "density"),
                (transform.as_str(), "transform"),
            ];
            v.extend(state.as_deref().map(|s| (s, "state")));
            v
        }
        Task::TransformHamiltonian {
            hamiltonian,
            transform,
            ..
        } => vec![(hamiltonian, "hamiltonian"), (transform, "transform")],
        Task::Covariant {
            hamiltonian,
            transform,
            state,
            ..
        } => vec![
            (hamiltonian, "hamiltonian"),
            (transform, "transform"),
            (state, "state"),
        ],
        Task::Ehrenfest {
            hamiltonian,
            beable,
            density,
            ..
        } => vec![
            (hamiltonian, "hamiltonian"),
            (beable, "beable"),
            (density, "density"),
        ],
        Task::Noether {
            hamiltonian,
            density,
            ..
        } => vec![(hamiltonian, "hamiltonian"), (density, "density")],
        Task::KrausGamma { kraus } | Task::Stinespring { kraus } => vec![(kraus, "kraus")],
        _ => Vec::new(),
    };
    for (name, kind) in named {
        registry.expect_kind(name, kind, loc)?;
    }
    Ok(())
}

pub fn run_task(task: &Task, ctx: &TaskContext) -> CliResult<Outcome> {
    let loc = ctx.loc(task);
    let tol = ctx.tol;
    let reg = ctx.registry;
    let core = |e| CliError::from_core(loc.clone(), e);
    let theta_of = |r: &MatrixRef| -> CliResult<EvolutionOperator> {
        EvolutionOperator::new(reg.matrix(r, &loc)?, tol)
            .map_err(|e| CliError::from_core(loc.clone(), e))
    };
    let mut rng = seeded(ctx.seed, ctx.index as u64);

    Ok(match task {
        Task::GammaFromTheta { theta } => {
            let gamma = gamma_from_theta(&theta_of(theta)?);
            Outcome::plain(json!({ "gamma": gamma.matrix() }))
        }
        Task::Validate { matrix, check } => {
            let m = reg.matrix(matrix, &loc)?;
            let (holds, deviation, detail) = match check {
                CheckKind::Unitary => split(is_unitary(&m, tol.alg()).map_err(core)?),
                CheckKind::SelfAdjoint => split(is_self_adjoint(&m, tol.alg()).map_err(core)?),
                CheckKind::Psd => split(is_psd(&m, tol.alg()).map_err(core)?),
                CheckKind::Projector => split(is_projector(&m, tol.alg()).map_err(core)?),
                CheckKind::Density => match DensityMatrix::new(m, tol) {
                    Ok(_) => (true, 0.0, None),
                    Err(e) => (false, f64::NAN, Some(e.to_string())),
                },
                CheckKind::Stochastic => {
                    let r = real_part(&m, tol, &loc)?;
                    let (min, col) = stochastic_deviation(&r);
                    let dev = col.max(-min).max(0.0);
                    (dev <= tol.alg(), dev, None)
                }
            };
            Outcome::verdict(
                holds,
                json!({ "check": check, "holds": holds, "deviation": deviation, "detail": detail }),
            )
        }
        Task::Dictionary { theta } => {
            let theta = theta_of(theta)?;
            let pvm = configuration_pvm(theta.dim()).map_err(core)?;
            let n = theta.dim();
            let mut worst = 0.0f64;
            for i in 0..n {
                for j in 0..n {
                    let rhs = dictionary_rhs(&theta, &pvm, i, j).map_err(core)?;
                    worst = worst.max((rhs - theta.matrix()[(i, j)].norm_sqr()).abs());
                }
            }
            let gamma = gamma_from_theta(&theta);
            Outcome::verdict(
                worst <= tol.alg(),
                json!({ "gamma": gamma.matrix(), "max_deviation": worst }),
            )
        }
        Task::Evolve { theta, initial } => {
            let theta = theta_of(theta)?;
            let p0 = reg.distribution(initial, &loc)?;
            let gamma = gamma_from_theta(&theta);
            let p = propagate(&gamma, p0, tol).map_err(core)?;
            let rho = evolve_density(&initial_density(p0), &theta, tol).map_err(core)?;
            let pvm = configuration_pvm(theta.dim()).map_err(core)?;
            let born = (0..theta.dim())
                .map(|i| born_rule(&rho, &pvm, i))
                .collect::<unistoch_core::Result<Vec<f64>>>()
                .map_err(core)?;
            let dev = max_abs(born.iter().zip(p.values()).map(|(a, b)| (a - b).abs()));
            Outcome::verdict(
                dev <= tol.alg(),
                json!({
                    "gamma": gamma.matrix(),
                    "distribution": p,
                    "density": rho.matrix(),
                    "born": born,
                    "max_deviation": dev,
                }),
            )
        }
        Task::Integrate {
            hamiltonian,
            state,
            density,
            t_end,
            dt,
        } => {
            let (h, family) = reg.hamiltonian(hamiltonian, &loc)?;
            let exact = family.at(*t_end).map_err(core)?;
            match (state, density) {
                (Some(s), None) => {
                    let psi0 = reg.state(s, &loc)?;
                    let out = integrate_schrodinger(h, psi0, *t_end, *dt, tol).map_err(core)?;
                    let want =
                        StateVector::normalized(exact.mul_vec(psi0.components()).map_err(core)?)
                            .map_err(core)?;
                    let dev = max_abs(
                        out.state
                            .components()
                            .iter()
                            .zip(want.components())
                            .map(|(a, b)| (a - b).norm()),
                    );
                    Outcome::verdict(
                        dev <= tol.int(),
                        json!({
                            "state": out.state,
                            "steps": out.steps,
                            "norm_drift": out.drift,
                            "max_deviation_from_exact": dev,
                        }),
                    )
                }
                (None, Some(d)) => {
                    let rho0 = reg.density(d, &loc)?;
                    let out = integrate_von_neumann(h, rho0, *t_end, *dt, tol).map_err(core)?;
                    let want = &(&exact * rho0.matrix()) * &exact.adjoint();
                    let dev = out.state.matrix().max_abs_diff(&want);
                    Outcome::verdict(
                        dev <= tol.int(),
                        json!({
                            "density": out.state.matrix(),
                            "steps": out.steps,
                            "trace_drift": out.drift,
                            "max_deviation_from_exact": dev,
                        }),
                    )
                }
                _ => {
                    return Err(CliError::validation(
                        loc,
                        "give exactly one of `state` or `density`",
                    ))
                }
            }
        }
        Task::Divisibility {
            process,
            t,
            t_prime,
        } => {
            let report =
                is_divisible_at(reg.process(process, &loc)?, *t, *t_prime, tol).map_err(core)?;
            Outcome::verdict(report.is_stochastic, json!(report))
        }
        Task::InverseClass { process, t } => {
            let gamma = reg.process(process, &loc)?.sample_at(*t).map_err(core)?;
            let class = stochastic_inverse_classify(gamma.matrix(), tol).map_err(core)?;
            Outcome::plain(json!(class))
        }
        Task::ShGauge { theta, phases } => {
            let theta = theta_of(theta)?;
            let gauged = sh_gauge(&theta, reg.phases(phases, &loc)?).map_err(core)?;
            let before = gamma_from_theta(&theta);
            let after = gamma_from_theta(&gauged);
            let dev = before.matrix().max_abs_diff(after.matrix());
            let unitarity = is_unitary(gauged.matrix(), tol.alg())
                .map_err(core)?
                .deviation;
            Outcome::verdict(
                dev <= tol.alg(),
                json!({
                    "theta": gauged.matrix(),
                    "gamma": after.matrix(),
                    "max_gamma_deviation": dev,
                    "unitarity_deviation": unitarity,
                }),
            )
        }
        Task::FwGauge {
            theta,
            density,
            observables,
            state,
            transform,
            t,
        } => {
            let theta = theta_of(theta)?.at(*t);
            let obs = observables
                .iter()
                .map(|o| reg.matrix(o, &loc))
                .collect::<CliResult<Vec<_>>>()?;
            let psi = state.as_deref().map(|s| reg.state(s, &loc)).transpose()?;
            let bundle = fw_gauge(
                &theta,
                reg.density(density, &loc)?,
                &obs,
                psi,
                reg.transform(transform, &loc)?,
                *t,
                tol,
            )
            .map_err(core)?;
            Outcome::verdict(bundle.holds, json!(bundle))
        }
        Task::TransformHamiltonian {
            hamiltonian,
            transform,
            t,
            h_step,
            expected,
        } => {
            let (h, _) = reg.hamiltonian(hamiltonian, &loc)?;
            let h_v = transform_hamiltonian(h, reg.transform(transform, &loc)?, *t, *h_step)
                .map_err(core)?;
            let hermiticity = h_v.max_abs_diff(&h_v.adjoint());
            match expected {
                Some(e) => {
                    let e = reg.matrix(e, &loc)?;
                    if e.shape() != h_v.shape() {
                        return Err(CliError::validation(
                            loc,
                            "expected matrix has the wrong size",
                        ));
                    }
                    let dev = h_v.max_abs_diff(&e);
                    Outcome::verdict(
                        dev <= fd_bound(*h_step, tol),
                        json!({ "h_v": h_v, "hermiticity_deviation": hermiticity, "max_deviation": dev }),
                    )
                }
                None => Outcome::plain(json!({ "h_v": h_v, "hermiticity_deviation": hermiticity })),
            }
        }
        Task::Covariant {
            hamiltonian,
            transform,
            state,
            t,
            h_step,
        } => {
            let (h, _) = reg.hamiltonian(hamiltonian, &loc)?;
            let report = check_covariant_derivative(
                h,
                reg.transform(transform, &loc)?,
                reg.state(state, &loc)?,
                *t,
                *h_step,
            )
            .map_err(core)?;
            Outcome::verdict(report.residual <= fd_bound(*h_step, tol), json!(report))
        }
        Task::Ehrenfest {
            hamiltonian,
            beable,
            density,
            t,
            h_step,
        } => {
            let (h, family) = reg.hamiltonian(hamiltonian, &loc)?;
            let a = BeableFamily::constant(reg.beable(beable, &loc)?.clone());
            let rho0 = reg.density(density, &loc)?;
            let ehrenfest = check_ehrenfest(h, &a, rho0, *t, *h_step).map_err(core)?;
            let heisenberg = check_heisenberg_eom(h, &a, family, *t, *h_step).map_err(core)?;
            let bound = fd_bound(*h_step, tol);
            Outcome::verdict(
                ehrenfest.residual <= bound && heisenberg.residual <= bound,
                json!({ "ehrenfest": ehrenfest, "heisenberg": heisenberg, "bound": bound }),
            )
        }
        Task::Symmetry {
            theta,
            candidate,
            hint,
            wigner_trials,
        } => {
            let theta = theta_of(theta)?;
            let hint = match hint {
                HintSpec::Unknown => KindHint::Unknown,
                HintSpec::Unitary => KindHint::Unitary,
                HintSpec::AntiUnitary => KindHint::AntiUnitary,
            };
            let v =
                SymmetryCandidate::new(reg.matrix(candidate, &loc)?, hint, tol).map_err(core)?;
            let verdict = check_dynamical_symmetry(&v, &theta, tol).map_err(core)?;
            let anti = (hint == KindHint::AntiUnitary)
                .then(|| check_antiunitary_form(&v, &theta, tol))
                .transpose()
                .map_err(core)?;
            let wigner = if *wigner_trials > 0 {
                let seed: u64 = rng.random();
                Some(check_wigner(&v, &theta, *wigner_trials, seed, tol).map_err(core)?)
            } else {
                None
            };
            let holds = verdict.holds
                && anti.as_ref().is_none_or(|c| c.holds)
                && wigner.as_ref().is_none_or(|w| w.holds);
            Outcome::verdict(
                holds,
                json!({
                    "dynamical": verdict,
                    "antiunitary_form": anti.map(|c| json!({ "holds": c.holds, "deviation": c.deviation })),
                    "wigner": wigner,
                }),
            )
        }
        Task::Noether {
            generator,
            hamiltonian,
            density,
            times,
        } => {
            let g = reg.matrix(generator, &loc)?;
            let (_, family) = reg.hamiltonian(hamiltonian, &loc)?;
            let report =
                noether_check(&g, family, reg.density(density, &loc)?, times, tol).map_err(core)?;
            let holds = report.commutes && report.max_drift <= 10.0 * tol.alg();
            Outcome::verdict(holds, json!(report))
        }
        Task::KrausGamma { kraus } => {
            let ks = reg.kraus(kraus, &loc)?;
            let pvm = configuration_pvm(ks.dim()).map_err(core)?;
            let gamma = gamma_from_kraus(ks, &pvm, tol).map_err(core)?;
            let err = kraus_identity_error(ks.operators());
            Outcome::verdict(
                err <= tol.alg(),
                json!({ "gamma": gamma.matrix(), "identity_error": err }),
            )
        }
        Task::Dilate {
            theta,
            internal_dim,
            gamma_index,
            blockwise_random,
        } => {
            let theta = theta_of(theta)?;
            let pvm = configuration_pvm(*internal_dim).map_err(core)?;
            let ds = dilate_trivial(&theta, *internal_dim, pvm, *gamma_index, tol).map_err(core)?;
            let gamma = reconstruct_gamma(&ds, tol).map_err(core)?;
            let dev = gamma
                .matrix()
                .max_abs_diff(&theta.matrix().modulus_squared());
            let mut holds = dev <= tol.alg();
            let blockwise = if *blockwise_random {
                let n = theta.dim();
                let blocks: Vec<CMatrix> = (0..n * n)
                    .map(|_| haar_unitary(&mut rng, *internal_dim))
                    .collect();
                let moved = blockwise_gauge(&ds, &blocks, tol).map_err(core)?;
                let after = reconstruct_gamma(&moved, tol).map_err(core)?;
                let inv = after.matrix().max_abs_diff(gamma.matrix());
                let fact = tensor_factorization_error(moved.evolution(), n, *internal_dim)
                    .map_err(core)?;
                holds &= inv <= tol.alg();
                Some(json!({
                    "dilated": moved,
                    "gamma": after.matrix(),
                    "max_gamma_deviation": inv,
                    "factorization_error": fact,
                }))
            } else {
                None
            };
            Outcome::verdict(
                holds,
                json!({
                    "dilated": ds,
                    "gamma": gamma.matrix(),
                    "max_deviation": dev,
                    "blockwise": blockwise,
                }),
            )
        }
        Task::Stinespring { kraus } => {
            let ks = reg.kraus(kraus, &loc)?;
            let ds = stinespring_unitary(ks, tol).map_err(core)?;
            let unitarity = is_unitary(ds.evolution(), tol.alg())
                .map_err(core)?
                .deviation;
            let gamma = reconstruct_gamma(&ds, tol).map_err(core)?;
            let pvm = configuration_pvm(ks.dim()).map_err(core)?;
            let want = gamma_from_kraus(ks, &pvm, tol).map_err(core)?;
            let dev = gamma.matrix().max_abs_diff(want.matrix());
            Outcome::verdict(
                unitarity <= tol.alg() && dev <= tol.alg(),
                json!({
                    "dilated": ds,
                    "gamma": gamma.matrix(),
                    "unitarity_deviation": unitarity,
                    "max_gamma_deviation": dev,
                }),
            )
        }
        Task::Realify { matrix } => {
            let m = reg.matrix(matrix, &loc)?;
            let r = realify(&m);
            let k = apply_conjugation_real(&r).map_err(core)?;
            let conj_dev = k.max_abs_diff(&realify(&m.conj()));
            let involution_dev = apply_conjugation_real(&k).map_err(core)?.max_abs_diff(&r);
            let orthogonality = if m.is_square() && is_unitary(&m, tol.alg()).map_err(core)?.holds {
                Some((&r.transpose() * &r).max_abs_diff(&RMatrix::identity(r.rows())))
            } else {
                None
            };
            let holds = conj_dev <= tol.alg()
                && involution_dev <= tol.alg()
                && orthogonality.is_none_or(|d| d <= tol.alg());
            Outcome::verdict(
                holds,
                json!({
                    "real": r,
                    "conjugated": k,
                    "conjugation_deviation": conj_dev,
                    "involution_deviation": involution_dev,
                    "orthogonality_deviation": orthogonality,
                }),
            )
        }
    })
}

fn split(c: unistoch_core::validate::Check) -> (bool, f64, Option<String>) {
    (c.holds, c.deviation, None)
}
