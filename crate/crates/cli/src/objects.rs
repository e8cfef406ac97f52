//! Resolution of scenario objects into library values.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use unistoch_core::dilation::KrausSet;
use unistoch_core::dynamics::family_from_constant_h;
use unistoch_core::gauge::{FWTransform, PhaseMatrix};
use unistoch_core::literal::entries;
use unistoch_core::matrix::named;
use unistoch_core::sample::{random_phases, seeded};
use unistoch_core::{
    Beable, CMatrix, DensityMatrix, Hamiltonian, ProbVector, Process, StateVector, Tolerance,
    UnitaryFamily,
};

use crate::error::{CliError, CliResult};
use crate::scenario::{MatrixRef, ObjectSpec};

#[derive(Clone)]
pub enum Object {
    Matrix(CMatrix),
    Process(Process),
    Kraus(KrausSet),
    Hamiltonian {
        h: Hamiltonian,
        family: UnitaryFamily,
    },
    Phases(PhaseMatrix),
    Transform(FWTransform),
    Distribution(ProbVector),
    State(StateVector),
    Density(DensityMatrix),
    Beable(Beable),
}

impl Object {
    pub fn kind(&self) -> &'static str {
        match self {
            Object::Matrix(_) => "matrix",
            Object::Process(_) => "process",
            Object::Kraus(_) => "kraus",
            Object::Hamiltonian { .. } => "hamiltonian",
            Object::Phases(_) => "phases",
            Object::Transform(_) => "transform",
            Object::Distribution(_) => "distribution",
            Object::State(_) => "state",
            Object::Density(_) => "density",
            Object::Beable(_) => "beable",
        }
    }

    /// The matrix behind matrix-like objects.
    fn as_matrix(&self) -> Option<CMatrix> {
        match self {
            Object::Matrix(m) => Some(m.clone()),
            Object::Density(rho) => Some(rho.matrix().clone()),
            Object::Hamiltonian { h, .. } => h.as_constant().cloned(),
            _ => None,
        }
    }
}

/// `identity:N`, `pauli_x`, `pauli_y`, `pauli_z`, `hadamard`.
pub fn builtin(name: &str) -> Option<CMatrix> {
    match name {
        "pauli_x" => Some(named::pauli_x()),
        "pauli_y" => Some(named::pauli_y()),
        "pauli_z" => Some(named::pauli_z()),
        "hadamard" => Some(named::hadamard()),
        _ => {
            let n: usize = name.strip_prefix("identity:")?.parse().ok()?;
            (n > 0).then(|| CMatrix::identity(n))
        }
    }
}

fn resolve_matrix(
    r: &MatrixRef,
    loc: &str,
    mut lookup: impl FnMut(&str) -> CliResult<Option<Object>>,
) -> CliResult<CMatrix> {
    match r {
        MatrixRef::Literal(m) => Ok(m.clone()),
        MatrixRef::Diagonal { diag } => {
            if diag.is_empty() {
                return Err(CliError::validation(loc, "empty diagonal"));
            }
            Ok(CMatrix::from_real_diagonal(diag))
        }
        MatrixRef::Name(name) => match lookup(name)? {
            Some(obj) => obj.as_matrix().ok_or_else(|| {
                CliError::validation(
                    loc,
                    format!("'{name}' is a {} object, not a matrix", obj.kind()),
                )
            }),
            None => builtin(name)
                .ok_or_else(|| CliError::validation(loc, format!("unknown matrix '{name}'"))),
        },
    }
}

struct Builder<'a> {
    specs: &'a BTreeMap<String, ObjectSpec>,
    base_dir: Option<&'a Path>,
    tol: Tolerance,
    done: BTreeMap<String, Object>,
    stack: Vec<String>,
}

impl Builder<'_> {
    fn lookup(&mut self, name: &str) -> CliResult<Option<Object>> {
        if let Some(obj) = self.done.get(name) {
            return Ok(Some(obj.clone()));
        }
        let Some(spec) = self.specs.get(name) else {
            return Ok(None);
        };
        if self.stack.iter().any(|s| s == name) {
            return Err(CliError::validation(
                format!("object '{name}'"),
                format!("reference cycle through {}", self.stack.join(" -> ")),
            ));
        }
        self.stack.push(name.to_string());
        let built = self.build(name, spec);
        self.stack.pop();
        let obj = built?;
        self.done.insert(name.to_string(), obj.clone());
        Ok(Some(obj))
    }

    fn matrix(&mut self, r: &MatrixRef, loc: &str) -> CliResult<CMatrix> {
        resolve_matrix(r, loc, |n| self.lookup(n))
    }

    fn build(&mut self, name: &str, spec: &ObjectSpec) -> CliResult<Object> {
        let loc = format!("object '{name}'");
        let tol = self.tol;
        let core = |e| CliError::from_core(loc.clone(), e);
        Ok(match spec {
            ObjectSpec::Matrix { value } => Object::Matrix(self.matrix(value, &loc)?),
            ObjectSpec::Process {
                file,
                dim,
                anchor_time,
                initial,
                samples,
            } => {
                let inline = dim.is_some()
                    || initial.is_some()
                    || samples.is_some()
                    || anchor_time.is_some();
                let process = match (file, inline) {
                    (Some(path), false) => {
                        let path = self.resolve_path(path);
                        let text = std::fs::read_to_string(&path)
                            .map_err(|e| CliError::parse(path.display().to_string(), e))?;
                        Process::from_json_str(&text, tol)
                            .map_err(|e| CliError::from_core(path.display().to_string(), e))?
                    }
                    (None, true) => {
                        let (Some(dim), Some(initial), Some(samples)) = (dim, initial, samples)
                        else {
                            return Err(CliError::validation(
                                loc,
                                "inline process needs dim, initial and samples",
                            ));
                        };
                        if initial.len() != *dim {
                            return Err(CliError::validation(
                                loc,
                                format!(
                                    "initial distribution has {} entries, dim is {dim}",
                                    initial.len()
                                ),
                            ));
                        }
                        let p0 = ProbVector::new(initial.clone(), tol).map_err(core)?;
                        let samples = samples.iter().map(|s| (s.t, s.gamma.clone())).collect();
                        Process::new(p0, anchor_time.unwrap_or(0.0), samples, tol).map_err(core)?
                    }
                    _ => {
                        return Err(CliError::validation(
                            loc,
                            "give either `file` or the inline process fields",
                        ))
                    }
                };
                Object::Process(process)
            }
            ObjectSpec::Kraus {
                operators,
                bit_flip,
            } => match (operators, bit_flip) {
                (Some(ops), None) => {
                    let ops = ops
                        .iter()
                        .map(|r| self.matrix(r, &loc))
                        .collect::<CliResult<Vec<_>>>()?;
                    Object::Kraus(KrausSet::new(ops, tol).map_err(core)?)
                }
                (None, Some(p)) => Object::Kraus(KrausSet::bit_flip(*p).map_err(core)?),
                _ => {
                    return Err(CliError::validation(
                        loc,
                        "give exactly one of `operators` or `bit_flip`",
                    ))
                }
            },
            ObjectSpec::Hamiltonian {
                matrix,
                scale,
                hbar,
            } => {
                let h = self.matrix(matrix, &loc)?.scale_re(*scale);
                let family = family_from_constant_h(&h, *hbar, tol).map_err(core)?;
                let h = Hamiltonian::constant(h, tol)
                    .and_then(|h| h.with_hbar(*hbar))
                    .map_err(core)?;
                Object::Hamiltonian { h, family }
            }
            ObjectSpec::Phases { value, random, dim } => match (value, random, dim) {
                (Some(v), None, _) => Object::Phases(PhaseMatrix::new(v.clone()).map_err(core)?),
                (None, Some(seed), Some(n)) if *n > 0 => {
                    let phases = random_phases(&mut seeded(*seed, 0), *n);
                    Object::Phases(PhaseMatrix::new(phases).map_err(core)?)
                }
                _ => {
                    return Err(CliError::validation(
                        loc,
                        "give `value`, or `random` with a positive `dim`",
                    ))
                }
            },
            ObjectSpec::Transform {
                constant,
                generator,
                adjoint_of,
            } => match (constant, generator, adjoint_of) {
                (Some(v), None, None) => {
                    let v = self.matrix(v, &loc)?;
                    Object::Transform(FWTransform::constant(v, tol).map_err(core)?)
                }
                (None, Some(g), None) => {
                    let g = self.matrix(g, &loc)?;
                    Object::Transform(FWTransform::exp_generator(&g, tol).map_err(core)?)
                }
                (None, None, Some(target)) => match self.lookup(target)? {
                    Some(Object::Hamiltonian { family, .. }) => {
                        Object::Transform(FWTransform::adjoint_of(&family))
                    }
                    Some(other) => {
                        return Err(CliError::validation(
                            loc,
                            format!(
                                "`adjoint_of` needs a hamiltonian, '{target}' is a {}",
                                other.kind()
                            ),
                        ))
                    }
                    None => {
                        return Err(CliError::validation(
                            loc,
                            format!("unknown object '{target}'"),
                        ))
                    }
                },
                _ => {
                    return Err(CliError::validation(
                        loc,
                        "give exactly one of `constant`, `generator` or `adjoint_of`",
                    ))
                }
            },
            ObjectSpec::Distribution { value } => {
                Object::Distribution(ProbVector::new(value.clone(), tol).map_err(core)?)
            }
            ObjectSpec::State { value } => {
                Object::State(StateVector::new(entries(value), tol).map_err(core)?)
            }
            ObjectSpec::Density { value } => {
                let m = self.matrix(value, &loc)?;
                Object::Density(DensityMatrix::new(m, tol).map_err(core)?)
            }
            ObjectSpec::Beable { values } => {
                Object::Beable(Beable::new(values.clone()).map_err(core)?)
            }
        })
    }

    fn resolve_path(&self, path: &Path) -> PathBuf {
        match self.base_dir {
            Some(dir) if path.is_relative() => dir.join(path),
            _ => path.to_path_buf(),
        }
    }
}

/// All scenario objects, resolved once before any task runs.
pub struct Registry {
    objects: BTreeMap<String, Object>,
}

impl Registry {
    pub fn build(
        specs: &BTreeMap<String, ObjectSpec>,
        base_dir: Option<&Path>,
        tol: Tolerance,
    ) -> CliResult<Self> {
        let mut b = Builder {
            specs,
            base_dir,
            tol,
            done: BTreeMap::new(),
            stack: Vec::new(),
        };
        for name in specs.keys() {
            b.lookup(name)?;
        }
        Ok(Registry { objects: b.done })
    }

    pub fn matrix(&self, r: &MatrixRef, loc: &str) -> CliResult<CMatrix> {
        resolve_matrix(r, loc, |n| Ok(self.objects.get(n).cloned()))
    }

    pub fn get(&self, name: &str, loc: &str) -> CliResult<&Object> {
        self.objects
            .get(name)
            .ok_or_else(|| CliError::validation(loc, format!("unknown object '{name}'")))
    }

    /// Checks that `name` exists and has the given kind.
    pub fn expect_kind(&self, name: &str, kind: &str, loc: &str) -> CliResult<&Object> {
        let obj = self.get(name, loc)?;
        if obj.kind() != kind {
            return Err(CliError::validation(
                loc,
                format!("'{name}' is a {} object, expected {kind}", obj.kind()),
            ));
        }
        Ok(obj)
    }
}

macro_rules! typed_getter {
    ($fn_name:ident, $variant:ident, $ty:ty, $kind:literal) => {
        impl Registry {
            pub fn $fn_name(&self, name: &str, loc: &str) -> CliResult<&$ty> {
                match self.expect_kind(name, $kind, loc)? {
                    Object::$variant(x) => Ok(x),
                    _ => unreachable!(),
                }
            }
        }
    };
}

typed_getter!(process, Process, Process, "process");
typed_getter!(kraus, Kraus, KrausSet, "kraus");
typed_getter!(phases, Phases, PhaseMatrix, "phases");
typed_getter!(transform, Transform, FWTransform, "transform");
typed_getter!(distribution, Distribution, ProbVector, "distribution");
typed_getter!(state, State, StateVector, "state");
typed_getter!(density, Density, DensityMatrix, "density");
typed_getter!(beable, Beable, Beable, "beable");

impl Registry {
    pub fn hamiltonian(&self, name: &str, loc: &str) -> CliResult<(&Hamiltonian, &UnitaryFamily)> {
        match self.expect_kind(name, "hamiltonian", loc)? {
            Object::Hamiltonian { h, family } => Ok((h, family)),
            _ => unreachable!(),
        }
    }
}
