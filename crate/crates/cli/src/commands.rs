//! Command-line definitions. Every subcommand other than `run` builds a
//! one- or two-task scenario from its files and runs it like any other.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use unistoch_core::literal::ComplexEntry;
use unistoch_core::CMatrix;

use crate::error::{CliError, CliResult};
use crate::report::{Format, Report};
use crate::scenario::{
    CheckKind, HintSpec, MatrixRef, ObjectSpec, Scenario, Task, TaskSpec, SCHEMA_VERSION,
};
use crate::{load_scenario, run_scenario, RunOptions};

#[derive(Debug, Parser)]
#[command(
    name = "unistoch",
    version,
    about = "Stochastic-quantum correspondence checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Algebraic tolerance τ_alg.
    #[arg(long, env = "UNISTOCH_TOL", global = true)]
    pub tol: Option<f64>,
    /// Seed for every random draw.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum CheckArg {
    Unitary,
    SelfAdjoint,
    Psd,
    Projector,
    Density,
    Stochastic,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum HintArg {
    Unknown,
    Unitary,
    AntiUnitary,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario file.
    Run {
        scenario: PathBuf,
        /// Run independent tasks concurrently.
        #[arg(long)]
        parallel: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Check a matrix property.
    Validate {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, value_enum)]
        check: CheckArg,
        #[command(flatten)]
        common: Common,
    },
    /// Evolve a distribution under Θ, or integrate a state or density matrix
    /// under a constant Hamiltonian.
    Evolve {
        #[arg(long, conflicts_with = "hamiltonian", requires = "initial")]
        theta: Option<PathBuf>,
        /// Initial distribution, a JSON array.
        #[arg(long)]
        initial: Option<PathBuf>,
        #[arg(long)]
        hamiltonian: Option<PathBuf>,
        /// Initial state vector, a JSON array of entries.
        #[arg(long, conflicts_with = "density")]
        state: Option<PathBuf>,
        #[arg(long)]
        density: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        t_end: f64,
        #[arg(long, default_value_t = unistoch_core::dynamics::DEFAULT_DT)]
        dt: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Test whether a process splits through an intermediate time.
    Divisibility {
        #[arg(long)]
        process: PathBuf,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        tprime: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Check Schur-Hadamard invariance of Γ, and optionally a
    /// Foldy-Wouthuysen frame change generated by a Hermitian matrix.
    GaugeCheck {
        #[arg(long)]
        theta: PathBuf,
        /// Phase matrix; random phases from --seed when omitted.
        #[arg(long)]
        phases: Option<PathBuf>,
        /// Generator G of V(t) = exp(−iGt).
        #[arg(long)]
        generator: Option<PathBuf>,
        /// Initial density matrix for the frame change; uniform when omitted.
        #[arg(long)]
        density: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Test a candidate dynamical symmetry.
    SymmetryCheck {
        #[arg(long)]
        theta: PathBuf,
        #[arg(long)]
        candidate: PathBuf,
        #[arg(long, value_enum, default_value_t = HintArg::Unknown)]
        hint: HintArg,
        /// Random bases for the Wigner test; needs --seed when positive.
        #[arg(long, default_value_t = 64)]
        trials: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Dilate Θ trivially and reconstruct Γ.
    Dilate {
        #[arg(long)]
        theta: PathBuf,
        #[arg(long)]
        internal_dim: usize,
        #[arg(long, default_value_t = 0)]
        gamma: usize,
        /// Also apply random blockwise unitaries; needs --seed.
        #[arg(long)]
        blockwise: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Build a unitary dilation of a Kraus set.
    Stinespring {
        #[arg(long)]
        kraus: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Real 2N×2N representation of a complex matrix.
    Realify {
        #[arg(long)]
        matrix: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

impl Command {
    pub fn common(&self) -> &Common {
        match self {
            Command::Run { common, .. }
            | Command::Validate { common, .. }
            | Command::Evolve { common, .. }
            | Command::Divisibility { common, .. }
            | Command::GaugeCheck { common, .. }
            | Command::SymmetryCheck { common, .. }
            | Command::Dilate { common, .. }
            | Command::Stinespring { common, .. }
            | Command::Realify { common, .. } => common,
        }
    }
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::parse(path.display().to_string(), e))
}

fn parse_file<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let text = read(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::from_json(&path.display().to_string(), &e))
}

fn matrix_object(path: &Path) -> CliResult<ObjectSpec> {
    let m: CMatrix = parse_file(path)?;
    Ok(ObjectSpec::Matrix {
        value: MatrixRef::Literal(m),
    })
}

/// Kraus files hold a list of matrices, or `{"operators": [...]}`, or
/// `{"bit_flip": p}`.
#[derive(Deserialize)]
#[serde(untagged)]
enum KrausFile {
    List(Vec<CMatrix>),
    Operators { operators: Vec<CMatrix> },
    BitFlip { bit_flip: f64 },
}

fn kraus_object(path: &Path) -> CliResult<ObjectSpec> {
    Ok(match parse_file::<KrausFile>(path)? {
        KrausFile::List(ops) | KrausFile::Operators { operators: ops } => ObjectSpec::Kraus {
            operators: Some(ops.into_iter().map(MatrixRef::Literal).collect()),
            bit_flip: None,
        },
        KrausFile::BitFlip { bit_flip } => ObjectSpec::Kraus {
            operators: None,
            bit_flip: Some(bit_flip),
        },
    })
}

fn theta_ref() -> MatrixRef {
    MatrixRef::Name("theta".into())
}

struct Built {
    scenario: Scenario,
    base_dir: Option<PathBuf>,
    parallel: bool,
}

fn single(
    name: &str,
    seed: Option<u64>,
    objects: BTreeMap<String, ObjectSpec>,
    tasks: Vec<Task>,
) -> CliResult<Built> {
    let tasks: Vec<TaskSpec> = tasks.into_iter().map(TaskSpec::from).collect();
    if seed.is_none() && tasks.iter().any(|t| t.task.is_stochastic()) {
        return Err(CliError::validation(
            name,
            "this check draws random numbers; pass --seed",
        ));
    }
    Ok(Built {
        scenario: Scenario {
            schema: SCHEMA_VERSION,
            name: name.to_string(),
            seed: seed.unwrap_or(0),
            tolerance: None,
            objects,
            tasks,
        },
        base_dir: None,
        parallel: false,
    })
}

fn build(command: &Command) -> CliResult<Built> {
    let seed = command.common().seed;
    let mut objects = BTreeMap::new();
    match command {
        Command::Run {
            scenario, parallel, ..
        } => Ok(Built {
            scenario: load_scenario(scenario)?,
            base_dir: scenario.parent().map(Path::to_path_buf),
            parallel: *parallel,
        }),
        Command::Validate { matrix, check, .. } => {
            objects.insert("matrix".into(), matrix_object(matrix)?);
            let check = match check {
                CheckArg::Unitary => CheckKind::Unitary,
                CheckArg::SelfAdjoint => CheckKind::SelfAdjoint,
                CheckArg::Psd => CheckKind::Psd,
                CheckArg::Projector => CheckKind::Projector,
                CheckArg::Density => CheckKind::Density,
                CheckArg::Stochastic => CheckKind::Stochastic,
            };
            let task = Task::Validate {
                matrix: MatrixRef::Name("matrix".into()),
                check,
            };
            single("validate", seed, objects, vec![task])
        }
        Command::Evolve {
            theta,
            initial,
            hamiltonian,
            state,
            density,
            t_end,
            dt,
            ..
        } => {
            let task =
                match (theta, initial, hamiltonian) {
                    (Some(theta), Some(initial), None) => {
                        objects.insert("theta".into(), matrix_object(theta)?);
                        objects.insert(
                            "initial".into(),
                            ObjectSpec::Distribution {
                                value: parse_file(initial)?,
                            },
                        );
                        Task::Evolve {
                            theta: theta_ref(),
                            initial: "initial".into(),
                        }
                    }
                    (None, _, Some(h)) => {
                        objects.insert(
                            "h".into(),
                            ObjectSpec::Hamiltonian {
                                matrix: MatrixRef::Literal(parse_file(h)?),
                                scale: 1.0,
                                hbar: 1.0,
                            },
                        );
                        if let Some(s) = state {
                            let value: Vec<ComplexEntry> = parse_file(s)?;
                            objects.insert("state".into(), ObjectSpec::State { value });
                        } else if let Some(d) = density {
                            objects.insert(
                                "density".into(),
                                ObjectSpec::Density {
                                    value: MatrixRef::Literal(parse_file(d)?),
                                },
                            );
                        } else {
                            return Err(CliError::validation(
                                "evolve",
                                "--hamiltonian needs --state or --density",
                            ));
                        }
                        Task::Integrate {
                            hamiltonian: "h".into(),
                            state: state.as_ref().map(|_| "state".into()),
                            density: density.as_ref().map(|_| "density".into()),
                            t_end: *t_end,
                            dt: *dt,
                        }
                    }
                    _ => return Err(CliError::validation(
                        "evolve",
                        "give --theta with --initial, or --hamiltonian with --state or --density",
                    )),
                };
            single("evolve", seed, objects, vec![task])
        }
        Command::Divisibility {
            process, t, tprime, ..
        } => {
            let path = std::path::absolute(process)
                .map_err(|e| CliError::parse(process.display().to_string(), e))?;
            objects.insert(
                "process".into(),
                ObjectSpec::Process {
                    file: Some(path),
                    dim: None,
                    anchor_time: None,
                    initial: None,
                    samples: None,
                },
            );
            let task = Task::Divisibility {
                process: "process".into(),
                t: *t,
                t_prime: *tprime,
            };
            single("divisibility", seed, objects, vec![task])
        }
        Command::GaugeCheck {
            theta,
            phases,
            generator,
            density,
            t,
            ..
        } => {
            let theta_m: CMatrix = parse_file(theta)?;
            let n = theta_m.rows();
            objects.insert(
                "theta".into(),
                ObjectSpec::Matrix {
                    value: MatrixRef::Literal(theta_m),
                },
            );
            let phase_spec = match phases {
                Some(p) => ObjectSpec::Phases {
                    value: Some(parse_file(p)?),
                    random: None,
                    dim: None,
                },
                None => {
                    let Some(seed) = seed else {
                        return Err(CliError::validation(
                            "gauge-check",
                            "random phases need --seed",
                        ));
                    };
                    ObjectSpec::Phases {
                        value: None,
                        random: Some(seed),
                        dim: Some(n),
                    }
                }
            };
            objects.insert("phases".into(), phase_spec);
            let mut tasks = vec![Task::ShGauge {
                theta: theta_ref(),
                phases: "phases".into(),
            }];
            if let Some(g) = generator {
                objects.insert(
                    "v".into(),
                    ObjectSpec::Transform {
                        constant: None,
                        generator: Some(MatrixRef::Literal(parse_file(g)?)),
                        adjoint_of: None,
                    },
                );
                let rho = match density {
                    Some(d) => MatrixRef::Literal(parse_file(d)?),
                    None => MatrixRef::Literal(CMatrix::identity(n).scale_re(1.0 / n as f64)),
                };
                objects.insert("rho".into(), ObjectSpec::Density { value: rho });
                tasks.push(Task::FwGauge {
                    theta: theta_ref(),
                    density: "rho".into(),
                    observables: Vec::new(),
                    state: None,
                    transform: "v".into(),
                    t: *t,
                });
            }
            single("gauge-check", seed, objects, tasks)
        }
        Command::SymmetryCheck {
            theta,
            candidate,
            hint,
            trials,
            ..
        } => {
            objects.insert("theta".into(), matrix_object(theta)?);
            objects.insert("candidate".into(), matrix_object(candidate)?);
            let hint = match hint {
                HintArg::Unknown => HintSpec::Unknown,
                HintArg::Unitary => HintSpec::Unitary,
                HintArg::AntiUnitary => HintSpec::AntiUnitary,
            };
            let task = Task::Symmetry {
                theta: theta_ref(),
                candidate: MatrixRef::Name("candidate".into()),
                hint,
                wigner_trials: *trials,
            };
            single("symmetry-check", seed, objects, vec![task])
        }
        Command::Dilate {
            theta,
            internal_dim,
            gamma,
            blockwise,
            ..
        } => {
            objects.insert("theta".into(), matrix_object(theta)?);
            let task = Task::Dilate {
                theta: theta_ref(),
                internal_dim: *internal_dim,
                gamma_index: *gamma,
                blockwise_random: *blockwise,
            };
            single("dilate", seed, objects, vec![task])
        }
        Command::Stinespring { kraus, .. } => {
            objects.insert("kraus".into(), kraus_object(kraus)?);
            let task = Task::Stinespring {
                kraus: "kraus".into(),
            };
            single("stinespring", seed, objects, vec![task])
        }
        Command::Realify { matrix, .. } => {
            objects.insert("matrix".into(), matrix_object(matrix)?);
            let task = Task::Realify {
                matrix: MatrixRef::Name("matrix".into()),
            };
            single("realify", seed, objects, vec![task])
        }
    }
}

/// Runs a parsed command line and returns the report.
pub fn execute(command: &Command) -> CliResult<Report> {
    let built = build(command)?;
    let common = command.common();
    let opts = RunOptions {
        tol: common.tol,
        seed: common.seed,
        parallel: built.parallel,
    };
    run_scenario(&built.scenario, built.base_dir.as_deref(), opts)
}

/// Writes the rendered report and returns the exit status.
pub fn main_with(cli: Cli) -> i32 {
    let common = cli.command.common().clone();
    let report = match execute(&cli.command) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let text = report.render(common.format);
    match &common.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return crate::error::EXIT_PARSE;
            }
        }
        None => print!("{text}"),
    }
    report.exit_code()
}
