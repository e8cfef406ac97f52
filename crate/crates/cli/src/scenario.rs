//! Scenario file schema.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use unistoch_core::literal::ComplexEntry;
use unistoch_core::{CMatrix, RMatrix};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    pub name: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<ToleranceSpec>,
    #[serde(default)]
    pub objects: BTreeMap<String, ObjectSpec>,
    pub tasks: Vec<TaskSpec>,
}

#[derive(Debug, Clone, Copy, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    pub alg: Option<f64>,
    pub int: Option<f64>,
}

/// A matrix given by object name, built-in name, literal rows, or a real
/// diagonal.
///
/// Built-in names are `identity:N`, `pauli_x`, `pauli_y`, `pauli_z` and
/// `hadamard`. Object names shadow built-ins.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(untagged)]
pub enum MatrixRef {
    Name(String),
    Literal(CMatrix),
    Diagonal { diag: Vec<f64> },
}

impl From<CMatrix> for MatrixRef {
    fn from(m: CMatrix) -> Self {
        MatrixRef::Literal(m)
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObjectSpec {
    Matrix {
        value: MatrixRef,
    },
    /// Either `file` (relative to the scenario) or the inline process fields.
    Process {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        file: Option<PathBuf>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        anchor_time: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        initial: Option<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        samples: Option<Vec<SampleSpec>>,
    },
    Kraus {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        operators: Option<Vec<MatrixRef>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bit_flip: Option<f64>,
    },
    /// `H = scale · matrix`, constant in time.
    Hamiltonian {
        matrix: MatrixRef,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default = "one")]
        hbar: f64,
    },
    /// Either literal `value` or `random` seed with `dim`.
    Phases {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        value: Option<RMatrix>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        random: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
    },
    /// Exactly one of `constant` (fixed V), `generator` (V = exp(−iGt)),
    /// `adjoint_of` (V = U†(t) for a Hamiltonian object).
    Transform {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        constant: Option<MatrixRef>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        generator: Option<MatrixRef>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        adjoint_of: Option<String>,
    },
    Distribution {
        value: Vec<f64>,
    },
    State {
        value: Vec<ComplexEntry>,
    },
    Density {
        value: MatrixRef,
    },
    Beable {
        values: Vec<f64>,
    },
}

fn one() -> f64 {
    1.0
}

fn default_dt() -> f64 {
    unistoch_core::dynamics::DEFAULT_DT
}

fn default_h_step() -> f64 {
    unistoch_core::dynamics::DEFAULT_H_STEP
}

fn default_wigner_trials() -> usize {
    64
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSpec {
    pub t: f64,
    pub gamma: RMatrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    Unitary,
    SelfAdjoint,
    Psd,
    Projector,
    Density,
    Stochastic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HintSpec {
    #[default]
    Unknown,
    Unitary,
    AntiUnitary,
}

/// A task record: `kind` plus its parameters, an optional `label`, and for
/// verdict-bearing tasks the expected verdict (`expect`, default true).
#[derive(Debug, Clone, Deserialize, Serialize)]
pub struct TaskSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default = "yes")]
    pub expect: bool,
    #[serde(flatten)]
    pub task: Task,
}

impl From<Task> for TaskSpec {
    fn from(task: Task) -> Self {
        TaskSpec {
            label: None,
            expect: true,
            task,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Task {
    GammaFromTheta {
        theta: MatrixRef,
    },
    Validate {
        matrix: MatrixRef,
        check: CheckKind,
    },
    Dictionary {
        theta: MatrixRef,
    },
    Evolve {
        theta: MatrixRef,
        initial: String,
    },
    Integrate {
        hamiltonian: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        state: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        density: Option<String>,
        t_end: f64,
        #[serde(default = "default_dt")]
        dt: f64,
    },
    Divisibility {
        process: String,
        t: f64,
        t_prime: f64,
    },
    InverseClass {
        process: String,
        t: f64,
    },
    ShGauge {
        theta: MatrixRef,
        phases: String,
    },
    FwGauge {
        theta: MatrixRef,
        density: String,
        #[serde(default)]
        observables: Vec<MatrixRef>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        state: Option<String>,
        transform: String,
        t: f64,
    },
    TransformHamiltonian {
        hamiltonian: String,
        transform: String,
        t: f64,
        #[serde(default = "default_h_step")]
        h_step: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        expected: Option<MatrixRef>,
    },
    Covariant {
        hamiltonian: String,
        transform: String,
        state: String,
        t: f64,
        #[serde(default = "default_h_step")]
        h_step: f64,
    },
    Ehrenfest {
        hamiltonian: String,
        beable: String,
        density: String,
        t: f64,
        #[serde(default = "default_h_step")]
        h_step: f64,
    },
    Symmetry {
        theta: MatrixRef,
        candidate: MatrixRef,
        #[serde(default)]
        hint: HintSpec,
        #[serde(default = "default_wigner_trials")]
        wigner_trials: usize,
    },
    Noether {
        generator: MatrixRef,
        hamiltonian: String,
        density: String,
        times: Vec<f64>,
    },
    KrausGamma {
        kraus: String,
    },
    Dilate {
        theta: MatrixRef,
        internal_dim: usize,
        #[serde(default)]
        gamma_index: usize,
        #[serde(default)]
        blockwise_random: bool,
    },
    Stinespring {
        kraus: String,
    },
    Realify {
        matrix: MatrixRef,
    },
}

impl Task {
    pub fn kind(&self) -> &'static str {
        match self {
            Task::GammaFromTheta { .. } => "gamma_from_theta",
            Task::Validate { .. } => "validate",
            Task::Dictionary { .. } => "dictionary",
            Task::Evolve { .. } => "evolve",
            Task::Integrate { .. } => "integrate",
            Task::Divisibility { .. } => "divisibility",
            Task::InverseClass { .. } => "inverse_class",
            Task::ShGauge { .. } => "sh_gauge",
            Task::FwGauge { .. } => "fw_gauge",
            Task::TransformHamiltonian { .. } => "transform_hamiltonian",
            Task::Covariant { .. } => "covariant",
            Task::Ehrenfest { .. } => "ehrenfest",
            Task::Symmetry { .. } => "symmetry",
            Task::Noether { .. } => "noether",
            Task::KrausGamma { .. } => "kraus_gamma",
            Task::Dilate { .. } => "dilate",
            Task::Stinespring { .. } => "stinespring",
            Task::Realify { .. } => "realify",
        }
    }

    /// Tasks that draw from the per-task generator.
    pub fn is_stochastic(&self) -> bool {
        matches!(
            self,
            Task::Dilate {
                blockwise_random: true,
                ..
            }
        ) || matches!(self, Task::Symmetry { wigner_trials, .. } if *wigner_trials > 0)
    }
}
