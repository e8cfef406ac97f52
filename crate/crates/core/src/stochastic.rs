//! Transition matrices, probability vectors and divisibility analysis.

use serde::{Deserialize, Serialize};

use crate::error::{check_index, Error, Result};
use crate::matrix::RMatrix;
use crate::tolerance::Tolerance;

/// Smallest singular value below which `Γ(t′)` is treated as singular when
/// forming an intermediate. Inverse entries beyond ~1e8 would make any
/// sign-based verdict meaningless.
pub const MIN_SINGULAR_VALUE: f64 = 1e-8;

/// Two sample times closer than this are the same time.
const TIME_EPS: f64 = 1e-9;

fn same_time(a: f64, b: f64) -> bool {
    (a - b).abs() <= TIME_EPS * a.abs().max(b.abs()).max(1.0)
}

/// Smallest entry and worst column-sum deviation from 1.
pub fn stochastic_deviation(m: &RMatrix) -> (f64, f64) {
    let col_err = m
        .column_sums()
        .iter()
        .map(|s| (s - 1.0).abs())
        .fold(0.0, f64::max);
    (m.min_entry(), col_err)
}

pub fn is_column_stochastic(m: &RMatrix, tol: f64) -> bool {
    let (min, col_err) = stochastic_deviation(m);
    m.is_square() && min >= -tol && col_err <= tol
}

fn require_stochastic(m: &RMatrix, tol: f64) -> Result<()> {
    m.square_dim()?;
    let (min, col_err) = stochastic_deviation(m);
    if min < -tol {
        return Err(Error::invalid(format!(
            "matrix is not stochastic: entry {min:.3e} is negative"
        )));
    }
    if col_err > tol {
        let worst = m
            .column_sums()
            .iter()
            .enumerate()
            .max_by(|a, b| (a.1 - 1.0).abs().total_cmp(&(b.1 - 1.0).abs()))
            .map(|(j, _)| j)
            .unwrap_or(0);
        return Err(Error::invalid(format!(
            "matrix is not stochastic: column {worst} sums to 1 {col_err:+.3e}"
        )));
    }
    Ok(())
}

/// A probability distribution over `N` configurations.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(p: Vec<f64>, tol: Tolerance) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::dim("probability vector must be non-empty"));
        }
        if let Some(x) = p
            .iter()
            .find(|x| !x.is_finite() || **x < -tol.alg() || **x > 1.0 + tol.alg())
        {
            return Err(Error::invalid(format!("probability {x} is outside [0, 1]")));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > tol.alg() {
            return Err(Error::invalid(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self(p))
    }

    /// All weight on configuration `i`.
    pub fn point(n: usize, i: usize) -> Result<Self> {
        check_index(i, n)?;
        let mut p = vec![0.0; n];
        p[i] = 1.0;
        Ok(Self(p))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::dim("probability vector must be non-empty"));
        }
        Ok(Self(vec![1.0 / n as f64; n]))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, i: usize) -> Result<f64> {
        check_index(i, self.dim())?;
        Ok(self.0[i])
    }
}

/// A column-stochastic matrix `Γ(t←anchor)`, with `Γ_ij` the probability of
/// configuration `i` at the target time given configuration `j` at the
/// anchor.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransitionMatrix {
    gamma: RMatrix,
    target_time: f64,
    anchor_time: f64,
}

impl TransitionMatrix {
    /// Validates stochasticity. Times default to 0; set them with
    /// [`TransitionMatrix::at`] and [`TransitionMatrix::anchored_at`].
    pub fn new(gamma: RMatrix, tol: Tolerance) -> Result<Self> {
        require_stochastic(&gamma, tol.alg())?;
        Ok(Self {
            gamma,
            target_time: 0.0,
            anchor_time: 0.0,
        })
    }

    /// For matrices that are stochastic by construction.
    pub(crate) fn from_trusted(gamma: RMatrix) -> Self {
        Self {
            gamma,
            target_time: 0.0,
            anchor_time: 0.0,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            gamma: RMatrix::identity(n),
            target_time: 0.0,
            anchor_time: 0.0,
        }
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
        self.gamma.rows()
    }

    pub fn matrix(&self) -> &RMatrix {
        &self.gamma
    }

    pub fn into_matrix(self) -> RMatrix {
        self.gamma
    }

    pub fn target_time(&self) -> f64 {
        self.target_time
    }

    pub fn anchor_time(&self) -> f64 {
        self.anchor_time
    }
}

/// `p(t) = Γ p(0)`, the law of total probability.
pub fn propagate(gamma: &TransitionMatrix, p0: &ProbVector, tol: Tolerance) -> Result<ProbVector> {
    let p = gamma.matrix().mul_vec(p0.values())?;
    ProbVector::new(p, tol)
}

/// `Γⁿ` for a time-homogeneous Markov chain.
pub fn markov_power(gamma: &RMatrix, n: u32, tol: Tolerance) -> Result<RMatrix> {
    require_stochastic(gamma, tol.alg())?;
    gamma.pow(n)
}

/// `Σ_i a_i p_i`.
pub fn expectation(values: &[f64], p: &ProbVector) -> Result<f64> {
    if values.len() != p.dim() {
        return Err(Error::dim(format!(
            "{} values for {} configurations",
            values.len(),
            p.dim()
        )));
    }
    Ok(values.iter().zip(p.values()).map(|(a, q)| a * q).sum())
}

/// Outcome of trying to split `Γ(t←t₀)` through an intermediate time `t′`.
#[derive(Debug, Clone, Serialize)]
pub struct DivisibilityReport {
    pub target_time: f64,
    pub split_time: f64,
    /// `Γ̃(t←t′) = Γ(t←t₀) Γ(t′←t₀)⁻¹`.
    pub candidate: RMatrix,
    pub is_stochastic: bool,
    pub min_entry: f64,
    pub max_column_sum_error: f64,
    /// `max |Γ̃ Γ(t′) − Γ(t)|`.
    pub reconstruction_error: f64,
    pub smallest_singular_value: f64,
}

fn checked_inverse(m: &RMatrix) -> Result<(RMatrix, f64)> {
    let smallest = m.singular_values().last().copied().unwrap_or(0.0);
    if smallest < MIN_SINGULAR_VALUE {
        return Err(Error::Singular {
            smallest_singular_value: smallest,
        });
    }
    let inv = m.try_inverse().ok_or(Error::Singular {
        smallest_singular_value: smallest,
    })?;
    Ok((inv, smallest))
}

/// Forms the intermediate `Γ̃(t←t′)` that would make the process divisible
/// at `t′`, and reports whether it is a genuine stochastic matrix.
pub fn candidate_intermediate(
    gamma_t: &TransitionMatrix,
    gamma_tp: &TransitionMatrix,
    tol: Tolerance,
) -> Result<DivisibilityReport> {
    if gamma_t.dim() != gamma_tp.dim() {
        return Err(Error::dim(format!(
            "transition matrices of size {} and {}",
            gamma_t.dim(),
            gamma_tp.dim()
        )));
    }
    if !same_time(gamma_t.anchor_time(), gamma_tp.anchor_time()) {
        return Err(Error::InvalidArgument(format!(
            "anchors differ: {} vs {}",
            gamma_t.anchor_time(),
            gamma_tp.anchor_time()
        )));
    }
    let (inv, smallest) = checked_inverse(gamma_tp.matrix())?;
    let candidate = gamma_t.matrix() * &inv;
    let reconstruction_error = (&candidate * gamma_tp.matrix()).max_abs_diff(gamma_t.matrix());
    if reconstruction_error > tol.alg() {
        return Err(Error::invalid(format!(
            "intermediate does not reproduce Γ(t) (error {reconstruction_error:.3e}); Γ(t′) is too ill-conditioned"
        )));
    }
    let (min_entry, max_column_sum_error) = stochastic_deviation(&candidate);
    Ok(DivisibilityReport {
        target_time: gamma_t.target_time(),
        split_time: gamma_tp.target_time(),
        is_stochastic: min_entry >= -tol.alg() && max_column_sum_error <= tol.alg(),
        candidate,
        min_entry,
        max_column_sum_error,
        reconstruction_error,
        smallest_singular_value: smallest,
    })
}

/// A configuration space with sampled transition matrices, all anchored at
/// one division event, and an initial distribution.
///
/// Only the sampled times are known; nothing is interpolated between them.
#[derive(Debug, Clone)]
pub struct Process {
    anchor_time: f64,
    initial: ProbVector,
    samples: Vec<TransitionMatrix>,
}

#[derive(Serialize, Deserialize)]
struct ProcessFile {
    dim: usize,
    #[serde(default)]
    anchor_time: f64,
    initial: Vec<f64>,
    samples: Vec<SampleFile>,
}

#[derive(Serialize, Deserialize)]
struct SampleFile {
    t: f64,
    gamma: RMatrix,
}

impl Process {
    /// Samples may arrive in any order; they are stored sorted by time.
    pub fn new(
        initial: ProbVector,
        anchor_time: f64,
        samples: Vec<(f64, RMatrix)>,
        tol: Tolerance,
    ) -> Result<Self> {
        let n = initial.dim();
        let mut stored = Vec::with_capacity(samples.len());
        for (t, gamma) in samples {
            if !t.is_finite() {
                return Err(Error::invalid("sample time must be finite"));
            }
            if gamma.shape() != (n, n) {
                return Err(Error::dim(format!(
                    "sample at t = {t} is {}x{}, expected {n}x{n}",
                    gamma.rows(),
                    gamma.cols()
                )));
            }
            let tm = TransitionMatrix::new(gamma, tol)
                .map_err(|e| Error::invalid(format!("sample at t = {t}: {e}")))?
                .at(t)
                .anchored_at(anchor_time);
            if same_time(t, anchor_time)
                && tm.matrix().max_abs_diff(&RMatrix::identity(n)) > tol.alg()
            {
                return Err(Error::invalid(format!(
                    "sample at the anchor time {t} must be the identity"
                )));
            }
            stored.push(tm);
        }
        stored.sort_by(|a, b| a.target_time().total_cmp(&b.target_time()));
        if let Some(w) = stored
            .windows(2)
            .find(|w| same_time(w[0].target_time(), w[1].target_time()))
        {
            return Err(Error::invalid(format!(
                "duplicate sample time {}",
                w[0].target_time()
            )));
        }
        Ok(Self {
            anchor_time,
            initial,
            samples: stored,
        })
    }

    /// Parses the process file format
    /// `{dim, anchor_time, initial, samples: [{t, gamma}]}`.
    pub fn from_json_str(text: &str, tol: Tolerance) -> Result<Self> {
        let file: ProcessFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_file(file, tol)
    }

    pub fn from_json_value(value: serde_json::Value, tol: Tolerance) -> Result<Self> {
        let file: ProcessFile =
            serde_json::from_value(value).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_file(file, tol)
    }

    fn from_file(file: ProcessFile, tol: Tolerance) -> Result<Self> {
        let initial = ProbVector::new(file.initial, tol)?;
        if initial.dim() != file.dim {
            return Err(Error::dim(format!(
                "initial distribution has {} entries, dim is {}",
                initial.dim(),
                file.dim
            )));
        }
        let samples = file.samples.into_iter().map(|s| (s.t, s.gamma)).collect();
        Self::new(initial, file.anchor_time, samples, tol)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let file = ProcessFile {
            dim: self.dim(),
            anchor_time: self.anchor_time,
            initial: self.initial.values().to_vec(),
            samples: self
                .samples
                .iter()
                .map(|s| SampleFile {
                    t: s.target_time(),
                    gamma: s.matrix().clone(),
                })
                .collect(),
        };
        serde_json::to_value(file).expect("process serializes")
    }

    pub fn dim(&self) -> usize {
        self.initial.dim()
    }

    pub fn anchor_time(&self) -> f64 {
        self.anchor_time
    }

    pub fn initial(&self) -> &ProbVector {
        &self.initial
    }

    pub fn samples(&self) -> &[TransitionMatrix] {
        &self.samples
    }

    /// The transition matrix at `t`. The anchor itself always resolves to
    /// the identity.
    pub fn sample_at(&self, t: f64) -> Result<TransitionMatrix> {
        if let Some(s) = self.samples.iter().find(|s| same_time(s.target_time(), t)) {
            return Ok(s.clone());
        }
        if same_time(t, self.anchor_time) {
            return Ok(TransitionMatrix::identity(self.dim())
                .at(self.anchor_time)
                .anchored_at(self.anchor_time));
        }
        Err(Error::MissingSample { time: t })
    }

    /// `p(t) = Γ(t) p(anchor)`.
    pub fn distribution_at(&self, t: f64, tol: Tolerance) -> Result<ProbVector> {
        propagate(&self.sample_at(t)?, &self.initial, tol)
    }
}

/// Checks whether the process admits a stochastic intermediate at `t′` via
/// `Γ(t←t₀) Γ(t′←t₀)⁻¹`.
pub fn is_divisible_at(
    process: &Process,
    t: f64,
    t_prime: f64,
    tol: Tolerance,
) -> Result<DivisibilityReport> {
    let gamma_t = process.sample_at(t)?;
    let gamma_tp = process.sample_at(t_prime)?;
    candidate_intermediate(&gamma_t, &gamma_tp, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum InverseClass {
    /// The matrix is a permutation, so its inverse is also stochastic.
    PermutationBothStochastic,
    /// The inverse has columns summing to 1 but some negative entry.
    InversePseudoStochastic,
}

#[derive(Debug, Clone, Serialize)]
pub struct InverseClassification {
    pub class: InverseClass,
    pub inverse: RMatrix,
    pub inverse_min_entry: f64,
    pub inverse_max_column_sum_error: f64,
}

/// True when every entry is within `tol` of 0 or 1 and each row and column
/// holds exactly one 1.
pub fn is_permutation(m: &RMatrix, tol: f64) -> bool {
    if !m.is_square() {
        return false;
    }
    let n = m.rows();
    let one = |x: f64| (x - 1.0).abs() <= tol;
    let zero = |x: f64| x.abs() <= tol;
    if !(0..n).all(|i| (0..n).all(|j| one(m[(i, j)]) || zero(m[(i, j)]))) {
        return false;
    }
    let rows_ok = (0..n).all(|i| (0..n).filter(|&j| one(m[(i, j)])).count() == 1);
    let cols_ok = (0..n).all(|j| (0..n).filter(|&i| one(m[(i, j)])).count() == 1);
    rows_ok && cols_ok
}

/// Classifies the inverse of an invertible stochastic matrix. Only
/// permutations have stochastic inverses; every other inverse keeps unit
/// column sums but must contain a negative entry.
pub fn stochastic_inverse_classify(
    gamma: &RMatrix,
    tol: Tolerance,
) -> Result<InverseClassification> {
    require_stochastic(gamma, tol.alg())?;
    let (inverse, _) = checked_inverse(gamma)?;
    let (inverse_min_entry, inverse_max_column_sum_error) = stochastic_deviation(&inverse);
    let class = if is_permutation(gamma, tol.alg()) {
        InverseClass::PermutationBothStochastic
    } else {
        InverseClass::InversePseudoStochastic
    };
    Ok(InverseClassification {
        class,
        inverse,
        inverse_min_entry,
        inverse_max_column_sum_error,
    })
}
