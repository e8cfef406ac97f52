//! Scenario runner and subcommand front end for `unistoch`.
//!
//! A scenario is a JSON file with `"schema": 1`, a `name`, a `seed`, named
//! `objects` and an ordered list of `tasks`. Running it yields a [`Report`]
//! whose `deterministic` region depends only on the scenario, the seed and
//! the tolerances.

pub mod commands;
pub mod error;
pub mod objects;
pub mod report;
pub mod scenario;
pub mod tasks;

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use unistoch_core::Tolerance;

pub use error::{CliError, CliResult};
pub use report::{Format, Report};
pub use scenario::Scenario;

use objects::Registry;
use report::{Deterministic, TaskReport, Timing, ToleranceReport};
use tasks::{check_references, run_task, TaskContext};

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Overrides the scenario's algebraic tolerance.
    pub tol: Option<f64>,
    /// Overrides the scenario seed.
    pub seed: Option<u64>,
    /// Runs tasks on the rayon pool; report order is unchanged.
    pub parallel: bool,
}

/// Parses scenario text; `source` names the input in error locations.
pub fn parse_scenario(text: &str, source: &str) -> CliResult<Scenario> {
    let scenario: Scenario =
        serde_json::from_str(text).map_err(|e| CliError::from_json(source, &e))?;
    if scenario.schema != scenario::SCHEMA_VERSION {
        return Err(CliError::parse(
            format!("{source}: schema"),
            format!(
                "unsupported schema version {}, expected {}",
                scenario.schema,
                scenario::SCHEMA_VERSION
            ),
        ));
    }
    Ok(scenario)
}

pub fn load_scenario(path: &Path) -> CliResult<Scenario> {
    let source = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| CliError::parse(source.clone(), e))?;
    parse_scenario(&text, &source)
}

fn tolerance(scenario: &Scenario, opts: &RunOptions) -> CliResult<Tolerance> {
    let spec = scenario.tolerance;
    let alg = opts
        .tol
        .or(spec.and_then(|s| s.alg))
        .unwrap_or(Tolerance::DEFAULT_ALG);
    let int = spec.and_then(|s| s.int).unwrap_or(Tolerance::DEFAULT_INT);
    Tolerance::new(alg, int).map_err(|e| CliError::from_core("tolerance", e))
}

/// Resolves objects, checks every task's references, then runs the tasks.
/// `base_dir` anchors relative file paths inside the scenario.
pub fn run_scenario(
    scenario: &Scenario,
    base_dir: Option<&Path>,
    opts: RunOptions,
) -> CliResult<Report> {
    let start = Instant::now();
    let tol = tolerance(scenario, &opts)?;
    let seed = opts.seed.unwrap_or(scenario.seed);
    let registry = Registry::build(&scenario.objects, base_dir, tol)?;
    for (index, spec) in scenario.tasks.iter().enumerate() {
        check_references(
            &spec.task,
            &registry,
            &format!("task {index} ({})", spec.task.kind()),
        )?;
    }

    let run_one = |(index, spec): (usize, &scenario::TaskSpec)| -> CliResult<TaskReport> {
        let ctx = TaskContext {
            registry: &registry,
            tol,
            seed,
            index,
        };
        let outcome = run_task(&spec.task, &ctx)?;
        let expected = outcome.verdict.map(|_| spec.expect);
        Ok(TaskReport {
            index,
            kind: spec.task.kind(),
            label: spec.label.clone(),
            verdict: outcome.verdict,
            expected,
            passed: outcome.verdict.is_none_or(|v| v == spec.expect),
            result: outcome.result,
        })
    };
    let tasks = if opts.parallel {
        // Collect everything first so the reported error is the lowest-index one.
        let results: Vec<CliResult<TaskReport>> =
            scenario.tasks.par_iter().enumerate().map(run_one).collect();
        results.into_iter().collect::<CliResult<Vec<_>>>()?
    } else {
        scenario
            .tasks
            .iter()
            .enumerate()
            .map(run_one)
            .collect::<CliResult<Vec<_>>>()?
    };

    let passed = tasks.iter().all(|t| t.passed);
    Ok(Report {
        deterministic: Deterministic {
            tool: "unistoch",
            version: env!("CARGO_PKG_VERSION"),
            scenario: scenario.name.clone(),
            seed,
            tolerance: ToleranceReport {
                alg: tol.alg(),
                int: tol.int(),
            },
            passed,
            tasks,
        },
        timing: Timing {
            elapsed_ms: start.elapsed().as_secs_f64() * 1e3,
        },
    })
}
