//! Batch front end: config-driven model building, certification, scans,
//! palette checks and witness constructions with machine-readable reports.

pub mod config;
pub mod registry;
pub mod report;
pub mod tasks;

use std::time::Instant;

use config::{Expect, RunConfig, TaskKind, TaskSpec, Tolerances};
use registry::Registry;
use report::{Provenance, TaskReport, SCHEMA};
use tasks::Status;

/// Which tasks of a config a command runs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Selection {
    All,
    Kind(&'static str),
    Witness(String),
}

impl Selection {
    pub fn matches(&self, task: &TaskSpec) -> bool {
        match self {
            Selection::All => true,
            Selection::Kind(k) => task.kind.name() == *k,
            Selection::Witness(name) => matches!(&task.kind, TaskKind::Witness { witness } if witness.name() == name),
        }
    }
}

pub struct RunOutput {
    pub reports: Vec<TaskReport>,
    /// Wall-clock seconds per report, kept out of the reports themselves.
    pub wall_times: Vec<f64>,
}

impl RunOutput {
    pub fn all_ok(&self) -> bool {
        self.reports.iter().all(|r| r.status.is_success())
    }
}

fn run_one(task: &TaskSpec, seed: u64, tol: &Tolerances, reg: &Registry) -> TaskReport {
    let inputs = serde_json::to_value(task).unwrap_or(serde_json::Value::Null);
    let provenance = |truncation| Provenance {
        schema: SCHEMA,
        seed,
        bracket_tolerance: tol.bracket,
        recheck_samples: tol.recheck_samples,
        truncation,
    };
    match tasks::run_task(task, seed, tol, reg) {
        Ok(out) => TaskReport {
            task: task.id.clone(),
            kind: task.kind.name().into(),
            status: Status::from_contract(task.expect, out.contract_met),
            expect: task.expect,
            inputs,
            results: out.results,
            provenance: provenance(out.truncation),
            error: None,
            ladder: out.ladder,
        },
        Err(e) => TaskReport {
            task: task.id.clone(),
            kind: task.kind.name().into(),
            // A diverging scan has to actually run to count as evidence.
            status: if task.expect == Expect::Diverging { Status::Failed } else { Status::from_contract(task.expect, false) },
            expect: task.expect,
            inputs,
            results: serde_json::Value::Null,
            provenance: provenance(None),
            error: Some(e.to_string()),
            ladder: None,
        },
    }
}

/// Runs the selected tasks in config order. A model or operator that fails
/// to build marks every selected task failed instead of aborting.
pub fn run(cfg: &RunConfig, selection: &Selection) -> RunOutput {
    let selected: Vec<&TaskSpec> = cfg.tasks.iter().filter(|t| selection.matches(t)).collect();
    let mut out = RunOutput { reports: Vec::with_capacity(selected.len()), wall_times: Vec::with_capacity(selected.len()) };
    let reg = Registry::build(cfg);
    for task in selected {
        let seed = task.seed.or(cfg.seed).unwrap_or_default();
        let start = Instant::now();
        let report = match &reg {
            Ok(reg) => run_one(task, seed, &cfg.tolerances, reg),
            Err(e) => TaskReport {
                task: task.id.clone(),
                kind: task.kind.name().into(),
                status: Status::Failed,
                expect: task.expect,
                inputs: serde_json::to_value(task).unwrap_or(serde_json::Value::Null),
                results: serde_json::Value::Null,
                provenance: Provenance {
                    schema: SCHEMA,
                    seed,
                    bracket_tolerance: cfg.tolerances.bracket,
                    recheck_samples: cfg.tolerances.recheck_samples,
                    truncation: None,
                },
                error: Some(format!("setup: {e}")),
                ladder: None,
            },
        };
        out.wall_times.push(start.elapsed().as_secs_f64());
        out.reports.push(report);
    }
    out
}
