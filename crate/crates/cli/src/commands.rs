use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use thiserror::Error;

use arsim_core::checker::{
    self, check_as_window, check_closure, check_convergence, check_notify, check_two_phase, check_unison, predicate,
    CheckReport, Goal,
};
use arsim_core::scenario_file::{parse_scenario, ScenarioFileError};
use arsim_core::sim::{Scenario, SimError, StepLabel, Trace};
use arsim_core::PredicateId;

use crate::{Property, Target};

pub const SEED_VAR: &str = "AR_SIM_SEED";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Scenario { path: PathBuf, source: ScenarioFileError },
    #[error("{SEED_VAR}={0:?} is not an unsigned integer")]
    Seed(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    TraceCheck(#[from] checker::TraceCheckError),
    #[error(transparent)]
    Closure(#[from] checker::CheckError),
    #[error(transparent)]
    Explore(#[from] checker::ExploreError),
    #[error("explore refused: {0}")]
    Refused(String),
}

/// A command's result: the JSON value every renderer works from.
pub struct Outcome {
    pub value: Value,
    pub passed: bool,
}

pub fn load(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let mut scenario = parse_scenario(&text).map_err(|source| CliError::Scenario {
        path: path.to_path_buf(),
        source,
    })?;
    if let Ok(raw) = std::env::var(SEED_VAR) {
        scenario.seed = raw.trim().parse().map_err(|_| CliError::Seed(raw))?;
    }
    Ok(scenario)
}

fn label(l: &StepLabel) -> String {
    match l {
        StepLabel::Init => "init".into(),
        StepLabel::Action { action } => action.label(),
        StepLabel::Injection { injection, .. } => injection.to_string(),
        StepLabel::Dropped { injection, reason } => format!("dropped {injection} ({reason})"),
        StepLabel::Stutter => "stutter".into(),
    }
}

fn summarize(trace: &Trace) -> Result<Value, CliError> {
    let mut log = Vec::new();
    let mut marks = [Vec::new(), Vec::new(), Vec::new()];
    for r in &trace.records {
        let mut m = Vec::new();
        for (i, (on, name)) in [
            (r.markers.entered_s2, "entered S2"),
            (r.markers.entered_s1, "entered S1"),
            (r.markers.restore_complete, "restore complete"),
        ]
        .into_iter()
        .enumerate()
        {
            if on {
                m.push(name);
                marks[i].push(r.index);
            }
        }
        if r.label == StepLabel::Stutter && m.is_empty() {
            continue;
        }
        let actor = match r.actor {
            arsim_core::sim::Actor::Environment => "env".to_string(),
            arsim_core::sim::Actor::Process(p) => format!("p{p}"),
        };
        log.push(json!({
            "index": r.index,
            "tick": r.tick,
            "actor": actor,
            "event": label(&r.label),
            "markers": m,
        }));
    }
    let last = trace.configurations().map_err(checker::TraceCheckError::from)?.pop().expect("trace has an init record");
    let holds = |p| predicate::eval_predicate(&last, p).unwrap_or(false);
    Ok(json!({
        "command": "run",
        "n": trace.topology.n(),
        "mode": trace.mode,
        "seed": trace.seed,
        "end": trace.end,
        "records": trace.records.len(),
        "steps": trace.records.last().map_or(0, |r| r.tick + 1),
        "entered_s2": marks[0],
        "entered_s1": marks[1],
        "restore_complete": marks[2],
        "final": {
            "S1": holds(PredicateId::S1),
            "S2": holds(PredicateId::S2),
            "T": holds(PredicateId::T),
        },
        "log": log,
    }))
}

pub fn run(path: &Path, trace_out: Option<&Path>) -> Result<Outcome, CliError> {
    let scenario = load(path)?;
    let trace = arsim_core::sim::run(&scenario)?;
    let mut value = summarize(&trace)?;
    if let Some(out) = trace_out {
        std::fs::write(out, trace.to_json() + "\n").map_err(|source| CliError::Write {
            path: out.to_path_buf(),
            source,
        })?;
        value["trace_out"] = json!(out.display().to_string());
    }
    Ok(Outcome { value, passed: true })
}

fn report_outcome(report: CheckReport) -> Outcome {
    let passed = report.passed();
    let value = serde_json::to_value(&report).expect("report serializes");
    Outcome { value, passed }
}

pub fn check(path: &Path, property: Property, burn_in: u64) -> Result<Outcome, CliError> {
    let scenario = load(path)?;
    let report = if property == Property::ClosureT {
        check_closure(&scenario.topology, PredicateId::T, scenario.mode, true)?
    } else {
        let trace = arsim_core::sim::run(&scenario)?;
        match property {
            Property::S1Convergence => check_convergence(&trace, PredicateId::S1)?,
            Property::TwoPhase => check_two_phase(&trace)?,
            Property::NotifyLemma => check_notify(&trace)?,
            Property::Unison => check_unison(&trace, burn_in)?,
            Property::AsWindow => check_as_window(&trace)?,
            Property::ClosureT => unreachable!("handled above"),
        }
    };
    Ok(report_outcome(report))
}

fn refusal(e: checker::ExploreError) -> CliError {
    match e {
        checker::ExploreError::TooManyStates(_) | checker::ExploreError::Unsupported(_) => CliError::Refused(e.to_string()),
        other => other.into(),
    }
}

pub fn explore(path: &Path, target: Target, max_states: usize) -> Result<Outcome, CliError> {
    let scenario = load(path)?;
    let (init, alphabet) = checker::scenario_setup(&scenario, max_states).map_err(refusal)?;
    let goal = match target {
        Target::S1 => Goal::Reach(PredicateId::S1),
        Target::S2 => Goal::TwoPhase,
    };
    let report = checker::explore(&init, &alphabet, goal, max_states).map_err(refusal)?;
    Ok(report_outcome(report))
}
