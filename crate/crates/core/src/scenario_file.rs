//! JSON scenario documents.
//!
//! ```json
//! {
//!   "topology": {"n": 3, "edges": [[0, 1], [1, 2]]},
//!   "mode": "unbounded",
//!   "init": "legitimate",
//!   "injections": [{"step": 0, "kind": "ae", "pid": 2}, {"step": 40, "kind": "authorize"}],
//!   "scheduler": "uniform",
//!   "seed": 7,
//!   "max_steps": 500,
//!   "stop": "s1_quiescent"
//! }
//! ```
//!
//! `init` is `"legitimate"`, `"random"`, `"random_t"` (uniform over the
//! fault-span) or `{"explicit": [ProcState, ...]}`. Injection kinds are `ae`,
//! `fail_stop`, `revive`, `corrupt` (with `field` and `value`; a status value
//! may be given by name) and `authorize`. `auto_authorize: true` authorizes
//! the leader whenever it reports every process aware.

use serde::{Deserialize, Serialize};
use std::sync::Arc;
use thiserror::Error;

use crate::counter::ModeKind;
use crate::sim::{Field, InitPolicy, Injection, InjectionKind, Scenario, ScenarioError, SchedulerPolicy, StopCondition};
use crate::state::{ProcState, Status};
use crate::topology::Topology;
use crate::Pid;

#[derive(Debug, Error)]
pub enum ScenarioFileError {
    #[error("{0}")]
    Syntax(#[from] serde_json::Error),
    #[error("injections[{index}]: {message}")]
    Injection { index: usize, message: String },
    #[error(transparent)]
    Invalid(#[from] ScenarioError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawInitName {
    Legitimate,
    Random,
    RandomT,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExplicit {
    explicit: Vec<ProcState>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum RawInit {
    Named(RawInitName),
    Explicit(RawExplicit),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum RawValue {
    Int(u64),
    Name(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInjection {
    step: u64,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pid: Option<Pid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    field: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    value: Option<RawValue>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RawScheduler {
    #[default]
    Uniform,
    Roundrobin,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    topology: Topology,
    mode: ModeKind,
    init: RawInit,
    #[serde(default)]
    injections: Vec<RawInjection>,
    #[serde(default)]
    scheduler: RawScheduler,
    seed: u64,
    max_steps: u64,
    #[serde(default)]
    stop: StopCondition,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    auto_authorize: bool,
}

fn injection_from_raw(index: usize, raw: &RawInjection) -> Result<Injection, ScenarioFileError> {
    let err = |message: String| ScenarioFileError::Injection { index, message };
    let pid = || raw.pid.ok_or_else(|| err(format!("kind \"{}\" needs \"pid\"", raw.kind)));
    let no_extra = |allow_pid: bool| {
        if !allow_pid && raw.pid.is_some() {
            return Err(err(format!("kind \"{}\" takes no \"pid\"", raw.kind)));
        }
        if raw.field.is_some() || raw.value.is_some() {
            return Err(err(format!("kind \"{}\" takes no \"field\"/\"value\"", raw.kind)));
        }
        Ok(())
    };
    let kind = match raw.kind.as_str() {
        "ae" => {
            no_extra(true)?;
            InjectionKind::AuditableEvent { pid: pid()? }
        }
        "fail_stop" => {
            no_extra(true)?;
            InjectionKind::FailStop { pid: pid()? }
        }
        "revive" => {
            no_extra(true)?;
            InjectionKind::Revive { pid: pid()? }
        }
        "authorize" => {
            no_extra(false)?;
            InjectionKind::Authorize
        }
        "corrupt" => {
            let pid = pid()?;
            let name = raw.field.as_deref().ok_or_else(|| err("kind \"corrupt\" needs \"field\"".into()))?;
            let field = Field::parse(name).ok_or_else(|| {
                let names: Vec<_> = Field::ALL.iter().map(|f| f.name()).collect();
                err(format!("unknown field \"{name}\", expected one of {}", names.join(", ")))
            })?;
            let value = match (&raw.value, field) {
                (None, _) => return Err(err("kind \"corrupt\" needs \"value\"".into())),
                (Some(RawValue::Int(v)), _) => *v,
                (Some(RawValue::Name(s)), Field::Status) => Status::from_name(s)
                    .ok_or_else(|| err(format!("unknown status \"{s}\"")))?
                    .index(),
                (Some(RawValue::Name(s)), _) => return Err(err(format!("value \"{s}\" for {field} must be an integer"))),
            };
            InjectionKind::Corrupt { pid, field, value }
        }
        other => {
            return Err(err(format!(
                "unknown kind \"{other}\", expected one of ae, fail_stop, revive, corrupt, authorize"
            )))
        }
    };
    Ok(Injection {
        at_step: raw.step,
        kind,
    })
}

fn injection_to_raw(inj: &Injection) -> RawInjection {
    let (kind, pid, field, value) = match &inj.kind {
        InjectionKind::AuditableEvent { pid } => ("ae", Some(*pid), None, None),
        InjectionKind::FailStop { pid } => ("fail_stop", Some(*pid), None, None),
        InjectionKind::Revive { pid } => ("revive", Some(*pid), None, None),
        InjectionKind::Authorize => ("authorize", None, None, None),
        InjectionKind::Corrupt { pid, field, value } => {
            let value = match field {
                Field::Status => RawValue::Name(Status::from_index(*value).expect("validated").to_string()),
                _ => RawValue::Int(*value),
            };
            ("corrupt", Some(*pid), Some(field.name().to_string()), Some(value))
        }
    };
    RawInjection {
        step: inj.at_step,
        kind: kind.to_string(),
        pid,
        field,
        value,
    }
}

/// Parse and validate a scenario document.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioFileError> {
    let raw: RawScenario = serde_json::from_str(text)?;
    let injections = raw
        .injections
        .iter()
        .enumerate()
        .map(|(i, r)| injection_from_raw(i, r))
        .collect::<Result<Vec<_>, _>>()?;
    let init = match raw.init {
        RawInit::Named(RawInitName::Legitimate) => InitPolicy::Legitimate,
        RawInit::Named(RawInitName::Random) => InitPolicy::ArbitraryRandom,
        RawInit::Named(RawInitName::RandomT) => InitPolicy::RandomT,
        RawInit::Explicit(e) => InitPolicy::Explicit(e.explicit),
    };
    let scenario = Scenario {
        topology: Arc::new(raw.topology),
        mode: raw.mode,
        init,
        injections,
        scheduler: match raw.scheduler {
            RawScheduler::Uniform => SchedulerPolicy::UniformRandom,
            RawScheduler::Roundrobin => SchedulerPolicy::RoundRobin,
        },
        seed: raw.seed,
        max_steps: raw.max_steps,
        stop: raw.stop,
        auto_authorize: raw.auto_authorize,
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Serialize a scenario in the document format [`parse_scenario`] reads.
pub fn scenario_to_json(s: &Scenario) -> String {
    let raw = RawScenario {
        topology: (*s.topology).clone(),
        mode: s.mode,
        init: match &s.init {
            InitPolicy::Legitimate => RawInit::Named(RawInitName::Legitimate),
            InitPolicy::ArbitraryRandom => RawInit::Named(RawInitName::Random),
            InitPolicy::RandomT => RawInit::Named(RawInitName::RandomT),
            InitPolicy::Explicit(p) => RawInit::Explicit(RawExplicit { explicit: p.clone() }),
        },
        injections: s.injections.iter().map(injection_to_raw).collect(),
        scheduler: match s.scheduler {
            SchedulerPolicy::UniformRandom => RawScheduler::Uniform,
            SchedulerPolicy::RoundRobin => RawScheduler::Roundrobin,
        },
        seed: s.seed,
        max_steps: s.max_steps,
        stop: s.stop,
        auto_authorize: s.auto_authorize,
    };
    serde_json::to_string_pretty(&raw).expect("scenario serializes")
}
