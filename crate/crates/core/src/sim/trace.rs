use serde::{Deserialize, Serialize};
use std::sync::Arc;
use thiserror::Error;

use crate::counter::ModeKind;
use crate::protocol::Action;
use crate::sim::inject::InjectionKind;
use crate::state::{Configuration, ProcState};
use crate::topology::Topology;
use crate::Pid;

/// Full snapshots are stored every this many records.
pub const SNAPSHOT_EVERY: u64 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Actor {
    Environment,
    Process(Pid),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum StepLabel {
    Init,
    Action { action: Action },
    Injection { injection: InjectionKind, target: Option<Pid> },
    Dropped { injection: InjectionKind, reason: String },
    Stutter,
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// Predicate transitions and events observed at a step's post-configuration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Markers {
    #[serde(default, skip_serializing_if = "is_false")]
    pub entered_s1: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    pub entered_s2: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    pub restore_complete: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub index: u64,
    /// Protocol-step counter the record belongs to.
    pub tick: u64,
    pub actor: Actor,
    pub label: StepLabel,
    /// Process states that changed, as they are after the step.
    pub delta: Vec<ProcState>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot: Option<Vec<ProcState>>,
    #[serde(default)]
    pub markers: Markers,
}

impl StepRecord {
    pub fn action(&self) -> Option<(Pid, Action)> {
        match (&self.actor, &self.label) {
            (Actor::Process(pid), StepLabel::Action { action }) => Some((*pid, *action)),
            _ => None,
        }
    }

    pub fn injection(&self) -> Option<&InjectionKind> {
        match &self.label {
            StepLabel::Injection { injection, .. } => Some(injection),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunEnd {
    BudgetExhausted,
    Stopped,
}

/// The record of one run. Record `i`'s post-configuration is configuration
/// `i`; record 0 is the initial configuration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub topology: Topology,
    pub mode: ModeKind,
    pub seed: u64,
    pub records: Vec<StepRecord>,
    pub end: RunEnd,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TraceError {
    #[error("trace is empty")]
    Empty,
    #[error("record {0} must be an init record with a snapshot")]
    BadStart(u64),
    #[error("record indices not strictly increasing at position {0}")]
    NonMonotone(usize),
    #[error("delta at record {index} names unknown process {pid}")]
    BadDelta { index: u64, pid: Pid },
    #[error("replayed configuration disagrees with stored snapshot at record {0}")]
    SnapshotMismatch(u64),
}

impl Trace {
    /// Reconstruct every configuration by replaying deltas from record 0,
    /// checking each stored snapshot along the way.
    pub fn configurations(&self) -> Result<Vec<Configuration>, TraceError> {
        let first = self.records.first().ok_or(TraceError::Empty)?;
        let start = match (&first.label, &first.snapshot) {
            (StepLabel::Init, Some(s)) => s.clone(),
            _ => return Err(TraceError::BadStart(first.index)),
        };
        let topo = Arc::new(self.topology.clone());
        let mut cur = Configuration::new_unchecked(topo, self.mode, start);
        let mut out = Vec::with_capacity(self.records.len());
        out.push(cur.clone());
        for (pos, rec) in self.records.iter().enumerate().skip(1) {
            if rec.index <= self.records[pos - 1].index {
                return Err(TraceError::NonMonotone(pos));
            }
            for p in &rec.delta {
                if p.id >= cur.n() {
                    return Err(TraceError::BadDelta {
                        index: rec.index,
                        pid: p.id,
                    });
                }
                cur.procs[p.id] = *p;
            }
            if let Some(snap) = &rec.snapshot {
                if snap != &cur.procs {
                    return Err(TraceError::SnapshotMismatch(rec.index));
                }
            }
            out.push(cur.clone());
        }
        Ok(out)
    }

    /// Index of the last auditable-event or fault injection (applied or
    /// dropped). Authorizations are input to the program, not disturbances.
    pub fn last_disturbance(&self) -> Option<usize> {
        self.records.iter().rposition(|r| match &r.label {
            StepLabel::Injection { injection, .. } | StepLabel::Dropped { injection, .. } => {
                injection.is_disturbance()
            }
            _ => false,
        })
    }

    /// Index of the last injection of any kind.
    pub fn last_injection(&self) -> Option<usize> {
        self.records
            .iter()
            .rposition(|r| matches!(r.label, StepLabel::Injection { .. } | StepLabel::Dropped { .. }))
    }

    pub fn auditable_events(&self) -> usize {
        self.records
            .iter()
            .filter(|r| matches!(r.injection(), Some(InjectionKind::AuditableEvent { .. })))
            .count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    pub fn from_json(text: &str) -> Result<Trace, serde_json::Error> {
        serde_json::from_str(text)
    }
}

/// Process states that differ between two configurations.
pub fn delta(before: &Configuration, after: &Configuration) -> Vec<ProcState> {
    before
        .procs
        .iter()
        .zip(&after.procs)
        .filter(|(a, b)| a != b)
        .map(|(_, b)| *b)
        .collect()
}
