use serde::{Deserialize, Serialize};

use crate::state::ProcState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    ExhaustedBudget,
}

/// A configuration named in a witness, with an optional label for the step
/// that led to it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathStep {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub via: Option<String>,
    pub state: Vec<ProcState>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Witness {
    /// A trace record index.
    Step { index: u64 },
    /// The `(m, n)` pair of a two-phase recovery and the phase start `w`.
    Phases { w: u64, m: u64, n: u64 },
    /// A trace record at which a property was violated.
    Violation { index: u64, detail: String },
    /// A single transition leaving the checked predicate.
    Transition { from: Vec<ProcState>, step: String, to: Vec<ProcState> },
    /// A path from an initial state. When `cycle_from` is set, the states from
    /// that position on form a closed set never reaching the target.
    Path {
        steps: Vec<PathStep>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cycle_from: Option<usize>,
    },
    /// Per-seed failures of a batched check.
    Runs { failing_seeds: Vec<u64> },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stats {
    #[serde(default, skip_serializing_if = "is_zero")]
    pub states_explored: u64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub transitions: u64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub steps_taken: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diameter: Option<u64>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub runs: u64,
}

fn is_zero(x: &u64) -> bool {
    *x == 0
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub property: String,
    pub verdict: Verdict,
    /// The property held only because its premise never occurred.
    #[serde(default, skip_serializing_if = "is_false")]
    pub vacuous: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
    pub message: String,
    #[serde(default)]
    pub stats: Stats,
}

impl CheckReport {
    pub fn pass(property: &str, message: impl Into<String>) -> Self {
        CheckReport {
            property: property.to_string(),
            verdict: Verdict::Pass,
            vacuous: false,
            witness: None,
            message: message.into(),
            stats: Stats::default(),
        }
    }

    pub fn fail(property: &str, witness: Witness, message: impl Into<String>) -> Self {
        CheckReport {
            verdict: Verdict::Fail,
            witness: Some(witness),
            ..CheckReport::pass(property, message)
        }
    }

    pub fn exhausted(property: &str, message: impl Into<String>) -> Self {
        CheckReport {
            verdict: Verdict::ExhaustedBudget,
            ..CheckReport::pass(property, message)
        }
    }

    pub fn with_witness(mut self, w: Witness) -> Self {
        self.witness = Some(w);
        self
    }

    pub fn with_stats(mut self, stats: Stats) -> Self {
        self.stats = stats;
        self
    }

    pub fn vacuous(mut self) -> Self {
        self.vacuous = true;
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
