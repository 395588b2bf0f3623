//! Guarded-command semantics of the auditable restoration protocol.
//!
//! Every action is a pure function from a [`Configuration`] to a new
//! configuration that differs only in the firing process's variables. The
//! unbounded variant has actions `AR1`..`AR11`, the bounded variant `B1`..`B12`.

mod apply;
mod guard;

pub use apply::apply_action;
pub use guard::{eval_guard, gd};

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

use crate::counter::{CounterError, ModeKind};
use crate::state::Configuration;
use crate::tree::TreeError;
use crate::Pid;

/// Action labels of both protocol variants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    #[serde(rename = "AR1")]
    Ar1,
    #[serde(rename = "AR2")]
    Ar2,
    #[serde(rename = "AR3")]
    Ar3,
    #[serde(rename = "AR4")]
    Ar4,
    #[serde(rename = "AR5")]
    Ar5,
    #[serde(rename = "AR6")]
    Ar6,
    #[serde(rename = "AR7")]
    Ar7,
    #[serde(rename = "AR8")]
    Ar8,
    #[serde(rename = "AR9")]
    Ar9,
    #[serde(rename = "AR10")]
    Ar10,
    #[serde(rename = "AR11")]
    Ar11,
    B1,
    B2,
    B3,
    B4,
    B5,
    B6,
    B7,
    B8,
    B9,
    B10,
    B11,
    B12,
}

/// What an action does, independent of the variant it belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Role {
    Detect,
    PropagateOtsn,
    StartNotify,
    ForwardNotify,
    Echo,
    PropagateCtsn,
    StartRestore,
    ForwardRestore,
    CompleteRestore,
    Correct,
    TreeCorrection,
    ResetOtsn,
}

impl Action {
    pub const UNBOUNDED: [Action; 11] = [
        Action::Ar1,
        Action::Ar2,
        Action::Ar3,
        Action::Ar4,
        Action::Ar5,
        Action::Ar6,
        Action::Ar7,
        Action::Ar8,
        Action::Ar9,
        Action::Ar10,
        Action::Ar11,
    ];

    pub const BOUNDED: [Action; 12] = [
        Action::B1,
        Action::B2,
        Action::B3,
        Action::B4,
        Action::B5,
        Action::B6,
        Action::B7,
        Action::B8,
        Action::B9,
        Action::B10,
        Action::B11,
        Action::B12,
    ];

    /// All labels of a variant, in label order.
    pub fn for_mode(kind: ModeKind) -> &'static [Action] {
        match kind {
            ModeKind::Unbounded => &Self::UNBOUNDED,
            ModeKind::Bounded => &Self::BOUNDED,
        }
    }

    pub fn kind(self) -> ModeKind {
        if (self as u8) <= Action::Ar11 as u8 {
            ModeKind::Unbounded
        } else {
            ModeKind::Bounded
        }
    }

    /// 1-based number within its variant.
    pub fn number(self) -> u8 {
        match self.kind() {
            ModeKind::Unbounded => self as u8 + 1,
            ModeKind::Bounded => self as u8 - Action::B1 as u8 + 1,
        }
    }

    pub fn label(self) -> String {
        match self.kind() {
            ModeKind::Unbounded => format!("AR{}", self.number()),
            ModeKind::Bounded => format!("B{}", self.number()),
        }
    }

    pub fn parse(label: &str) -> Option<Action> {
        let (kind, digits) = if let Some(d) = label.strip_prefix("AR") {
            (ModeKind::Unbounded, d)
        } else if let Some(d) = label.strip_prefix('B') {
            (ModeKind::Bounded, d)
        } else {
            return None;
        };
        let k: usize = digits.parse().ok()?;
        Action::for_mode(kind).get(k.checked_sub(1)?).copied()
    }

    pub(crate) fn role(self) -> Role {
        use Action::*;
        match self {
            Ar1 | B1 => Role::Detect,
            Ar2 | B2 => Role::PropagateOtsn,
            Ar3 | B3 => Role::StartNotify,
            Ar4 | B4 => Role::ForwardNotify,
            Ar5 | B5 => Role::Echo,
            Ar6 | B6 => Role::PropagateCtsn,
            Ar7 | B7 => Role::StartRestore,
            Ar8 | B8 => Role::ForwardRestore,
            Ar9 | B9 => Role::CompleteRestore,
            Ar10 | B10 => Role::Correct,
            Ar11 | B11 => Role::TreeCorrection,
            B12 => Role::ResetOtsn,
        }
    }

    /// `AR2`/`AR6` and `B2`/`B6` run ahead of everything else.
    pub fn is_priority(self) -> bool {
        matches!(self.role(), Role::PropagateOtsn | Role::PropagateCtsn)
    }

    pub fn is_detection(self) -> bool {
        self.role() == Role::Detect
    }

    pub fn is_restore_start(self) -> bool {
        self.role() == Role::StartRestore
    }

    pub fn is_restore_completion(self) -> bool {
        self.role() == Role::CompleteRestore
    }

    pub fn is_tree_correction(self) -> bool {
        self.role() == Role::TreeCorrection
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error("action {action} does not belong to {mode:?} mode")]
    ModeMismatch { action: Action, mode: ModeKind },
    #[error("no process {0}")]
    UnknownProcess(Pid),
    #[error("process {0} has fail-stopped")]
    DeadProcess(Pid),
    #[error("guard of {action} is false at process {pid}")]
    GuardFalse { action: Action, pid: Pid },
    #[error(transparent)]
    Counter(#[from] CounterError),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

pub(crate) fn check_call(cfg: &Configuration, pid: Pid, action: Action) -> Result<(), ProtocolError> {
    if action.kind() != cfg.mode.kind {
        return Err(ProtocolError::ModeMismatch {
            action,
            mode: cfg.mode.kind,
        });
    }
    if pid >= cfg.n() {
        return Err(ProtocolError::UnknownProcess(pid));
    }
    if !cfg.alive(pid) {
        return Err(ProtocolError::DeadProcess(pid));
    }
    Ok(())
}

/// Every action of the configuration's variant whose guard holds at `pid`,
/// in label order. Empty for a dead process.
pub fn enabled(cfg: &Configuration, pid: Pid) -> Vec<Action> {
    if pid >= cfg.n() || !cfg.alive(pid) {
        return Vec::new();
    }
    Action::for_mode(cfg.mode.kind)
        .iter()
        .copied()
        .filter(|&a| eval_guard(cfg, pid, a).unwrap_or(false))
        .collect()
}

/// All enabled `(pid, action)` pairs over alive processes.
pub fn enabled_everywhere(cfg: &Configuration) -> Vec<(Pid, Action)> {
    (0..cfg.n())
        .flat_map(|pid| enabled(cfg, pid).into_iter().map(move |a| (pid, a)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_round_trip() {
        for &a in Action::UNBOUNDED.iter().chain(Action::BOUNDED.iter()) {
            assert_eq!(Action::parse(&a.label()), Some(a));
            let json = serde_json::to_string(&a).unwrap();
            assert_eq!(json, format!("\"{}\"", a.label()));
        }
        assert_eq!(Action::parse("AR12"), None);
        assert_eq!(Action::parse("B0"), None);
    }

    #[test]
    fn priority_set() {
        let p: Vec<_> = Action::UNBOUNDED.iter().filter(|a| a.is_priority()).collect();
        assert_eq!(p, [&Action::Ar2, &Action::Ar6]);
        let p: Vec<_> = Action::BOUNDED.iter().filter(|a| a.is_priority()).collect();
        assert_eq!(p, [&Action::B2, &Action::B6]);
    }
}
