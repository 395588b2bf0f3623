use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

use crate::counter::Mode;
use crate::protocol::gd;
use crate::state::{Configuration, Status};
use crate::tree;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PredicateId {
    S1,
    S2,
    T,
    AS,
    ASprime,
    ASdoubleprime,
    TreeSilent,
}

impl PredicateId {
    pub const ALL: [PredicateId; 7] = [
        PredicateId::S1,
        PredicateId::S2,
        PredicateId::T,
        PredicateId::AS,
        PredicateId::ASprime,
        PredicateId::ASdoubleprime,
        PredicateId::TreeSilent,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PredicateId::S1 => "S1",
            PredicateId::S2 => "S2",
            PredicateId::T => "T",
            PredicateId::AS => "AS",
            PredicateId::ASprime => "ASprime",
            PredicateId::ASdoubleprime => "ASdoubleprime",
            PredicateId::TreeSilent => "TreeSilent",
        }
    }

    /// Accepts the canonical names case-insensitively, plus `AS'`/`AS''`.
    pub fn parse(s: &str) -> Option<PredicateId> {
        match s {
            "AS'" => return Some(PredicateId::ASprime),
            "AS''" => return Some(PredicateId::ASdoubleprime),
            _ => {}
        }
        PredicateId::ALL.into_iter().find(|p| p.name().eq_ignore_ascii_case(s))
    }

    pub fn bounded_only(self) -> bool {
        matches!(self, PredicateId::ASprime | PredicateId::ASdoubleprime)
    }
}

impl fmt::Display for PredicateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PredicateError {
    #[error("{0} is only defined for bounded mode")]
    BoundedOnly(PredicateId),
}

/// Every alive `otsn.j` equals every alive `ctsn.k`.
pub fn counters_agree(cfg: &Configuration) -> bool {
    let mut it = cfg.alive_procs();
    let Some(first) = it.next() else {
        return true;
    };
    let x = first.otsn;
    first.ctsn == x && it.all(|p| p.otsn == x && p.ctsn == x)
}

pub fn t(cfg: &Configuration) -> bool {
    counters_agree(cfg) && cfg.alive_procs().all(|p| p.status.is_normal())
}

pub fn s1(cfg: &Configuration) -> bool {
    t(cfg)
        && cfg.alive_procs().all(|p| gd(cfg, p.id))
        && tree::is_tree_silent(cfg)
        && tree::forms_tree(cfg)
}

pub fn as_pred(cfg: &Configuration) -> bool {
    let max_otsn = cfg.alive_procs().map(|p| p.otsn).max();
    let max_ctsn = cfg.alive_procs().map(|p| p.ctsn).max();
    max_otsn >= max_ctsn
}

/// The `P.j = j ∧ st.j = ⊤ ⇒ …` conjunct of `S2` (of `S2′` in bounded mode).
pub fn s2_leader_clause(cfg: &Configuration) -> bool {
    let mode = cfg.mode;
    cfg.alive_procs()
        .filter(|j| j.is_root() && j.status == Status::Top)
        .all(|j| {
            cfg.alive_procs().all(|k| {
                if mode.is_bounded() {
                    mode.in_window(k.otsn, j.otsn, mode.window())
                } else {
                    k.otsn >= j.otsn
                }
            })
        })
}

pub fn s2(cfg: &Configuration) -> bool {
    cfg.alive_procs().all(|p| p.status.is_wave()) && s2_leader_clause(cfg)
}

/// `max(ctsn)` read on the ring `0..=N²`: the alive value every other alive
/// value trails by at most `N`. Falls back to the integer maximum when the
/// values are too spread out to have a circular maximum.
pub fn circular_max_ctsn(cfg: &Configuration) -> Option<u64> {
    let mode = cfg.mode;
    let values: Vec<u64> = cfg.alive_procs().map(|p| p.ctsn).collect();
    let int_max = values.iter().copied().max()?;
    if !mode.is_bounded() {
        return Some(int_max);
    }
    let n = mode.window();
    let found = values.iter().copied().find(|&c| {
        let low = mode.wrap_add(c, -(n as i64)).expect("in domain");
        values.iter().all(|&v| mode.in_window(v, low, n))
    });
    Some(found.unwrap_or(int_max))
}

fn as_window(cfg: &Configuration, length: u64) -> bool {
    let mode: Mode = cfg.mode;
    let Some(c) = circular_max_ctsn(cfg) else {
        return true;
    };
    cfg.alive_procs().all(|k| mode.in_window(k.otsn, c, length))
}

pub fn eval_predicate(cfg: &Configuration, p: PredicateId) -> Result<bool, PredicateError> {
    if p.bounded_only() && !cfg.mode.is_bounded() {
        return Err(PredicateError::BoundedOnly(p));
    }
    Ok(match p {
        PredicateId::S1 => s1(cfg),
        PredicateId::S2 => s2(cfg),
        PredicateId::T => t(cfg),
        PredicateId::AS => as_pred(cfg),
        PredicateId::ASprime => as_window(cfg, 1),
        PredicateId::ASdoubleprime => as_window(cfg, cfg.mode.window()),
        PredicateId::TreeSilent => tree::is_tree_silent(cfg),
    })
}
