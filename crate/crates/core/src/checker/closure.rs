//! Exhaustive closure checks: every step from a state in `p` stays in `p`.

use std::sync::Arc;
use thiserror::Error;

use crate::checker::predicate::{eval_predicate, PredicateError, PredicateId};
use crate::checker::report::{CheckReport, Stats, Witness};
use crate::checker::space::{sn_values, SpaceSpec, TreeSpace};
use crate::counter::{Mode, ModeKind};
use crate::protocol::{apply_action, enabled_everywhere, ProtocolError};
use crate::state::{Configuration, Status};
use crate::topology::Topology;

/// Default refusal threshold for enumerated state counts.
pub const DEFAULT_MAX_STATES: u128 = 20_000_000;

#[derive(Debug, Error)]
pub enum CheckError {
    #[error("instance too large: about {estimate} states, bound is {bound}")]
    TooLarge { estimate: u128, bound: u128 },
    #[error(transparent)]
    Predicate(#[from] PredicateError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosureOptions {
    pub predicate: PredicateId,
    /// Fail-stops and transient corruption of the variables faults may touch.
    pub with_faults: bool,
    /// Auditable events (setting `pending_ae`) and the detection action.
    pub auditable_events: bool,
    pub space: SpaceSpec,
    pub max_states: u128,
}

impl ClosureOptions {
    /// Enumeration domain suited to `p`: normal statuses with one shared
    /// counter value for `S1`/`T`, wave statuses over a silent tree for `S2`,
    /// everything otherwise. `dist` is fixed to 0 unless the tree must be silent:
    /// protocol guards never read it and tree steps only touch tree variables
    /// and `res`.
    pub fn new(p: PredicateId, mode: Mode, with_faults: bool, auditable_events: bool) -> Self {
        let mut space = match p {
            PredicateId::S1 => SpaceSpec {
                tree: TreeSpace::Silent,
                ..SpaceSpec::t(mode)
            },
            PredicateId::T => SpaceSpec {
                tree: TreeSpace::Free { full_dist: false },
                ..SpaceSpec::t(mode)
            },
            PredicateId::S2 => SpaceSpec::waves(mode),
            _ => SpaceSpec {
                tree: TreeSpace::Free { full_dist: false },
                ..SpaceSpec::all(mode)
            },
        };
        space.dead_subsets = with_faults;
        space.pending = auditable_events;
        ClosureOptions {
            predicate: p,
            with_faults,
            auditable_events,
            space,
            max_states: DEFAULT_MAX_STATES,
        }
    }
}

/// Transient corruptions allowed by the fault model: any variable except
/// `otsn`/`ctsn` (bounded mode tolerates counter corruption, but that is a
/// convergence question, not a closure one), and statuses only to Restore or
/// Stable.
fn corruptions(cfg: &Configuration) -> Vec<(usize, &'static str, u64)> {
    let n = cfg.n() as u64;
    let mut out = Vec::new();
    for p in cfg.alive_procs() {
        for s in [Status::Restore, Status::Stable] {
            out.push((p.id, "status", s.index()));
        }
        for v in sn_values(cfg.mode) {
            out.push((p.id, "sn", v));
        }
        for v in 0..=1 {
            out.push((p.id, "res", v));
        }
        for v in 0..n {
            out.push((p.id, "parent", v));
            out.push((p.id, "leader", v));
        }
        for v in 0..=n {
            out.push((p.id, "dist", v));
        }
    }
    out
}

fn corrupt(cfg: &mut Configuration, pid: usize, field: &str, value: u64) {
    let p = &mut cfg.procs[pid];
    match field {
        "status" => p.status = Status::from_index(value).expect("status index"),
        "sn" => p.sn = value,
        "res" => p.res = value as u8,
        "parent" => p.parent = value as usize,
        "leader" => p.leader = value as usize,
        "dist" => p.dist = value,
        _ => unreachable!("unknown field {field}"),
    }
    if !p.is_root() {
        p.authorized = false;
    }
}

/// Check closure of `p` with the default enumeration domain and no auditable events.
pub fn check_closure(topology: &Topology, p: PredicateId, mode: ModeKind, with_faults: bool) -> Result<CheckReport, CheckError> {
    let opts = ClosureOptions::new(p, Mode::new(mode, topology.n()), with_faults, false);
    check_closure_with(topology, mode, &opts)
}

pub fn check_closure_with(topology: &Topology, mode: ModeKind, opts: &ClosureOptions) -> Result<CheckReport, CheckError> {
    let topo = Arc::new(topology.clone());
    let estimate = opts.space.count(&topo, mode);
    if estimate > opts.max_states {
        return Err(CheckError::TooLarge {
            estimate,
            bound: opts.max_states,
        });
    }
    let p = opts.predicate;
    let property = format!("closure-{p}");
    // Validate the predicate/mode pair up front.
    eval_predicate(&Configuration::new_unchecked(topo.clone(), mode, Vec::new()), p)?;

    let mut stats = Stats::default();
    let mut violations = 0u64;
    let mut first: Option<Witness> = None;
    let mut error: Option<CheckError> = None;
    let mut record = |from: &Configuration, step: String, to: &Configuration, violations: &mut u64| {
        *violations += 1;
        if first.is_none() {
            first = Some(Witness::Transition {
                from: from.procs.clone(),
                step,
                to: to.procs.clone(),
            });
        }
    };

    opts.space.for_each(&topo, mode, |cfg| {
        match eval_predicate(cfg, p) {
            Ok(true) => {}
            Ok(false) => return true,
            Err(e) => {
                error = Some(e.into());
                return false;
            }
        }
        stats.states_explored += 1;
        for (pid, action) in enabled_everywhere(cfg) {
            if action.is_detection() && !opts.auditable_events {
                continue;
            }
            let next = match apply_action(cfg, pid, action) {
                Ok(c) => c,
                Err(e) => {
                    error = Some(e.into());
                    return false;
                }
            };
            stats.transitions += 1;
            if !eval_predicate(&next, p).unwrap_or(false) {
                record(cfg, format!("{action} at {pid}"), &next, &mut violations);
            }
        }
        let mut scratch = cfg.clone();
        if opts.auditable_events {
            for pid in 0..cfg.n() {
                if cfg.alive(pid) && !cfg.proc(pid).pending_ae {
                    scratch.procs[pid].pending_ae = true;
                    stats.transitions += 1;
                    if !eval_predicate(&scratch, p).unwrap_or(false) {
                        record(cfg, format!("auditable event at {pid}"), &scratch, &mut violations);
                    }
                    scratch.procs[pid] = cfg.procs[pid];
                }
            }
        }
        if opts.with_faults {
            for pid in 0..cfg.n() {
                if cfg.alive(pid) {
                    scratch.procs[pid].alive = false;
                    stats.transitions += 1;
                    if !eval_predicate(&scratch, p).unwrap_or(false) {
                        record(cfg, format!("fail-stop {pid}"), &scratch, &mut violations);
                    }
                    scratch.procs[pid] = cfg.procs[pid];
                }
            }
            for (pid, field, value) in corruptions(cfg) {
                corrupt(&mut scratch, pid, field, value);
                stats.transitions += 1;
                if !eval_predicate(&scratch, p).unwrap_or(false) {
                    record(cfg, format!("corrupt {pid}.{field} := {value}"), &scratch, &mut violations);
                }
                scratch.procs[pid] = cfg.procs[pid];
            }
        }
        true
    });
    if let Some(e) = error {
        return Err(e);
    }
    let scope = format!(
        "{} states in {p} out of {estimate} enumerated, {} transitions",
        stats.states_explored, stats.transitions
    );
    Ok(match first {
        None => CheckReport::pass(&property, format!("{p} is closed: {scope}")),
        Some(w) => CheckReport::fail(&property, w, format!("{violations} transitions leave {p}: {scope}")),
    }
    .with_stats(stats))
}
