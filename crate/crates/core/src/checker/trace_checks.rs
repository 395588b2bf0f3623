//! Properties checked on a single recorded run.

use thiserror::Error;

use crate::checker::predicate::{self, eval_predicate, PredicateError, PredicateId};
use crate::checker::report::{CheckReport, Stats, Witness};
use crate::counter::ModeKind;
use crate::sim::{InjectionKind, RunEnd, Trace, TraceError};
use crate::state::Configuration;

#[derive(Debug, Error)]
pub enum TraceCheckError {
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error(transparent)]
    Predicate(#[from] PredicateError),
    #[error("{property} needs a {needed:?}-mode trace")]
    WrongMode { property: &'static str, needed: ModeKind },
}

fn stats(trace: &Trace) -> Stats {
    Stats {
        steps_taken: trace.records.last().map_or(0, |r| r.tick + 1),
        ..Stats::default()
    }
}

fn first_from(cfgs: &[Configuration], start: usize, p: impl Fn(&Configuration) -> bool) -> Option<usize> {
    (start..cfgs.len()).find(|&i| p(&cfgs[i]))
}

/// `target` holds somewhere in the suffix after the last injection and the
/// last detection action. A pending detection is not part of any predicate,
/// so counting from the injection alone would accept the configuration the
/// event was injected into.
pub fn check_convergence(trace: &Trace, target: PredicateId) -> Result<CheckReport, TraceCheckError> {
    let property = "convergence";
    let cfgs = trace.configurations()?;
    let start = trace.last_injection().unwrap_or(0).max(phase_start(trace)).min(cfgs.len() - 1);
    let mut hit = None;
    for (i, c) in cfgs.iter().enumerate().skip(start) {
        if eval_predicate(c, target)? {
            hit = Some(i);
            break;
        }
    }
    let report = match hit {
        Some(i) => CheckReport::pass(property, format!("{target} holds at step {i}"))
            .with_witness(Witness::Step { index: i as u64 }),
        None => {
            let msg = format!("{target} never holds after step {start}");
            match trace.end {
                RunEnd::BudgetExhausted => CheckReport::exhausted(property, msg),
                RunEnd::Stopped => CheckReport::fail(
                    property,
                    Witness::Violation {
                        index: (cfgs.len() - 1) as u64,
                        detail: msg.clone(),
                    },
                    msg,
                ),
            }
        }
    };
    Ok(report.with_stats(stats(trace)))
}

/// The step after which only protocol actions fire: past the last auditable
/// event or fault and past the last detection action.
pub fn phase_start(trace: &Trace) -> usize {
    let after_disturbance = trace.last_disturbance().map_or(0, |i| i + 1);
    let after_detection = trace
        .records
        .iter()
        .rposition(|r| r.action().is_some_and(|(_, a)| a.is_detection()))
        .map_or(0, |i| i + 1);
    after_disturbance.max(after_detection)
}

/// Strict two-phase recovery: some `m ≥ w` in `S2` and some `n > m` in `S1`,
/// and `S1` is not entered after `w` before `S2` is.
pub fn check_two_phase(trace: &Trace) -> Result<CheckReport, TraceCheckError> {
    let property = "two-phase";
    let st = stats(trace);
    if trace.auditable_events() == 0 {
        return Ok(CheckReport::pass(property, "no auditable event in the trace")
            .vacuous()
            .with_stats(st));
    }
    let cfgs = trace.configurations()?;
    let w = phase_start(trace).min(cfgs.len() - 1);
    let first_s2 = first_from(&cfgs, w, predicate::s2);
    let first_s1 = first_from(&cfgs, w, predicate::s1);

    if let (Some(n), s2) = (first_s1, first_s2) {
        if s2.is_none_or(|m| n < m) {
            let msg = format!("S1 reached at step {n} after phase start {w} without passing through S2");
            return Ok(CheckReport::fail(
                property,
                Witness::Violation {
                    index: n as u64,
                    detail: msg.clone(),
                },
                msg,
            )
            .with_stats(st));
        }
    }
    let Some(first_s2) = first_s2 else {
        let msg = format!("S2 never reached after phase start {w}");
        return Ok(match trace.end {
            RunEnd::BudgetExhausted => CheckReport::exhausted(property, msg),
            RunEnd::Stopped => CheckReport::fail(
                property,
                Witness::Violation {
                    index: (cfgs.len() - 1) as u64,
                    detail: msg.clone(),
                },
                msg,
            ),
        }
        .with_stats(st));
    };
    // Prefer the step at which the leader reports everyone aware (root at ⊤).
    let leader_top = |c: &Configuration| predicate::s2(c) && c.alive_procs().any(|p| p.is_root() && p.status == crate::state::Status::Top);
    let m = first_from(&cfgs, first_s2, leader_top)
        .filter(|&m| first_from(&cfgs, m + 1, predicate::s1).is_some())
        .unwrap_or(first_s2);
    match first_from(&cfgs, m + 1, predicate::s1) {
        Some(n) => Ok(CheckReport::pass(property, format!("S2 at step {m}, then S1 at step {n} (phase start {w})"))
            .with_witness(Witness::Phases {
                w: w as u64,
                m: m as u64,
                n: n as u64,
            })
            .with_stats(st)),
        None => {
            let msg = format!("S2 reached at step {m} but S1 never follows");
            Ok(match trace.end {
                RunEnd::BudgetExhausted => CheckReport::exhausted(property, msg),
                RunEnd::Stopped => CheckReport::fail(
                    property,
                    Witness::Violation {
                        index: m as u64,
                        detail: msg.clone(),
                    },
                    msg,
                ),
            }
            .with_stats(st))
        }
    }
}

/// From a `T` state with every `otsn = x`, an auditable event leads to every
/// alive `otsn ≥ x + 1`, which then persists to the end of the trace.
pub fn check_notify(trace: &Trace) -> Result<CheckReport, TraceCheckError> {
    let property = "notify-lemma";
    if trace.mode != ModeKind::Unbounded {
        return Err(TraceCheckError::WrongMode {
            property,
            needed: ModeKind::Unbounded,
        });
    }
    let st = stats(trace);
    let Some(first_ae) = trace
        .records
        .iter()
        .position(|r| matches!(r.injection(), Some(InjectionKind::AuditableEvent { .. })))
    else {
        return Ok(CheckReport::pass(property, "no auditable event in the trace")
            .vacuous()
            .with_stats(st));
    };
    let cfgs = trace.configurations()?;
    let before = &cfgs[first_ae - 1];
    if !predicate::t(before) {
        return Ok(CheckReport::pass(property, format!("configuration {} before the first event is not in T", first_ae - 1))
            .vacuous()
            .with_stats(st));
    }
    let x = before.alive_procs().map(|p| p.otsn).next().unwrap_or(0);
    let caught_up = |c: &Configuration| c.alive_procs().all(|p| p.otsn > x);
    let Some(hit) = first_from(&cfgs, first_ae, caught_up) else {
        let msg = format!("some alive otsn stays at {x} or below");
        return Ok(match trace.end {
            RunEnd::BudgetExhausted => CheckReport::exhausted(property, msg),
            RunEnd::Stopped => CheckReport::fail(
                property,
                Witness::Violation {
                    index: (cfgs.len() - 1) as u64,
                    detail: msg.clone(),
                },
                msg,
            ),
        }
        .with_stats(st));
    };
    if let Some(bad) = first_from(&cfgs, hit, |c| !caught_up(c)) {
        let msg = format!("otsn dropped back to {x} or below at step {bad}");
        return Ok(CheckReport::fail(
            property,
            Witness::Violation {
                index: bad as u64,
                detail: msg.clone(),
            },
            msg,
        )
        .with_stats(st));
    }
    Ok(
        CheckReport::pass(property, format!("every alive otsn ≥ {} from step {hit} on", x + 1))
            .with_witness(Witness::Step { index: hit as u64 })
            .with_stats(st),
    )
}

/// Every pair of alive neighbours has `otsn` values at most one apart on the ring.
pub fn neighbors_in_unison(cfg: &Configuration) -> bool {
    let mode = cfg.mode;
    cfg.topology.edges().iter().all(|&(a, b)| {
        if !cfg.alive(a) || !cfg.alive(b) {
            return true;
        }
        let (x, y) = (cfg.proc(a).otsn, cfg.proc(b).otsn);
        let low = mode.wrap_add(x, -1).expect("in domain");
        mode.in_window(y, low, 2)
    })
}

/// Bounded unison: after `burn_in` ticks every configuration keeps neighbours
/// within one of each other; after the last injection all `otsn` become equal,
/// and later every `otsn` equals every `ctsn`.
pub fn check_unison(trace: &Trace, burn_in: u64) -> Result<CheckReport, TraceCheckError> {
    let property = "unison";
    if trace.mode != ModeKind::Bounded {
        return Err(TraceCheckError::WrongMode {
            property,
            needed: ModeKind::Bounded,
        });
    }
    let st = stats(trace);
    let cfgs = trace.configurations()?;
    for (i, (c, r)) in cfgs.iter().zip(&trace.records).enumerate() {
        if r.tick >= burn_in && !neighbors_in_unison(c) {
            let msg = format!("neighbouring otsn values more than one apart at step {i}");
            return Ok(CheckReport::fail(
                property,
                Witness::Violation {
                    index: i as u64,
                    detail: msg.clone(),
                },
                msg,
            )
            .with_stats(st));
        }
    }
    let start = trace.last_injection().unwrap_or(0);
    let otsn_equal = |c: &Configuration| {
        let mut it = c.alive_procs().map(|p| p.otsn);
        let first = it.next();
        it.all(|v| Some(v) == first)
    };
    let not_reached = |what: &str| {
        let msg = format!("{what} not reached after the last injection (step {start})");
        match trace.end {
            RunEnd::BudgetExhausted => CheckReport::exhausted(property, msg),
            RunEnd::Stopped => CheckReport::fail(
                property,
                Witness::Violation {
                    index: (cfgs.len() - 1) as u64,
                    detail: msg.clone(),
                },
                msg,
            ),
        }
    };
    let Some(eq) = first_from(&cfgs, start, otsn_equal) else {
        return Ok(not_reached("equal otsn").with_stats(st));
    };
    let Some(agree) = first_from(&cfgs, eq, predicate::counters_agree) else {
        return Ok(not_reached("otsn = ctsn everywhere").with_stats(st));
    };
    Ok(CheckReport::pass(
        property,
        format!("neighbours within one after tick {burn_in}; otsn equal at step {eq}; otsn = ctsn at step {agree}"),
    )
    .with_witness(Witness::Step { index: agree as u64 })
    .with_stats(st))
}

/// `AS″` holds at every configuration, and the run is a two-phase recovery.
pub fn check_as_window(trace: &Trace) -> Result<CheckReport, TraceCheckError> {
    let property = "as-window";
    if trace.mode != ModeKind::Bounded {
        return Err(TraceCheckError::WrongMode {
            property,
            needed: ModeKind::Bounded,
        });
    }
    let cfgs = trace.configurations()?;
    for (i, c) in cfgs.iter().enumerate() {
        if !eval_predicate(c, PredicateId::ASdoubleprime)? {
            let msg = format!("AS'' violated at step {i}");
            return Ok(CheckReport::fail(
                property,
                Witness::Violation {
                    index: i as u64,
                    detail: msg.clone(),
                },
                msg,
            )
            .with_stats(stats(trace)));
        }
    }
    let mut report = check_two_phase(trace)?;
    report.property = property.to_string();
    report.message = format!("AS'' holds at all {} configurations; {}", cfgs.len(), report.message);
    Ok(report)
}

/// Restoration never starts before everyone is aware: no `AR7`/`B7` fires
/// from a configuration violating the leader clause of `S2`.
pub fn check_authorization_gate(trace: &Trace) -> Result<CheckReport, TraceCheckError> {
    let property = "authorization-gate";
    let cfgs = trace.configurations()?;
    let mut fired = 0;
    for (i, r) in trace.records.iter().enumerate().skip(1) {
        let Some((pid, action)) = r.action() else {
            continue;
        };
        if !action.is_restore_start() {
            continue;
        }
        fired += 1;
        if !predicate::s2_leader_clause(&cfgs[i - 1]) {
            let msg = format!("{action} fired at process {pid} in step {i} before every process was aware");
            return Ok(CheckReport::fail(
                property,
                Witness::Violation {
                    index: i as u64,
                    detail: msg.clone(),
                },
                msg,
            )
            .with_stats(stats(trace)));
        }
    }
    let report = CheckReport::pass(property, format!("{fired} restoration start(s), all from aware configurations"))
        .with_stats(stats(trace));
    Ok(if fired == 0 { report.vacuous() } else { report })
}
