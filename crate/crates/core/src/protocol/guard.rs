use super::{check_call, Action, ProtocolError, Role};
use crate::counter::ModeKind;
use crate::state::{Configuration, Status};
use crate::tree;
use crate::Pid;

/// `Gd.j`: the local consistency predicate between `j` and its parent.
///
/// The first conjunct is printed as an assignment; it is read as the equality
/// `sn.j = sn.(P.j)` like the other three. A parent that cannot be read makes
/// the predicate vacuously true.
pub fn gd(cfg: &Configuration, pid: Pid) -> bool {
    let me = cfg.proc(pid);
    let Some(parent) = cfg.readable_parent(pid) else {
        return true;
    };
    let (ps, st) = (parent.status, me.status);
    let sn_eq = me.sn == parent.sn;
    let restore = !(ps == Status::Restore && st == Status::Restore) || sn_eq;
    let stable = ps != Status::Stable || (st == Status::Stable && sn_eq);
    let bottom = !(ps == Status::Bottom && st == Status::Bottom) || sn_eq;
    let top = ps != Status::Top || (st == Status::Top && sn_eq);
    restore && stable && bottom && top
}

/// Evaluate the literal guard of `action` at `pid`.
pub fn eval_guard(cfg: &Configuration, pid: Pid, action: Action) -> Result<bool, ProtocolError> {
    check_call(cfg, pid, action)?;
    let mode = cfg.mode;
    let me = cfg.proc(pid);
    let bounded = mode.kind == ModeKind::Bounded;
    let leader = me.is_root();
    let n = mode.window();

    // Parent-reading guards are false while the parent is unreadable; at a
    // root the parent is the process itself.
    let parent = cfg.readable_parent(pid);

    let guard = match action.role() {
        Role::Detect => {
            me.pending_ae && (!bounded || cfg.alive_neighbors(pid).all(|k| mode.in_window(k.otsn, me.otsn, n)))
        }
        Role::PropagateOtsn => {
            if bounded {
                let all_in = cfg.alive_neighbors(pid).all(|k| mode.in_window(k.otsn, me.otsn, n));
                let ahead = mode.wrap_add(me.otsn, 1)?;
                let some_ahead = cfg
                    .alive_neighbors(pid)
                    .any(|k| mode.in_window(k.otsn, ahead, n - 1));
                all_in && some_ahead
            } else {
                cfg.alive_neighbors(pid).any(|k| me.otsn < k.otsn)
            }
        }
        Role::StartNotify => {
            let unhandled = if bounded { me.otsn != me.ctsn } else { me.otsn > me.ctsn };
            leader && me.status != Status::Bottom && unhandled
        }
        Role::ForwardNotify => match parent {
            Some(p) => p.status == Status::Bottom && me.sn != p.sn && me.leader == p.leader,
            None => false,
        },
        Role::Echo => {
            me.status == Status::Bottom
                && cfg
                    .children(pid)
                    .all(|k| k.otsn == me.otsn && k.status == Status::Top)
                && cfg
                    .alive_neighbors(pid)
                    .all(|k| k.sn == me.sn && k.leader == me.leader)
        }
        Role::PropagateCtsn => {
            if bounded {
                match parent {
                    Some(p) => !leader && me.ctsn != p.ctsn,
                    None => false,
                }
            } else {
                cfg.alive_neighbors(pid).any(|k| me.ctsn < k.ctsn)
            }
        }
        Role::StartRestore => leader && me.status == Status::Top && me.ctsn == me.otsn && me.authorized,
        Role::ForwardRestore => match parent {
            // `l.j = l.k` has no binding for k; read as the parent's leader.
            Some(p) => {
                p.status == Status::Restore && me.sn != p.sn && me.leader == p.leader && me.otsn == me.ctsn
            }
            None => false,
        },
        Role::CompleteRestore => {
            me.status == Status::Restore
                && cfg
                    .children(pid)
                    .all(|k| k.sn == me.sn && k.status == Status::Stable)
                && cfg
                    .alive_neighbors(pid)
                    .all(|k| k.sn == me.sn && k.leader == me.leader)
        }
        Role::Correct => !gd(cfg, pid),
        Role::TreeCorrection => tree::tree_enabled(cfg, pid),
        Role::ResetOtsn => {
            let mut far_below = false;
            for k in cfg.alive_neighbors(pid) {
                let low = mode.wrap_add(k.otsn, -(n as i64))?;
                let near = mode.in_window(me.otsn, low, n) || mode.in_window(me.otsn, k.otsn, n);
                if !near && me.otsn > k.otsn {
                    far_below = true;
                    break;
                }
            }
            far_below
        }
    };
    Ok(guard)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::enabled;
    use crate::testutil::{legit_line, single};

    #[test]
    fn quiescent_single_process_has_no_enabled_action() {
        let cfg = single(ModeKind::Unbounded);
        for &a in &Action::UNBOUNDED {
            assert!(!eval_guard(&cfg, 0, a).unwrap(), "{a} should be disabled");
        }
    }

    #[test]
    fn pending_event_enables_only_detection() {
        let mut cfg = single(ModeKind::Unbounded);
        cfg.procs[0].pending_ae = true;
        // Hand enumeration of the eleven guards for a lone leader with
        // st = Stable, otsn = ctsn = 0, res = 1: only the detection brace holds.
        let expected = [true, false, false, false, false, false, false, false, false, false, false];
        for (&a, &want) in Action::UNBOUNDED.iter().zip(expected.iter()) {
            assert_eq!(eval_guard(&cfg, 0, a).unwrap(), want, "{a}");
        }
    }

    #[test]
    fn unhandled_event_at_leader_enables_start_notify() {
        let mut cfg = single(ModeKind::Unbounded);
        cfg.procs[0].otsn = 1;
        assert!(eval_guard(&cfg, 0, Action::Ar3).unwrap());
    }

    #[test]
    fn gd_cases() {
        let mut cfg = legit_line(2, ModeKind::Unbounded);
        assert!(gd(&cfg, 1));
        cfg.procs[1].status = Status::Restore;
        assert!(!gd(&cfg, 1));

        cfg.procs[0].status = Status::Top;
        cfg.procs[1].status = Status::Top;
        cfg.procs[1].sn = 3;
        assert!(!gd(&cfg, 1));
        cfg.procs[1].sn = cfg.procs[0].sn;
        assert!(gd(&cfg, 1));
    }

    #[test]
    fn gd_vacuous_when_parent_dead() {
        let mut cfg = legit_line(2, ModeKind::Unbounded);
        cfg.procs[1].status = Status::Restore;
        cfg.procs[0].alive = false;
        assert!(gd(&cfg, 1));
        assert!(!eval_guard(&cfg, 1, Action::Ar10).unwrap());
    }

    #[test]
    fn neighbor_ahead_enables_otsn_propagation() {
        let mut cfg = legit_line(3, ModeKind::Unbounded);
        cfg.procs[1].otsn = 2;
        assert!(enabled(&cfg, 0).contains(&Action::Ar2));
        assert!(enabled(&cfg, 2).contains(&Action::Ar2));
    }

    #[test]
    fn dead_process_enables_nothing() {
        let mut cfg = legit_line(3, ModeKind::Unbounded);
        cfg.procs[2].alive = false;
        cfg.procs[2].pending_ae = true;
        assert!(enabled(&cfg, 2).is_empty());
        assert_eq!(
            eval_guard(&cfg, 2, Action::Ar1),
            Err(ProtocolError::DeadProcess(2))
        );
    }

    #[test]
    fn mode_mismatch_is_usage_error() {
        let cfg = single(ModeKind::Unbounded);
        assert!(matches!(
            eval_guard(&cfg, 0, Action::B1),
            Err(ProtocolError::ModeMismatch { .. })
        ));
    }

    #[test]
    fn bounded_detection_waits_for_lagging_neighbor() {
        // N = 3, domain 10. Neighbour 1 is one behind process 0.
        let mut cfg = legit_line(3, ModeKind::Bounded);
        cfg.procs[0].otsn = 1;
        cfg.procs[0].pending_ae = true;
        assert!(!eval_guard(&cfg, 0, Action::B1).unwrap());
        cfg.procs[1].otsn = 1;
        assert!(eval_guard(&cfg, 0, Action::B1).unwrap());
    }

    #[test]
    fn bounded_propagation_and_far_reset() {
        let mut cfg = legit_line(3, ModeKind::Bounded);
        // 1 is at 9, neighbours 0 and 2 at 0 = 9 ⊕ 1: 1 should advance.
        cfg.procs[1].otsn = 9;
        assert!(eval_guard(&cfg, 1, Action::B2).unwrap());
        assert!(!eval_guard(&cfg, 1, Action::B12).unwrap());

        // 1 at 6 is outside [0 ⊖ 3 .. 0 ⊕ 3] = {7,8,9,0,1,2,3} and 6 > 0.
        cfg.procs[1].otsn = 6;
        assert!(eval_guard(&cfg, 1, Action::B12).unwrap());
        assert!(!eval_guard(&cfg, 1, Action::B2).unwrap());
        // 0 sees 6 outside its window too but 0 < 6: no reset at 0.
        assert!(!eval_guard(&cfg, 0, Action::B12).unwrap());
    }

    #[test]
    fn bounded_ctsn_copies_parent_only() {
        let mut cfg = legit_line(2, ModeKind::Bounded);
        cfg.procs[0].ctsn = 2;
        assert!(eval_guard(&cfg, 1, Action::B6).unwrap());
        assert!(!eval_guard(&cfg, 0, Action::B6).unwrap());
    }
}
