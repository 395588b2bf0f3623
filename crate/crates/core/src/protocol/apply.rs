use super::{check_call, eval_guard, Action, ProtocolError, Role};
use crate::counter::ModeKind;
use crate::state::{Configuration, Status};
use crate::tree;
use crate::Pid;

/// `min(res + 1, 1)`.
fn bump(res: u8) -> u8 {
    (res + 1).min(1)
}

/// Apply the statement of `action` at `pid`.
///
/// The returned configuration differs from `cfg` only in `pid`'s variables.
/// Calling this with a false guard is a contract violation and returns
/// [`ProtocolError::GuardFalse`].
pub fn apply_action(cfg: &Configuration, pid: Pid, action: Action) -> Result<Configuration, ProtocolError> {
    check_call(cfg, pid, action)?;
    if !eval_guard(cfg, pid, action)? {
        return Err(ProtocolError::GuardFalse { action, pid });
    }
    let mode = cfg.mode;
    let bounded = mode.kind == ModeKind::Bounded;
    let mut me = *cfg.proc(pid);
    let leader = me.is_root();

    match action.role() {
        Role::Detect => {
            me.otsn = mode.wrap_add(me.otsn, 1)?;
            me.pending_ae = false;
        }
        Role::PropagateOtsn => {
            if bounded {
                me.otsn = mode.wrap_add(me.otsn, 1)?;
            } else {
                let top = cfg.alive_neighbors(pid).map(|k| k.otsn).max().unwrap_or(me.otsn);
                me.otsn = me.otsn.max(top);
                if leader {
                    me.res = 0;
                }
            }
        }
        Role::StartNotify => {
            me.status = Status::Bottom;
            me.sn = mode.next_sn(me.sn);
            me.res = bump(me.res);
        }
        Role::ForwardNotify => {
            let p = cfg.readable_parent(pid).expect("guard reads parent");
            me.status = Status::Bottom;
            me.sn = p.sn;
            me.res = if bounded { p.res } else { bump(me.res) };
        }
        Role::Echo => {
            me.status = Status::Top;
            me.res = cfg.alive_neighbors(pid).map(|k| k.res).fold(me.res, u8::min);
            if leader {
                if me.res != 1 {
                    me.status = Status::Bottom;
                    me.sn = mode.next_sn(me.sn);
                    me.res = bump(me.res);
                } else {
                    me.ctsn = me.otsn;
                }
            }
        }
        Role::PropagateCtsn => {
            if bounded {
                me.ctsn = cfg.readable_parent(pid).expect("guard reads parent").ctsn;
            } else {
                let top = cfg.alive_neighbors(pid).map(|k| k.ctsn).max().unwrap_or(me.ctsn);
                me.ctsn = me.ctsn.max(top);
            }
        }
        Role::StartRestore => {
            me.status = Status::Restore;
            me.sn = mode.next_sn(me.sn);
            me.authorized = false;
        }
        Role::ForwardRestore => {
            let p = cfg.readable_parent(pid).expect("guard reads parent");
            me.status = Status::Restore;
            me.sn = p.sn;
            me.res = if bounded { p.res } else { bump(me.res) };
        }
        Role::CompleteRestore => {
            me.status = Status::Stable;
            me.res = cfg.alive_neighbors(pid).map(|k| k.res).fold(me.res, u8::min);
            if leader && me.res != 1 {
                me.status = Status::Restore;
                me.sn = mode.next_sn(me.sn);
                me.res = bump(me.res);
            }
        }
        Role::Correct => {
            let p = cfg.readable_parent(pid).expect("a false Gd implies a readable parent");
            me.status = p.status;
            me.sn = p.sn;
        }
        Role::TreeCorrection => {
            let (next, _notified) = tree::tree_step(cfg, pid)?;
            let mut me = *next.proc(pid);
            // B11 prints res := -1, outside {0..1}; both variants reset to 0.
            me.res = 0;
            if !me.is_root() {
                me.authorized = false;
            }
            return Ok(next.with_proc(me));
        }
        Role::ResetOtsn => {
            me.otsn = 0;
        }
    }
    Ok(cfg.with_proc(me))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{enabled, enabled_everywhere};
    use crate::testutil::{legit_line, single};

    fn fire(cfg: &Configuration, pid: Pid, a: Action) -> Configuration {
        apply_action(cfg, pid, a).unwrap_or_else(|e| panic!("{a} at {pid}: {e}"))
    }

    #[test]
    fn detection_increments_and_consumes() {
        let mut cfg = single(ModeKind::Unbounded);
        cfg.procs[0].pending_ae = true;
        let next = fire(&cfg, 0, Action::Ar1);
        assert_eq!(next.proc(0).otsn, 1);
        assert!(!next.proc(0).pending_ae);
    }

    #[test]
    fn start_notify_at_leader() {
        let mut cfg = single(ModeKind::Unbounded);
        let p = &mut cfg.procs[0];
        p.sn = 4;
        p.res = 0;
        p.otsn = 1;
        let next = fire(&cfg, 0, Action::Ar3);
        let p = next.proc(0);
        assert_eq!((p.status, p.sn, p.res), (Status::Bottom, 5, 1));
    }

    #[test]
    fn guard_false_is_contract_violation() {
        let cfg = single(ModeKind::Unbounded);
        assert_eq!(
            apply_action(&cfg, 0, Action::Ar3),
            Err(ProtocolError::GuardFalse { action: Action::Ar3, pid: 0 })
        );
    }

    #[test]
    fn single_process_walkthrough() {
        let mut cfg = single(ModeKind::Unbounded);
        cfg.procs[0].pending_ae = true;
        cfg = fire(&cfg, 0, Action::Ar1);
        assert_eq!(enabled(&cfg, 0), vec![Action::Ar3]);
        cfg = fire(&cfg, 0, Action::Ar3);
        assert_eq!(enabled(&cfg, 0), vec![Action::Ar5]);
        cfg = fire(&cfg, 0, Action::Ar5);
        let p = cfg.proc(0);
        assert_eq!((p.status, p.otsn, p.ctsn), (Status::Top, 1, 1));
        assert!(enabled(&cfg, 0).is_empty(), "waits for authorization");
        cfg.procs[0].authorized = true;
        cfg = fire(&cfg, 0, Action::Ar7);
        assert_eq!(cfg.proc(0).status, Status::Restore);
        assert!(!cfg.proc(0).authorized);
        cfg = fire(&cfg, 0, Action::Ar9);
        let p = cfg.proc(0);
        assert_eq!((p.status, p.otsn, p.ctsn, p.sn), (Status::Stable, 1, 1, 2));
        assert!(enabled_everywhere(&cfg).is_empty());
    }

    #[test]
    fn self_disabling_on_single_process() {
        let mut cfg = single(ModeKind::Unbounded);
        cfg.procs[0].pending_ae = true;
        let a = fire(&cfg, 0, Action::Ar1);
        assert!(!eval_guard(&a, 0, Action::Ar1).unwrap());
        let b = fire(&a, 0, Action::Ar3);
        assert!(!eval_guard(&b, 0, Action::Ar3).unwrap());
        let mut c = fire(&b, 0, Action::Ar5);
        c.procs[0].authorized = true;
        let d = fire(&c, 0, Action::Ar7);
        assert!(!eval_guard(&d, 0, Action::Ar7).unwrap());
    }

    #[test]
    fn echo_restarts_wave_when_someone_missed_it() {
        let mut cfg = legit_line(2, ModeKind::Unbounded);
        for p in &mut cfg.procs {
            p.status = Status::Bottom;
            p.otsn = 1;
            p.sn = 1;
        }
        cfg.procs[1].status = Status::Top;
        cfg.procs[1].res = 0;
        let next = fire(&cfg, 0, Action::Ar5);
        let p = next.proc(0);
        assert_eq!((p.status, p.sn, p.res, p.ctsn), (Status::Bottom, 2, 1, 0));
    }

    #[test]
    fn forward_actions_copy_res_from_parent_in_bounded_mode() {
        let mut cfg = legit_line(2, ModeKind::Bounded);
        cfg.procs[0].status = Status::Bottom;
        cfg.procs[0].sn = 1;
        cfg.procs[0].res = 0;
        let next = fire(&cfg, 1, Action::B4);
        assert_eq!((next.proc(1).status, next.proc(1).sn, next.proc(1).res), (Status::Bottom, 1, 0));

        let mut cfg = legit_line(2, ModeKind::Unbounded);
        cfg.procs[0].status = Status::Bottom;
        cfg.procs[0].sn = 1;
        cfg.procs[0].res = 0;
        cfg.procs[1].res = 0;
        let next = fire(&cfg, 1, Action::Ar4);
        assert_eq!(next.proc(1).res, 1);
    }

    #[test]
    fn tree_correction_resets_res() {
        let mut cfg = legit_line(3, ModeKind::Unbounded);
        cfg.procs[0].alive = false;
        assert!(enabled(&cfg, 1).contains(&Action::Ar11));
        let next = fire(&cfg, 1, Action::Ar11);
        let p = next.proc(1);
        assert_eq!((p.leader, p.parent, p.dist, p.res), (1, 1, 0, 0));
    }

    #[test]
    fn bounded_far_reset_sets_zero() {
        let mut cfg = legit_line(3, ModeKind::Bounded);
        cfg.procs[1].otsn = 6;
        let next = fire(&cfg, 1, Action::B12);
        assert_eq!(next.proc(1).otsn, 0);
    }
}
