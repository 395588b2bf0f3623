use rand::Rng;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

use crate::counter::Mode;
use crate::sim::scenario::random_proc;
use crate::state::{Configuration, Status};
use crate::Pid;

/// A variable a transient fault may overwrite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Status,
    Sn,
    Otsn,
    Ctsn,
    Res,
    Parent,
    Leader,
    Dist,
}

impl Field {
    pub const ALL: [Field; 8] = [
        Field::Status,
        Field::Sn,
        Field::Otsn,
        Field::Ctsn,
        Field::Res,
        Field::Parent,
        Field::Leader,
        Field::Dist,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Field::Status => "status",
            Field::Sn => "sn",
            Field::Otsn => "otsn",
            Field::Ctsn => "ctsn",
            Field::Res => "res",
            Field::Parent => "parent",
            Field::Leader => "leader",
            Field::Dist => "dist",
        }
    }

    pub fn parse(name: &str) -> Option<Field> {
        Field::ALL.into_iter().find(|f| f.name() == name)
    }

    /// Largest legal value, or `None` for an unbounded counter.
    pub fn max_value(self, mode: Mode) -> Option<u64> {
        let n = mode.n_procs as u64;
        match self {
            Field::Status => Some(3),
            Field::Sn => mode.is_bounded().then_some(1),
            Field::Otsn | Field::Ctsn => mode.counter_max(),
            Field::Res => Some(1),
            Field::Parent | Field::Leader => Some(n - 1),
            Field::Dist => Some(n),
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// An environment step.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InjectionKind {
    #[serde(rename = "ae")]
    AuditableEvent { pid: Pid },
    FailStop { pid: Pid },
    Revive { pid: Pid },
    /// Status values are encoded by [`Status::index`].
    Corrupt { pid: Pid, field: Field, value: u64 },
    Authorize,
}

impl InjectionKind {
    pub fn pid(&self) -> Option<Pid> {
        match *self {
            InjectionKind::AuditableEvent { pid }
            | InjectionKind::FailStop { pid }
            | InjectionKind::Revive { pid }
            | InjectionKind::Corrupt { pid, .. } => Some(pid),
            InjectionKind::Authorize => None,
        }
    }

    /// Auditable events and faults, as opposed to authorization input.
    pub fn is_disturbance(&self) -> bool {
        !matches!(self, InjectionKind::Authorize)
    }

    pub fn is_fault(&self) -> bool {
        matches!(
            self,
            InjectionKind::FailStop { .. } | InjectionKind::Revive { .. } | InjectionKind::Corrupt { .. }
        )
    }
}

impl fmt::Display for InjectionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InjectionKind::AuditableEvent { pid } => write!(f, "auditable event at {pid}"),
            InjectionKind::FailStop { pid } => write!(f, "fail-stop {pid}"),
            InjectionKind::Revive { pid } => write!(f, "revive {pid}"),
            InjectionKind::Corrupt { pid, field, value } => write!(f, "corrupt {pid}.{field} := {value}"),
            InjectionKind::Authorize => write!(f, "authorize"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InjectError {
    #[error("no process {pid} (system has {n})")]
    UnknownProcess { pid: Pid, n: usize },
    #[error("transient faults cannot corrupt {0} in unbounded mode: the fault model leaves otsn and ctsn intact")]
    ProtectedCounter(Field),
    #[error("value {value} outside the domain of {field} (max {max})")]
    OutOfDomain { field: Field, value: u64, max: u64 },
}

/// Static validity: process ids in range, corrupted values in their domain,
/// protected counters untouched in unbounded mode.
pub fn validate_injection(kind: &InjectionKind, mode: Mode, n: usize) -> Result<(), InjectError> {
    if let Some(pid) = kind.pid() {
        if pid >= n {
            return Err(InjectError::UnknownProcess { pid, n });
        }
    }
    if let InjectionKind::Corrupt { field, value, .. } = *kind {
        if !mode.is_bounded() && matches!(field, Field::Otsn | Field::Ctsn) {
            return Err(InjectError::ProtectedCounter(field));
        }
        if let Some(max) = field.max_value(mode) {
            if value > max {
                return Err(InjectError::OutOfDomain { field, value, max });
            }
        }
    }
    Ok(())
}

/// Result of applying an injection.
#[derive(Clone, Debug)]
pub enum Injected {
    Applied { cfg: Configuration, target: Option<Pid> },
    /// The injection had no legal target at this point of the run.
    Dropped { reason: String },
}

/// The process an authorization goes to: the smallest alive root.
pub fn authorization_target(cfg: &Configuration) -> Option<Pid> {
    cfg.alive_procs().find(|p| p.is_root()).map(|p| p.id)
}

/// Apply an environment step. Only the fields named by the injection change.
pub fn inject<R: Rng + ?Sized>(cfg: &Configuration, kind: &InjectionKind, rng: &mut R) -> Result<Injected, InjectError> {
    validate_injection(kind, cfg.mode, cfg.n())?;
    let dropped = |reason: String| Ok(Injected::Dropped { reason });
    let mut next = cfg.clone();
    let target = match *kind {
        InjectionKind::AuditableEvent { pid } => {
            if !cfg.alive(pid) {
                return dropped(format!("process {pid} has fail-stopped"));
            }
            next.procs[pid].pending_ae = true;
            Some(pid)
        }
        InjectionKind::FailStop { pid } => {
            if !cfg.alive(pid) {
                return dropped(format!("process {pid} already fail-stopped"));
            }
            next.procs[pid].alive = false;
            Some(pid)
        }
        InjectionKind::Revive { pid } => {
            if cfg.alive(pid) {
                return dropped(format!("process {pid} is alive"));
            }
            next.procs[pid] = random_proc(pid, cfg.mode, rng);
            Some(pid)
        }
        InjectionKind::Corrupt { pid, field, value } => {
            if !cfg.alive(pid) {
                return dropped(format!("process {pid} has fail-stopped"));
            }
            let p = &mut next.procs[pid];
            match field {
                Field::Status => p.status = Status::from_index(value).expect("validated"),
                Field::Sn => p.sn = value,
                Field::Otsn => p.otsn = value,
                Field::Ctsn => p.ctsn = value,
                Field::Res => p.res = value as u8,
                Field::Parent => p.parent = value as Pid,
                Field::Leader => p.leader = value as Pid,
                Field::Dist => p.dist = value,
            }
            // An authorization is only meaningful at a root.
            if !p.is_root() {
                p.authorized = false;
            }
            Some(pid)
        }
        InjectionKind::Authorize => match authorization_target(cfg) {
            Some(pid) => {
                next.procs[pid].authorized = true;
                Some(pid)
            }
            None => return dropped("no alive leader".to_string()),
        },
    };
    Ok(Injected::Applied { cfg: next, target })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counter::ModeKind;
    use crate::testutil::legit_line;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn applied(r: Result<Injected, InjectError>) -> Configuration {
        match r.unwrap() {
            Injected::Applied { cfg, .. } => cfg,
            Injected::Dropped { reason } => panic!("dropped: {reason}"),
        }
    }

    #[test]
    fn auditable_event_only_sets_pending() {
        let cfg = legit_line(3, ModeKind::Unbounded);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let next = applied(inject(&cfg, &InjectionKind::AuditableEvent { pid: 2 }, &mut rng));
        let mut expect = cfg.clone();
        expect.procs[2].pending_ae = true;
        assert_eq!(next, expect);
    }

    #[test]
    fn unbounded_counter_corruption_rejected() {
        let cfg = legit_line(3, ModeKind::Unbounded);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let kind = InjectionKind::Corrupt {
            pid: 1,
            field: Field::Otsn,
            value: 3,
        };
        assert_eq!(
            inject(&cfg, &kind, &mut rng).unwrap_err(),
            InjectError::ProtectedCounter(Field::Otsn)
        );
        let cfg = legit_line(3, ModeKind::Bounded);
        let next = applied(inject(&cfg, &kind, &mut rng));
        assert_eq!(next.proc(1).otsn, 3);
    }

    #[test]
    fn corrupt_value_must_be_in_domain() {
        let cfg = legit_line(3, ModeKind::Bounded);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let kind = InjectionKind::Corrupt {
            pid: 1,
            field: Field::Otsn,
            value: 10,
        };
        assert!(matches!(
            inject(&cfg, &kind, &mut rng),
            Err(InjectError::OutOfDomain { .. })
        ));
    }

    #[test]
    fn authorize_goes_to_leader_or_is_dropped() {
        let cfg = legit_line(3, ModeKind::Unbounded);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let next = applied(inject(&cfg, &InjectionKind::Authorize, &mut rng));
        assert!(next.proc(0).authorized);

        let mut dead = cfg.clone();
        dead.procs[0].alive = false;
        assert!(matches!(
            inject(&dead, &InjectionKind::Authorize, &mut rng).unwrap(),
            Injected::Dropped { .. }
        ));
    }

    #[test]
    fn fail_stop_and_revive() {
        let cfg = legit_line(3, ModeKind::Bounded);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let down = applied(inject(&cfg, &InjectionKind::FailStop { pid: 0 }, &mut rng));
        assert!(!down.alive(0));
        assert_eq!(down.procs[1..], cfg.procs[1..]);
        let up = applied(inject(&down, &InjectionKind::Revive { pid: 0 }, &mut rng));
        assert!(up.alive(0));
        up.validate().unwrap();
        assert_eq!(up.procs[1..], cfg.procs[1..]);
    }
}
