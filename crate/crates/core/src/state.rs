//! Per-process variables and global configurations.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::counter::{Mode, ModeKind};
use crate::topology::Topology;
use crate::Pid;

/// `st.j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Restore,
    Stable,
    /// ⊥: the notification wave is travelling towards the leaves.
    Bottom,
    /// ⊤: the echo is travelling back towards the leader.
    Top,
}

impl Status {
    pub const ALL: [Status; 4] = [Status::Restore, Status::Stable, Status::Bottom, Status::Top];

    pub fn index(self) -> u64 {
        match self {
            Status::Restore => 0,
            Status::Stable => 1,
            Status::Bottom => 2,
            Status::Top => 3,
        }
    }

    pub fn from_index(i: u64) -> Option<Status> {
        Status::ALL.get(i as usize).copied()
    }

    pub fn from_name(name: &str) -> Option<Status> {
        match name.to_ascii_lowercase().as_str() {
            "restore" => Some(Status::Restore),
            "stable" => Some(Status::Stable),
            "bottom" | "⊥" => Some(Status::Bottom),
            "top" | "⊤" => Some(Status::Top),
            _ => None,
        }
    }

    /// Restore or Stable: the statuses of normal operation.
    pub fn is_normal(self) -> bool {
        matches!(self, Status::Restore | Status::Stable)
    }

    /// Bottom or Top: the statuses of the notification wave.
    pub fn is_wave(self) -> bool {
        !self.is_normal()
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Status::Restore => "restore",
            Status::Stable => "stable",
            Status::Bottom => "bottom",
            Status::Top => "top",
        };
        f.write_str(s)
    }
}

fn yes() -> bool {
    true
}

fn is_false(b: &bool) -> bool {
    !*b
}

/// Variables of one process, protocol layer and tree layer together.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcState {
    pub id: Pid,
    /// `P.j`; equal to `id` at the root.
    pub parent: Pid,
    /// `l.j`.
    pub leader: Pid,
    /// Hop distance to the believed leader (tree layer only).
    #[serde(default)]
    pub dist: u64,
    pub status: Status,
    pub sn: u64,
    pub otsn: u64,
    pub ctsn: u64,
    pub res: u8,
    #[serde(default = "yes")]
    pub alive: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    pub pending_ae: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    pub authorized: bool,
}

impl ProcState {
    /// A process that is its own root with every counter at zero.
    pub fn fresh(id: Pid) -> Self {
        ProcState {
            id,
            parent: id,
            leader: id,
            dist: 0,
            status: Status::Stable,
            sn: 0,
            otsn: 0,
            ctsn: 0,
            res: 1,
            alive: true,
            pending_ae: false,
            authorized: false,
        }
    }

    pub fn is_root(&self) -> bool {
        self.parent == self.id
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StateError {
    #[error("expected {expected} process states, got {got}")]
    WrongSize { expected: usize, got: usize },
    #[error("process at index {index} has id {id}")]
    IdMismatch { index: usize, id: Pid },
    #[error("process {pid}: {field} = {value} outside its domain (max {max})")]
    OutOfDomain {
        pid: Pid,
        field: &'static str,
        value: u64,
        max: u64,
    },
    #[error("process {pid} is authorized but is not a root")]
    AuthorizedNonRoot { pid: Pid },
}

/// A global state: the topology, the mode, and every process's variables.
///
/// Equality and hashing look only at the process vector; configurations
/// compared against each other always share topology and mode.
#[derive(Clone, Debug, Serialize)]
pub struct Configuration {
    #[serde(skip)]
    pub topology: Arc<Topology>,
    #[serde(skip)]
    pub mode: Mode,
    pub procs: Vec<ProcState>,
}

impl PartialEq for Configuration {
    fn eq(&self, other: &Self) -> bool {
        self.procs == other.procs
    }
}

impl Eq for Configuration {}

impl Hash for Configuration {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.procs.hash(state);
    }
}

impl Configuration {
    pub fn new(topology: Arc<Topology>, kind: ModeKind, procs: Vec<ProcState>) -> Result<Self, StateError> {
        let mode = Mode::new(kind, topology.n());
        let cfg = Configuration { topology, mode, procs };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Build without domain validation (used for deliberately corrupted states).
    pub fn new_unchecked(topology: Arc<Topology>, kind: ModeKind, procs: Vec<ProcState>) -> Self {
        let mode = Mode::new(kind, topology.n());
        Configuration { topology, mode, procs }
    }

    pub fn n(&self) -> usize {
        self.procs.len()
    }

    pub fn proc(&self, pid: Pid) -> &ProcState {
        &self.procs[pid]
    }

    pub fn alive(&self, pid: Pid) -> bool {
        self.procs[pid].alive
    }

    pub fn alive_mask(&self) -> Vec<bool> {
        self.procs.iter().map(|p| p.alive).collect()
    }

    pub fn alive_procs(&self) -> impl Iterator<Item = &ProcState> + '_ {
        self.procs.iter().filter(|p| p.alive)
    }

    /// `Nbr.j` restricted to processes that have not fail-stopped.
    pub fn alive_neighbors(&self, pid: Pid) -> impl Iterator<Item = &ProcState> + '_ {
        self.topology
            .neighbors(pid)
            .iter()
            .map(move |&k| &self.procs[k])
            .filter(|p| p.alive)
    }

    /// Alive neighbours `k` with `P.k = j`.
    pub fn children(&self, pid: Pid) -> impl Iterator<Item = &ProcState> + '_ {
        self.alive_neighbors(pid).filter(move |p| p.parent == pid)
    }

    /// The parent's variables, if they can be read: the process itself when it
    /// is a root, an alive neighbour otherwise, and `None` for a dead or
    /// non-adjacent parent.
    pub fn readable_parent(&self, pid: Pid) -> Option<&ProcState> {
        let me = &self.procs[pid];
        if me.parent == pid {
            return Some(me);
        }
        if me.parent < self.n() && self.procs[me.parent].alive && self.topology.is_neighbor(pid, me.parent) {
            Some(&self.procs[me.parent])
        } else {
            None
        }
    }

    /// Copy with process `pid` replaced.
    pub fn with_proc(&self, state: ProcState) -> Configuration {
        let mut next = self.clone();
        next.procs[state.id] = state;
        next
    }

    pub fn validate(&self) -> Result<(), StateError> {
        let n = self.topology.n();
        if self.procs.len() != n {
            return Err(StateError::WrongSize {
                expected: n,
                got: self.procs.len(),
            });
        }
        for (index, p) in self.procs.iter().enumerate() {
            if p.id != index {
                return Err(StateError::IdMismatch { index, id: p.id });
            }
            let bad = |field: &'static str, value: u64, max: u64| StateError::OutOfDomain {
                pid: p.id,
                field,
                value,
                max,
            };
            let max_id = (n - 1) as u64;
            if p.parent >= n {
                return Err(bad("parent", p.parent as u64, max_id));
            }
            if p.leader >= n {
                return Err(bad("leader", p.leader as u64, max_id));
            }
            if p.dist > n as u64 {
                return Err(bad("dist", p.dist, n as u64));
            }
            if p.res > 1 {
                return Err(bad("res", p.res as u64, 1));
            }
            if let Some(max) = self.mode.counter_max() {
                if p.otsn > max {
                    return Err(bad("otsn", p.otsn, max));
                }
                if p.ctsn > max {
                    return Err(bad("ctsn", p.ctsn, max));
                }
                if p.sn > 1 {
                    return Err(bad("sn", p.sn, 1));
                }
            }
            if p.authorized && !p.is_root() {
                return Err(StateError::AuthorizedNonRoot { pid: p.id });
            }
        }
        Ok(())
    }
}
