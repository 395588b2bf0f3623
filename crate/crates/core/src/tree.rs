//! Silent spanning-tree layer underneath the protocol.
//!
//! Min-id leader election fused with a BFS tree. A process prefers the
//! lexicographically smallest `(leader, dist, parent)` among electing itself
//! `(id, 0, id)` and adopting an alive neighbour `k`'s view
//! `(l.k, dist.k + 1, k)`. Neighbours that already point at the process are
//! skipped, and views whose distance would exceed `N` are discarded, which
//! flushes stale leader ids left behind by fail-stopped processes.

use thiserror::Error;

use crate::state::Configuration;
use crate::Pid;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("tree variables of process {0} are already locally consistent")]
    NotEnabled(Pid),
}

/// The tree-layer triple owned by this module.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct TreeVars {
    pub leader: Pid,
    pub dist: u64,
    pub parent: Pid,
}

/// The locally consistent `(leader, dist, parent)` for `pid`.
pub fn preferred(cfg: &Configuration, pid: Pid) -> TreeVars {
    let cap = cfg.n() as u64;
    let mut best = TreeVars {
        leader: pid,
        dist: 0,
        parent: pid,
    };
    for k in cfg.alive_neighbors(pid) {
        if k.parent == pid {
            continue;
        }
        let dist = k.dist.saturating_add(1);
        if dist > cap {
            continue;
        }
        let candidate = TreeVars {
            leader: k.leader,
            dist,
            parent: k.id,
        };
        if candidate < best {
            best = candidate;
        }
    }
    best
}

fn current(cfg: &Configuration, pid: Pid) -> TreeVars {
    let p = cfg.proc(pid);
    TreeVars {
        leader: p.leader,
        dist: p.dist,
        parent: p.parent,
    }
}

pub fn tree_enabled(cfg: &Configuration, pid: Pid) -> bool {
    cfg.alive(pid) && current(cfg, pid) != preferred(cfg, pid)
}

/// Rewrite `pid`'s tree variables. The second component is the notification
/// the protocol layer must act on (its `res` reset).
pub fn tree_step(cfg: &Configuration, pid: Pid) -> Result<(Configuration, bool), TreeError> {
    if !tree_enabled(cfg, pid) {
        return Err(TreeError::NotEnabled(pid));
    }
    let want = preferred(cfg, pid);
    let mut me = *cfg.proc(pid);
    me.leader = want.leader;
    me.dist = want.dist;
    me.parent = want.parent;
    Ok((cfg.with_proc(me), true))
}

pub fn is_tree_silent(cfg: &Configuration) -> bool {
    (0..cfg.n()).all(|pid| !tree_enabled(cfg, pid))
}

/// Repeatedly apply tree steps in id order until silent, without touching
/// protocol variables. Returns the number of corrections made.
pub fn settle(cfg: &mut Configuration) -> usize {
    let mut steps = 0;
    loop {
        let mut changed = false;
        for pid in 0..cfg.n() {
            if tree_enabled(cfg, pid) {
                let want = preferred(cfg, pid);
                let p = &mut cfg.procs[pid];
                p.leader = want.leader;
                p.dist = want.dist;
                p.parent = want.parent;
                changed = true;
                steps += 1;
            }
        }
        if !changed {
            return steps;
        }
    }
}

/// The unique alive root, if the alive processes agree on exactly one.
pub fn unique_root(cfg: &Configuration) -> Option<Pid> {
    let mut roots = cfg.alive_procs().filter(|p| p.is_root());
    let root = roots.next()?;
    if roots.next().is_some() {
        return None;
    }
    Some(root.id)
}

/// Whether the parent pointers of the alive processes form a single tree
/// over graph edges, rooted at the unique root, with every `l.j` naming it.
pub fn forms_tree(cfg: &Configuration) -> bool {
    let Some(root) = unique_root(cfg) else {
        return false;
    };
    let n = cfg.n();
    for p in cfg.alive_procs() {
        if p.leader != root {
            return false;
        }
        let mut cur = p.id;
        let mut hops = 0;
        while cur != root {
            let parent = cfg.proc(cur).parent;
            if parent >= n || !cfg.alive(parent) || !cfg.topology.is_neighbor(cur, parent) {
                return false;
            }
            cur = parent;
            hops += 1;
            if hops > n {
                return false;
            }
        }
    }
    true
}
