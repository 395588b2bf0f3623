//! Finite enumeration of configurations for exhaustive checks.
//!
//! Unbounded counters range over small sub-domains. The guards only compare
//! counters with each other (equality, `<`, `max`) and add one, so shifting
//! every `sn`, `otsn` and `ctsn` by the same constant maps transitions to
//! transitions; three values cover every order pattern between a process and
//! one neighbour.

use std::sync::Arc;

use crate::counter::{Mode, ModeKind};
use crate::state::{Configuration, ProcState, Status};
use crate::topology::Topology;
use crate::tree;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CounterSpace {
    /// Every alive `otsn` and `ctsn` takes one common value.
    Shared(Vec<u64>),
    /// Each `otsn` and `ctsn` independently.
    Free(Vec<u64>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TreeSpace {
    /// Tree variables at the fixpoint for the alive set.
    Silent,
    /// Any parent and leader; `dist` over `0..=N` when `full_dist`, else 0.
    Free { full_dist: bool },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpaceSpec {
    pub statuses: Vec<Status>,
    pub sn: Vec<u64>,
    pub counters: CounterSpace,
    pub res: Vec<u8>,
    pub tree: TreeSpace,
    /// Also enumerate every non-empty proper subset of alive processes.
    /// Fail-stopped processes get canonical fields.
    pub dead_subsets: bool,
    /// Enumerate `authorized` at roots.
    pub authorized: bool,
    /// Enumerate `pending_ae`.
    pub pending: bool,
}

/// Counter values used for a mode: `{0, 1, 2}` unbounded, the full ring bounded.
pub fn counter_values(mode: Mode) -> Vec<u64> {
    match mode.counter_max() {
        Some(max) => (0..=max).collect(),
        None => vec![0, 1, 2],
    }
}

pub fn sn_values(mode: Mode) -> Vec<u64> {
    if mode.is_bounded() {
        vec![0, 1]
    } else {
        vec![0, 1, 2]
    }
}

impl SpaceSpec {
    /// Every field over its (sub-)domain.
    pub fn all(mode: Mode) -> Self {
        SpaceSpec {
            statuses: Status::ALL.to_vec(),
            sn: sn_values(mode),
            counters: CounterSpace::Free(counter_values(mode)),
            res: vec![0, 1],
            tree: TreeSpace::Free { full_dist: true },
            dead_subsets: false,
            authorized: true,
            pending: false,
        }
    }

    /// The fault-span `T`: normal statuses and one shared counter value.
    pub fn t(mode: Mode) -> Self {
        SpaceSpec {
            statuses: vec![Status::Restore, Status::Stable],
            counters: CounterSpace::Shared(counter_values(mode)),
            ..SpaceSpec::all(mode)
        }
    }

    /// Wave statuses over a silent tree, counters free.
    pub fn waves(mode: Mode) -> Self {
        SpaceSpec {
            statuses: vec![Status::Bottom, Status::Top],
            tree: TreeSpace::Silent,
            authorized: false,
            ..SpaceSpec::all(mode)
        }
    }

    fn alive_masks(&self, n: usize) -> Vec<Vec<bool>> {
        if !self.dead_subsets {
            return vec![vec![true; n]];
        }
        (1..(1u64 << n))
            .rev()
            .map(|bits| (0..n).map(|i| bits >> i & 1 == 1).collect())
            .collect()
    }

    fn counter_pairs(&self) -> Vec<(u64, u64)> {
        match &self.counters {
            CounterSpace::Shared(_) => vec![(0, 0)],
            CounterSpace::Free(v) => v.iter().flat_map(|&o| v.iter().map(move |&c| (o, c))).collect(),
        }
    }

    fn shared_values(&self) -> Vec<u64> {
        match &self.counters {
            CounterSpace::Shared(v) => v.clone(),
            CounterSpace::Free(_) => vec![0],
        }
    }

    /// Per-process candidate states for one alive mask.
    fn templates(&self, topo: &Arc<Topology>, kind: ModeKind, alive: &[bool]) -> Vec<Vec<ProcState>> {
        let n = topo.n();
        let silent = match self.tree {
            TreeSpace::Silent => {
                let procs = (0..n)
                    .map(|i| ProcState {
                        alive: alive[i],
                        ..ProcState::fresh(i)
                    })
                    .collect();
                let mut cfg = Configuration::new_unchecked(topo.clone(), kind, procs);
                tree::settle(&mut cfg);
                Some(cfg.procs)
            }
            TreeSpace::Free { .. } => None,
        };
        let trees: Vec<Vec<(usize, usize, u64)>> = (0..n)
            .map(|i| match (&silent, &self.tree) {
                (Some(procs), _) => vec![(procs[i].parent, procs[i].leader, procs[i].dist)],
                (None, TreeSpace::Free { full_dist }) => {
                    let dists: Vec<u64> = if *full_dist { (0..=n as u64).collect() } else { vec![0] };
                    let mut out = Vec::new();
                    for parent in 0..n {
                        for leader in 0..n {
                            for &d in &dists {
                                out.push((parent, leader, d));
                            }
                        }
                    }
                    out
                }
                (None, TreeSpace::Silent) => unreachable!(),
            })
            .collect();
        let pairs = self.counter_pairs();
        let pendings: &[bool] = if self.pending { &[false, true] } else { &[false] };
        (0..n)
            .map(|i| {
                if !alive[i] {
                    return vec![ProcState {
                        alive: false,
                        ..ProcState::fresh(i)
                    }];
                }
                let mut out = Vec::new();
                for &(parent, leader, dist) in &trees[i] {
                    let auths: &[bool] = if self.authorized && parent == i { &[false, true] } else { &[false] };
                    for &status in &self.statuses {
                        for &sn in &self.sn {
                            for &res in &self.res {
                                for &(otsn, ctsn) in &pairs {
                                    for &pending_ae in pendings {
                                        for &authorized in auths {
                                            out.push(ProcState {
                                                id: i,
                                                parent,
                                                leader,
                                                dist,
                                                status,
                                                sn,
                                                otsn,
                                                ctsn,
                                                res,
                                                alive: true,
                                                pending_ae,
                                                authorized,
                                            });
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
                out
            })
            .collect()
    }

    /// Exact number of configurations [`SpaceSpec::for_each`] visits.
    pub fn count(&self, topo: &Arc<Topology>, kind: ModeKind) -> u128 {
        let shared = self.shared_values().len() as u128;
        self.alive_masks(topo.n())
            .iter()
            .map(|mask| {
                self.templates(topo, kind, mask)
                    .iter()
                    .map(|t| t.len() as u128)
                    .product::<u128>()
                    * shared
            })
            .sum()
    }

    /// Visit every configuration. The visitor returns `false` to stop early.
    pub fn for_each(&self, topo: &Arc<Topology>, kind: ModeKind, mut visit: impl FnMut(&Configuration) -> bool) {
        let n = topo.n();
        let shared = self.shared_values();
        let is_shared = matches!(self.counters, CounterSpace::Shared(_));
        for mask in self.alive_masks(n) {
            let templates = self.templates(topo, kind, &mask);
            let mut digits = vec![0usize; n];
            let mut cfg = Configuration::new_unchecked(topo.clone(), kind, templates.iter().map(|t| t[0]).collect());
            loop {
                for (i, &d) in digits.iter().enumerate() {
                    cfg.procs[i] = templates[i][d];
                }
                for &c in &shared {
                    if is_shared {
                        for (p, alive) in cfg.procs.iter_mut().zip(&mask) {
                            if *alive {
                                p.otsn = c;
                                p.ctsn = c;
                            }
                        }
                    }
                    if !visit(&cfg) {
                        return;
                    }
                }
                // Mixed-radix increment.
                let mut i = 0;
                loop {
                    if i == n {
                        break;
                    }
                    digits[i] += 1;
                    if digits[i] < templates[i].len() {
                        break;
                    }
                    digits[i] = 0;
                    i += 1;
                }
                if i == n {
                    break;
                }
            }
        }
    }

    pub fn collect(&self, topo: &Arc<Topology>, kind: ModeKind) -> Vec<Configuration> {
        let mut out = Vec::new();
        self.for_each(topo, kind, |c| {
            out.push(c.clone());
            true
        });
        out
    }
}
