//! Communication graph: who can read whose variables.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeSet, VecDeque};
use thiserror::Error;

use crate::Pid;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TopologyError {
    #[error("topology must have at least one process")]
    Empty,
    #[error("edge [{a}, {b}] references process id {bad}, but valid ids are 0..{n}")]
    OutOfRange { a: Pid, b: Pid, bad: Pid, n: usize },
    #[error("edge [{0}, {0}] is a self-loop")]
    SelfLoop(Pid),
    #[error("topology is disconnected: process {0} is unreachable from process 0")]
    Disconnected(Pid),
}

/// Serialized shape of a topology: `{"n": 3, "edges": [[0,1],[1,2]]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySpec {
    pub n: usize,
    pub edges: Vec<[Pid; 2]>,
}

/// Undirected, connected graph over ids `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "TopologySpec", into = "TopologySpec")]
pub struct Topology {
    n: usize,
    edges: Vec<(Pid, Pid)>,
    adjacency: Vec<Vec<Pid>>,
}

impl TryFrom<TopologySpec> for Topology {
    type Error = TopologyError;

    fn try_from(spec: TopologySpec) -> Result<Self, Self::Error> {
        Topology::new(spec.n, spec.edges.iter().map(|e| (e[0], e[1])))
    }
}

impl From<Topology> for TopologySpec {
    fn from(t: Topology) -> Self {
        TopologySpec {
            n: t.n,
            edges: t.edges.iter().map(|&(a, b)| [a, b]).collect(),
        }
    }
}

impl Topology {
    pub fn new(n: usize, edges: impl IntoIterator<Item = (Pid, Pid)>) -> Result<Self, TopologyError> {
        if n == 0 {
            return Err(TopologyError::Empty);
        }
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                let bad = if a >= n { a } else { b };
                return Err(TopologyError::OutOfRange { a, b, bad, n });
            }
            if a == b {
                return Err(TopologyError::SelfLoop(a));
            }
            set.insert((a.min(b), a.max(b)));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &set {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for nbrs in &mut adjacency {
            nbrs.sort_unstable();
        }
        let topo = Topology {
            n,
            edges: set.into_iter().collect(),
            adjacency,
        };
        if let Some(p) = topo.first_unreachable() {
            return Err(TopologyError::Disconnected(p));
        }
        Ok(topo)
    }

    pub fn line(n: usize) -> Self {
        Self::new(n, (1..n).map(|i| (i - 1, i))).expect("line is connected")
    }

    pub fn star(n: usize) -> Self {
        Self::new(n, (1..n).map(|i| (0, i))).expect("star is connected")
    }

    pub fn ring(n: usize) -> Self {
        let mut edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        if n > 2 {
            edges.push((n - 1, 0));
        }
        Self::new(n, edges).expect("ring is connected")
    }

    /// Uniform random recursive tree: node `i` attaches to a random earlier node.
    pub fn random_tree<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        Self::new(n, (1..n).map(|i| (rng.gen_range(0..i), i))).expect("tree is connected")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(Pid, Pid)] {
        &self.edges
    }

    pub fn neighbors(&self, pid: Pid) -> &[Pid] {
        &self.adjacency[pid]
    }

    pub fn is_neighbor(&self, a: Pid, b: Pid) -> bool {
        a < self.n && self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Connected components of the subgraph induced by `alive`.
    pub fn components(&self, alive: &[bool]) -> Vec<Vec<Pid>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for start in 0..self.n {
            if !alive[start] || seen[start] {
                continue;
            }
            let mut comp = vec![start];
            seen[start] = true;
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &v in self.neighbors(u) {
                    if alive[v] && !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                        queue.push_back(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// True when removing `pid` keeps the remaining `alive` processes connected.
    pub fn stays_connected_without(&self, alive: &[bool], pid: Pid) -> bool {
        let mut rest = alive.to_vec();
        rest[pid] = false;
        self.components(&rest).len() <= 1
    }

    fn first_unreachable(&self) -> Option<Pid> {
        let comps = self.components(&vec![true; self.n]);
        if comps.len() <= 1 {
            return None;
        }
        comps[1..].iter().map(|c| c[0]).min()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range_edge() {
        let err = Topology::new(2, [(0, 2)]).unwrap_err();
        assert_eq!(err, TopologyError::OutOfRange { a: 0, b: 2, bad: 2, n: 2 });
        assert!(err.to_string().contains("process id 2"));
    }

    #[test]
    fn rejects_self_loop_and_disconnected() {
        assert_eq!(Topology::new(2, [(1, 1)]).unwrap_err(), TopologyError::SelfLoop(1));
        assert_eq!(
            Topology::new(3, [(0, 1)]).unwrap_err(),
            TopologyError::Disconnected(2)
        );
    }

    #[test]
    fn dedupes_edges_and_sorts_neighbors() {
        let t = Topology::new(3, [(2, 0), (0, 2), (1, 0)]).unwrap();
        assert_eq!(t.edges(), &[(0, 1), (0, 2)]);
        assert_eq!(t.neighbors(0), &[1, 2]);
        assert!(t.is_neighbor(2, 0));
        assert!(!t.is_neighbor(1, 2));
    }

    #[test]
    fn components_of_alive_subgraph() {
        let t = Topology::line(4);
        assert_eq!(t.components(&[true, false, true, true]), vec![vec![0], vec![2, 3]]);
        assert!(!t.stays_connected_without(&[true; 4], 1));
        assert!(t.stays_connected_without(&[true; 4], 3));
    }

    #[test]
    fn serde_validates() {
        let ok: Topology = serde_json::from_str(r#"{"n":2,"edges":[[0,1]]}"#).unwrap();
        assert_eq!(ok.n(), 2);
        assert!(serde_json::from_str::<Topology>(r#"{"n":2,"edges":[[0,2]]}"#).is_err());
    }
}
