//! Explicit-state exploration of the full nondeterministic transition
//! relation (protocol steps under the priority rule, plus an optional
//! environment alphabet), with a fairness check by closed-SCC analysis.

use petgraph::algo::tarjan_scc;
use rand::SeedableRng;
use petgraph::graph::{DiGraph, NodeIndex};
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, VecDeque};
use thiserror::Error;

use crate::checker::predicate::{self, eval_predicate, PredicateError, PredicateId};
use crate::checker::report::{CheckReport, PathStep, Stats, Witness};
use crate::protocol::{apply_action, Action, ProtocolError};
use crate::checker::space::SpaceSpec;
use crate::sim::{authorization_target, candidates, init_config, InitPolicy, InjectionKind, Scenario, ScenarioError};
use crate::state::{Configuration, ProcState};
use crate::Pid;

#[derive(Debug, Error)]
pub enum ExploreError {
    #[error("state bound exceeded: more than {0} reachable states")]
    TooManyStates(usize),
    #[error("no initial states")]
    NoInitialStates,
    #[error(transparent)]
    Predicate(#[from] PredicateError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("{0}")]
    Unsupported(String),
}

/// Environment steps the explorer may take besides protocol actions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Alphabet {
    /// Auditable events still available along any path, each at any alive process.
    pub ae_budget: u8,
    /// Authorize the leader whenever it is not authorized.
    pub authorize: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Goal {
    /// Build the reachable graph only.
    None,
    /// Every fair path reaches the predicate.
    Reach(PredicateId),
    /// Every fair path reaches `S1` after the last detection action, having
    /// passed through `S2` in between.
    TwoPhase,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Move {
    Protocol { pid: Pid, action: Action },
    Inject { injection: InjectionKind },
    Stutter,
}

impl std::fmt::Display for Move {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Move::Protocol { pid, action } => write!(f, "{action} at {pid}"),
            Move::Inject { injection } => write!(f, "{injection}"),
            Move::Stutter => f.write_str("stutter"),
        }
    }
}

/// Two-phase monitor: 0 before any detection, 1 after a detection, 2 once
/// `S2` has held since the last detection.
pub type Phase = u8;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Node {
    pub procs: Vec<ProcState>,
    pub ae_left: u8,
    pub phase: Phase,
}

#[derive(Clone, Debug)]
pub struct StateGraph {
    pub nodes: Vec<Node>,
    pub edges: Vec<(usize, Move, usize)>,
    pub initial: Vec<usize>,
    /// BFS predecessor of each node (`None` for initial nodes).
    pub parent: Vec<Option<(usize, usize)>>,
    pub depth: Vec<u64>,
    /// Nodes not expanded because the goal holds there.
    pub target: Vec<bool>,
}

impl StateGraph {
    pub fn diameter(&self) -> u64 {
        self.depth.iter().copied().max().unwrap_or(0)
    }

    /// Path of labelled states from an initial node to `node`.
    pub fn path_to(&self, node: usize) -> Vec<PathStep> {
        let mut rev = vec![PathStep {
            via: None,
            state: self.nodes[node].procs.clone(),
        }];
        let mut cur = node;
        while let Some((prev, edge)) = self.parent[cur] {
            rev.last_mut().expect("non-empty").via = Some(self.edges[edge].1.to_string());
            rev.push(PathStep {
                via: None,
                state: self.nodes[prev].procs.clone(),
            });
            cur = prev;
        }
        rev.reverse();
        rev
    }
}

fn successors(cfg: &Configuration, ae_left: u8, alphabet: &Alphabet) -> Result<Vec<(Move, Configuration, u8)>, ProtocolError> {
    let mut out = Vec::new();
    let cands = candidates(cfg);
    if cands.is_empty() {
        out.push((Move::Stutter, cfg.clone(), ae_left));
    }
    for (pid, action) in cands {
        out.push((Move::Protocol { pid, action }, apply_action(cfg, pid, action)?, ae_left));
    }
    if ae_left > 0 {
        for pid in 0..cfg.n() {
            if cfg.alive(pid) {
                let mut next = cfg.clone();
                next.procs[pid].pending_ae = true;
                out.push((
                    Move::Inject {
                        injection: InjectionKind::AuditableEvent { pid },
                    },
                    next,
                    ae_left - 1,
                ));
            }
        }
    }
    if alphabet.authorize {
        if let Some(root) = authorization_target(cfg) {
            if !cfg.proc(root).authorized {
                let mut next = cfg.clone();
                next.procs[root].authorized = true;
                out.push((
                    Move::Inject {
                        injection: InjectionKind::Authorize,
                    },
                    next,
                    ae_left,
                ));
            }
        }
    }
    Ok(out)
}

fn next_phase(phase: Phase, mv: &Move, next: &Configuration) -> Phase {
    match mv {
        Move::Protocol { action, .. } if action.is_detection() => 1,
        _ if phase == 1 && predicate::s2(next) => 2,
        _ => phase,
    }
}

enum Status {
    Target,
    Bad,
    Open,
}

fn classify(cfg: &Configuration, node: &Node, goal: Goal) -> Result<Status, PredicateError> {
    Ok(match goal {
        Goal::None => Status::Open,
        Goal::Reach(p) => {
            if eval_predicate(cfg, p)? {
                Status::Target
            } else {
                Status::Open
            }
        }
        Goal::TwoPhase => {
            if !predicate::s1(cfg) {
                Status::Open
            } else {
                match node.phase {
                    2 => Status::Target,
                    1 => Status::Bad,
                    _ if node.ae_left == 0 && cfg.alive_procs().all(|p| !p.pending_ae) => Status::Target,
                    _ => Status::Open,
                }
            }
        }
    })
}

/// Breadth-first construction of the reachable graph. Target nodes are not
/// expanded. Returns the graph and the first bad node found, if any.
pub fn build_graph(
    init: &[Configuration],
    alphabet: &Alphabet,
    goal: Goal,
    max_states: usize,
) -> Result<(StateGraph, Option<usize>), ExploreError> {
    let Some(first) = init.first() else {
        return Err(ExploreError::NoInitialStates);
    };
    let topo = first.topology.clone();
    let kind = first.mode.kind;
    let mut g = StateGraph {
        nodes: Vec::new(),
        edges: Vec::new(),
        initial: Vec::new(),
        parent: Vec::new(),
        depth: Vec::new(),
        target: Vec::new(),
    };
    let mut index: HashMap<Node, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    let mut bad = None;

    let mut intern = |g: &mut StateGraph, node: Node, parent: Option<(usize, usize)>, depth: u64, queue: &mut VecDeque<usize>| -> Result<usize, ExploreError> {
        if let Some(&i) = index.get(&node) {
            return Ok(i);
        }
        if g.nodes.len() >= max_states {
            return Err(ExploreError::TooManyStates(max_states));
        }
        let i = g.nodes.len();
        index.insert(node.clone(), i);
        g.nodes.push(node);
        g.parent.push(parent);
        g.depth.push(depth);
        g.target.push(false);
        queue.push_back(i);
        Ok(i)
    };

    for c in init {
        let node = Node {
            procs: c.procs.clone(),
            ae_left: alphabet.ae_budget,
            phase: 0,
        };
        let before = g.nodes.len();
        let i = intern(&mut g, node, None, 0, &mut queue)?;
        if i == before {
            g.initial.push(i);
        }
    }

    while let Some(i) = queue.pop_front() {
        let node = g.nodes[i].clone();
        let cfg = Configuration::new_unchecked(topo.clone(), kind, node.procs.clone());
        match classify(&cfg, &node, goal)? {
            Status::Target => {
                g.target[i] = true;
                continue;
            }
            Status::Bad => {
                bad.get_or_insert(i);
                g.target[i] = false;
                continue;
            }
            Status::Open => {}
        }
        for (mv, next, ae_left) in successors(&cfg, node.ae_left, alphabet)? {
            let phase = if goal == Goal::TwoPhase {
                next_phase(node.phase, &mv, &next)
            } else {
                0
            };
            let succ = Node {
                procs: next.procs,
                ae_left,
                phase,
            };
            let edge = g.edges.len();
            let depth = g.depth[i] + 1;
            let j = intern(&mut g, succ, Some((i, edge)), depth, &mut queue)?;
            g.edges.push((i, mv, j));
        }
    }
    Ok((g, bad))
}

/// Non-target strongly connected components with no edge leaving them.
/// A fair computation may stay in such a component forever.
pub fn closed_non_target_sccs(g: &StateGraph) -> Vec<Vec<usize>> {
    let mut dg: DiGraph<(), ()> = DiGraph::with_capacity(g.nodes.len(), g.edges.len());
    for _ in &g.nodes {
        dg.add_node(());
    }
    for (a, _, b) in &g.edges {
        if !g.target[*a] && !g.target[*b] {
            dg.add_edge(NodeIndex::new(*a), NodeIndex::new(*b), ());
        }
    }
    let sccs = tarjan_scc(&dg);
    let mut comp = vec![usize::MAX; g.nodes.len()];
    for (ci, scc) in sccs.iter().enumerate() {
        for n in scc {
            comp[n.index()] = ci;
        }
    }
    let mut leaves = vec![true; sccs.len()];
    for (a, _, b) in &g.edges {
        if comp[*a] != comp[*b] || g.target[*b] {
            leaves[comp[*a]] = false;
        }
    }
    sccs.into_iter()
        .enumerate()
        .filter(|(ci, scc)| leaves[*ci] && scc.iter().all(|n| !g.target[n.index()]))
        .map(|(_, scc)| {
            let mut v: Vec<usize> = scc.into_iter().map(|n| n.index()).collect();
            v.sort_unstable();
            v
        })
        .collect()
}

/// Initial states and environment alphabet for exploring a scenario.
/// Legitimate and explicit inits give one state; `random` and `random_t`
/// give every state of the full or fault-span domain. Auditable-event
/// injections make up the event budget, authorize injections or
/// `auto_authorize` enable authorization. Faults are not part of the alphabet.
pub fn scenario_setup(scenario: &Scenario, max_states: usize) -> Result<(Vec<Configuration>, Alphabet), ExploreError> {
    scenario.validate()?;
    let mut ae = 0usize;
    let mut authorize = scenario.auto_authorize;
    for inj in &scenario.injections {
        match inj.kind {
            InjectionKind::AuditableEvent { .. } => ae += 1,
            InjectionKind::Authorize => authorize = true,
            ref other => {
                return Err(ExploreError::Unsupported(format!(
                    "the explore alphabet has auditable events and authorization only, not {other}"
                )))
            }
        }
    }
    let ae_budget = u8::try_from(ae).map_err(|_| ExploreError::Unsupported(format!("{ae} auditable events is too many")))?;
    let space = match scenario.init {
        InitPolicy::ArbitraryRandom => Some(SpaceSpec::all(scenario.mode())),
        InitPolicy::RandomT => Some(SpaceSpec::t(scenario.mode())),
        InitPolicy::Legitimate | InitPolicy::Explicit(_) => None,
    };
    let init = match space {
        Some(space) => {
            let count = space.count(&scenario.topology, scenario.mode);
            if count > max_states as u128 {
                return Err(ExploreError::Unsupported(format!(
                    "{count} initial states exceed the bound of {max_states}"
                )));
            }
            space.collect(&scenario.topology, scenario.mode)
        }
        None => {
            // Neither init policy draws from the generator.
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(scenario.seed);
            vec![init_config(scenario, &mut rng)?]
        }
    };
    Ok((init, Alphabet { ae_budget, authorize }))
}

/// Explore from `init` and decide whether every fair path meets `goal`.
pub fn explore(init: &[Configuration], alphabet: &Alphabet, goal: Goal, max_states: usize) -> Result<CheckReport, ExploreError> {
    let property = match goal {
        Goal::None => "explore".to_string(),
        Goal::Reach(p) => format!("reach-{p}"),
        Goal::TwoPhase => "two-phase".to_string(),
    };
    if let Goal::Reach(p) = goal {
        if let Some(c) = init.first() {
            eval_predicate(c, p)?;
        }
    }
    let (g, bad) = build_graph(init, alphabet, goal, max_states)?;
    let stats = Stats {
        states_explored: g.nodes.len() as u64,
        transitions: g.edges.len() as u64,
        diameter: Some(g.diameter()),
        ..Stats::default()
    };
    let scope = format!(
        "{} initial, {} reachable states, {} transitions, depth {}",
        g.initial.len(),
        g.nodes.len(),
        g.edges.len(),
        g.diameter()
    );
    if let Some(b) = bad {
        return Ok(CheckReport::fail(
            &property,
            Witness::Path {
                steps: g.path_to(b),
                cycle_from: None,
            },
            format!("S1 reached after a detection without passing through S2 ({scope})"),
        )
        .with_stats(stats));
    }
    if goal == Goal::None {
        return Ok(CheckReport::pass(&property, scope).with_stats(stats));
    }
    let closed = closed_non_target_sccs(&g);
    if let Some(scc) = closed.iter().min_by_key(|scc| g.depth[scc[0]]) {
        let entry = *scc.iter().min_by_key(|&&n| g.depth[n]).expect("non-empty");
        let mut steps = g.path_to(entry);
        let cycle_from = steps.len() - 1;
        // Append the rest of the component so the witness shows where it loops.
        for &n in scc.iter().filter(|&&n| n != entry).take(16) {
            steps.push(PathStep {
                via: None,
                state: g.nodes[n].procs.clone(),
            });
        }
        return Ok(CheckReport::fail(
            &property,
            Witness::Path {
                steps,
                cycle_from: Some(cycle_from),
            },
            format!(
                "{} closed component(s) never reach the goal, the first has {} state(s) ({scope})",
                closed.len(),
                scc.len()
            ),
        )
        .with_stats(stats));
    }
    Ok(CheckReport::pass(&property, format!("every fair path reaches the goal ({scope})")).with_stats(stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checker::space::SpaceSpec;
    use crate::counter::{Mode, ModeKind};
    use crate::testutil::{legit_line, single};

    #[test]
    fn legitimate_single_process_is_already_s1() {
        let r = explore(&[single(ModeKind::Unbounded)], &Alphabet::default(), Goal::Reach(PredicateId::S1), 100).unwrap();
        assert!(r.passed());
        assert_eq!(r.stats.states_explored, 1);
    }

    #[test]
    fn awaiting_authorization_is_a_closed_component() {
        let mut cfg = single(ModeKind::Unbounded);
        cfg.procs[0].pending_ae = true;
        // The start is already in S1 (a pending detection is not part of it).
        let reach = explore(&[cfg.clone()], &Alphabet::default(), Goal::Reach(PredicateId::S1), 100).unwrap();
        assert!(reach.passed());
        let no_auth = explore(&[cfg.clone()], &Alphabet::default(), Goal::TwoPhase, 100).unwrap();
        assert!(!no_auth.passed());
        assert!(matches!(no_auth.witness, Some(Witness::Path { cycle_from: Some(_), .. })));
        let with_auth = Alphabet {
            ae_budget: 0,
            authorize: true,
        };
        let r = explore(&[cfg], &with_auth, Goal::TwoPhase, 100).unwrap();
        assert!(r.passed(), "{}", r.message);
    }

    #[test]
    fn bounded_single_process_all_states_stabilizes() {
        let topo = std::sync::Arc::new(crate::topology::Topology::line(1));
        let init = SpaceSpec::all(Mode::bounded(1)).collect(&topo, ModeKind::Bounded);
        let alphabet = Alphabet {
            ae_budget: 0,
            authorize: true,
        };
        let r = explore(&init, &alphabet, Goal::Reach(PredicateId::S1), 10_000).unwrap();
        assert!(r.passed(), "{}", r.message);
    }

    #[test]
    fn bound_is_enforced() {
        let mut cfg = legit_line(2, ModeKind::Unbounded);
        cfg.procs[1].pending_ae = true;
        let alphabet = Alphabet {
            ae_budget: 2,
            authorize: true,
        };
        assert!(matches!(
            build_graph(&[cfg], &alphabet, Goal::None, 5),
            Err(ExploreError::TooManyStates(5))
        ));
    }
}
