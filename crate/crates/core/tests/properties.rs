use std::collections::VecDeque;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use arsim_core::checker::predicate;
use arsim_core::protocol::{apply_action, enabled, enabled_everywhere};
use arsim_core::sim::{candidates, init_config, run, InitPolicy, InjectionKind, Scenario, StopCondition, Trace};
use arsim_core::{tree, Configuration, ModeKind, Topology};

fn topology(kind: u8, n: usize, rng: &mut ChaCha8Rng) -> Topology {
    match kind % 4 {
        0 => Topology::line(n),
        1 => Topology::star(n),
        2 => Topology::ring(n),
        _ => Topology::random_tree(n, rng),
    }
}

fn mode(bounded: bool) -> ModeKind {
    if bounded {
        ModeKind::Bounded
    } else {
        ModeKind::Unbounded
    }
}

fn random_config(seed: u64, n: usize, kind: u8, bounded: bool, init: InitPolicy) -> Configuration {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let topo = topology(kind, n, &mut rng);
    let mut s = Scenario::new(topo, mode(bounded), seed, 1);
    s.init = init;
    let mut cfg = init_config(&s, &mut rng).unwrap();
    for p in &mut cfg.procs {
        p.pending_ae = rng.gen_bool(0.2);
        p.authorized = p.is_root() && rng.gen_bool(0.3);
    }
    cfg
}

fn configs() -> impl Strategy<Value = Configuration> {
    (any::<u64>(), 1usize..=6, any::<u8>(), any::<bool>(), 0u8..3).prop_map(|(seed, n, kind, bounded, init)| {
        let init = match init {
            0 => InitPolicy::ArbitraryRandom,
            1 => InitPolicy::RandomT,
            _ => InitPolicy::Legitimate,
        };
        random_config(seed, n, kind, bounded, init)
    })
}

/// Breadth-first distances from `root` over alive processes.
fn bfs(cfg: &Configuration, root: usize) -> Vec<Option<u64>> {
    let mut dist = vec![None; cfg.n()];
    dist[root] = Some(0);
    let mut q = VecDeque::from([root]);
    while let Some(u) = q.pop_front() {
        for &v in cfg.topology.neighbors(u) {
            if cfg.alive(v) && dist[v].is_none() {
                dist[v] = Some(dist[u].unwrap() + 1);
                q.push_back(v);
            }
        }
    }
    dist
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn actions_touch_only_their_process(cfg in configs()) {
        for (pid, action) in enabled_everywhere(&cfg) {
            let next = apply_action(&cfg, pid, action).unwrap();
            for j in 0..cfg.n() {
                if j != pid {
                    prop_assert_eq!(cfg.proc(j), next.proc(j), "{} at {} changed {}", action, pid, j);
                }
            }
        }
    }

    #[test]
    fn actions_stay_in_domain(cfg in configs()) {
        for (pid, action) in enabled_everywhere(&cfg) {
            let next = apply_action(&cfg, pid, action).unwrap();
            prop_assert!(next.validate().is_ok(), "{} at {}: {:?}", action, pid, next.validate());
            prop_assert!(next.proc(pid).res <= 1);
        }
    }

    #[test]
    fn unbounded_otsn_never_decreases(cfg in configs()) {
        prop_assume!(cfg.mode.kind == ModeKind::Unbounded);
        for (pid, action) in enabled_everywhere(&cfg) {
            let next = apply_action(&cfg, pid, action).unwrap();
            prop_assert!(next.proc(pid).otsn >= cfg.proc(pid).otsn, "{} at {}", action, pid);
        }
    }

    #[test]
    fn predicate_chain(cfg in configs()) {
        if predicate::s1(&cfg) {
            prop_assert!(predicate::t(&cfg));
        }
        if predicate::t(&cfg) {
            prop_assert!(predicate::as_pred(&cfg));
        }
    }

    #[test]
    fn priority_actions_preempt(cfg in configs()) {
        let all = enabled_everywhere(&cfg);
        let cands = candidates(&cfg);
        if all.iter().any(|(_, a)| a.is_priority()) {
            prop_assert!(cands.iter().all(|(_, a)| a.is_priority()));
        } else {
            prop_assert_eq!(cands, all);
        }
    }

    #[test]
    fn dead_processes_have_nothing_enabled(cfg in configs(), victim in 0usize..6) {
        let mut cfg = cfg;
        let victim = victim % cfg.n();
        cfg.procs[victim].alive = false;
        prop_assert!(enabled(&cfg, victim).is_empty());
    }

    #[test]
    fn tree_fixpoint_is_bfs_from_min_id(cfg in configs(), dead in proptest::collection::vec(any::<bool>(), 6)) {
        let mut cfg = cfg;
        for (p, d) in cfg.procs.iter_mut().zip(&dead) {
            p.alive = !d;
        }
        if cfg.alive_procs().next().is_none() {
            cfg.procs[0].alive = true;
        }
        let n = cfg.n();
        let steps = tree::settle(&mut cfg);
        prop_assert!(tree::is_tree_silent(&cfg));
        prop_assert!(steps <= 4 * n * n * n, "{} corrections", steps);
        for comp in cfg.topology.components(&cfg.alive_mask()) {
            let root = *comp.iter().min().unwrap();
            let dist = bfs(&cfg, root);
            for &j in &comp {
                let p = cfg.proc(j);
                let d = dist[j].unwrap();
                prop_assert_eq!(p.leader, root);
                prop_assert_eq!(p.dist, d);
                let want_parent = if j == root {
                    root
                } else {
                    *cfg.topology.neighbors(j).iter().filter(|&&k| cfg.alive(k) && dist[k] == Some(d - 1)).min().unwrap()
                };
                prop_assert_eq!(p.parent, want_parent);
            }
        }
    }

    #[test]
    fn trace_json_round_trip(seed in any::<u64>(), n in 1usize..=5, kind in any::<u8>(), bounded in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let topo = topology(kind, n, &mut rng);
        let mut s = Scenario::new(topo, mode(bounded), seed, 150);
        s.init = if rng.gen_bool(0.5) { InitPolicy::ArbitraryRandom } else { InitPolicy::Legitimate };
        s.auto_authorize = true;
        s.stop = StopCondition::S1Quiescent;
        for _ in 0..rng.gen_range(0..4) {
            let at = rng.gen_range(0..100);
            s = s.inject_at(at, InjectionKind::AuditableEvent { pid: rng.gen_range(0..n) });
        }
        let trace = run(&s).unwrap();
        let text = trace.to_json();
        let back = Trace::from_json(&text).unwrap();
        prop_assert_eq!(&back, &trace);
        prop_assert_eq!(back.to_json(), text);
        prop_assert_eq!(back.configurations().unwrap().len(), trace.records.len());
    }
}
