//! Interleaving schedulers: exactly one enabled action fires per step.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::protocol::{apply_action, enabled_everywhere, Action, ProtocolError};
use crate::sim::scenario::SchedulerPolicy;
use crate::state::Configuration;
use crate::Pid;

/// Chooses one of the candidate `(pid, action)` pairs. `candidates` is never
/// empty and already restricted to the priority actions when any is enabled.
pub trait Scheduler {
    fn pick(&mut self, cfg: &Configuration, candidates: &[(Pid, Action)]) -> usize;
}

pub struct UniformRandom {
    rng: ChaCha8Rng,
}

impl UniformRandom {
    pub fn new(rng: ChaCha8Rng) -> Self {
        UniformRandom { rng }
    }
}

impl Scheduler for UniformRandom {
    fn pick(&mut self, _cfg: &Configuration, candidates: &[(Pid, Action)]) -> usize {
        self.rng.gen_range(0..candidates.len())
    }
}

/// Cycles over process ids, and within a process over its action labels, so
/// that a continuously enabled action fires within `N · |labels|` steps.
#[derive(Default)]
pub struct RoundRobin {
    next_pid: usize,
    next_label: Vec<usize>,
}

impl Scheduler for RoundRobin {
    fn pick(&mut self, cfg: &Configuration, candidates: &[(Pid, Action)]) -> usize {
        let n = cfg.n();
        if self.next_label.len() != n {
            self.next_label = vec![0; n];
        }
        let labels = Action::for_mode(cfg.mode.kind).len();
        for off in 0..n {
            let pid = (self.next_pid + off) % n;
            let cursor = self.next_label[pid];
            let best = candidates
                .iter()
                .enumerate()
                .filter(|(_, (p, _))| *p == pid)
                .min_by_key(|(_, (_, a))| (a.number() as usize - 1 + labels - cursor) % labels);
            if let Some((idx, (_, a))) = best {
                self.next_pid = (pid + 1) % n;
                self.next_label[pid] = a.number() as usize % labels;
                return idx;
            }
        }
        unreachable!("candidates is non-empty")
    }
}

pub fn make_scheduler(policy: SchedulerPolicy, rng: ChaCha8Rng) -> Box<dyn Scheduler> {
    match policy {
        SchedulerPolicy::UniformRandom => Box::new(UniformRandom::new(rng)),
        SchedulerPolicy::RoundRobin => Box::new(RoundRobin::default()),
    }
}

/// Enabled `(pid, action)` pairs, restricted to `AR2`/`AR6` (`B2`/`B6`)
/// whenever one of those is enabled anywhere.
pub fn candidates(cfg: &Configuration) -> Vec<(Pid, Action)> {
    let mut all = enabled_everywhere(cfg);
    if all.iter().any(|(_, a)| a.is_priority()) {
        all.retain(|(_, a)| a.is_priority());
    }
    all
}

/// One protocol step. `None` means nothing was enabled and the step is a
/// stutter with the configuration unchanged.
pub fn schedule_step(
    cfg: &Configuration,
    scheduler: &mut dyn Scheduler,
) -> Result<(Configuration, Option<(Pid, Action)>), ProtocolError> {
    let cands = candidates(cfg);
    if cands.is_empty() {
        return Ok((cfg.clone(), None));
    }
    let (pid, action) = cands[scheduler.pick(cfg, &cands)];
    Ok((apply_action(cfg, pid, action)?, Some((pid, action))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counter::ModeKind;
    use crate::state::Status;
    use crate::testutil::legit_line;
    use rand::SeedableRng;

    #[test]
    fn priority_action_preempts() {
        // 0 is an authorized leader at ⊤ (AR7 enabled), 1 lags on otsn (AR2).
        let mut cfg = legit_line(2, ModeKind::Unbounded);
        let p0 = &mut cfg.procs[0];
        p0.status = Status::Top;
        p0.otsn = 1;
        p0.ctsn = 1;
        p0.authorized = true;
        cfg.procs[1].status = Status::Top;
        cfg.procs[1].ctsn = 1;
        let all = enabled_everywhere(&cfg);
        assert!(all.contains(&(0, Action::Ar7)));
        assert!(all.contains(&(1, Action::Ar2)));
        assert_eq!(candidates(&cfg), vec![(1, Action::Ar2)]);
        let mut s = UniformRandom::new(ChaCha8Rng::seed_from_u64(1));
        let (_, fired) = schedule_step(&cfg, &mut s).unwrap();
        assert_eq!(fired, Some((1, Action::Ar2)));
    }

    #[test]
    fn empty_enabled_set_stutters() {
        let cfg = legit_line(3, ModeKind::Unbounded);
        let (next, fired) = schedule_step(&cfg, &mut RoundRobin::default()).unwrap();
        assert_eq!(fired, None);
        assert_eq!(next, cfg);
    }

    #[test]
    fn round_robin_rotates_processes() {
        let mut cfg = legit_line(3, ModeKind::Unbounded);
        for p in &mut cfg.procs {
            p.pending_ae = true;
        }
        let mut rr = RoundRobin::default();
        let cands = candidates(&cfg);
        let order: Vec<Pid> = (0..3)
            .map(|_| {
                let i = rr.pick(&cfg, &cands);
                cands[i].0
            })
            .collect();
        assert_eq!(order, vec![0, 1, 2]);
    }
}
