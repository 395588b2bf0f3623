use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::checker::predicate;
use crate::protocol::ProtocolError;
use crate::sim::inject::{inject, InjectError, Injected, InjectionKind};
use crate::sim::scenario::{init_config, Injection, Scenario, ScenarioError, StopCondition};
use crate::sim::scheduler::{candidates, make_scheduler, schedule_step, Scheduler};
use crate::sim::trace::{delta, Actor, Markers, RunEnd, StepLabel, StepRecord, Trace, SNAPSHOT_EVERY};
use crate::state::{Configuration, Status};
use crate::tree;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Inject(#[from] InjectError),
}

/// A run in progress. Drives ticks one at a time; each tick applies the
/// injections scheduled for it, then fires one protocol action (or stutters).
pub struct Simulation {
    scenario: Scenario,
    cfg: Configuration,
    scheduler: Box<dyn Scheduler>,
    env_rng: ChaCha8Rng,
    injections: Vec<Injection>,
    next_injection: usize,
    tick: u64,
    records: Vec<StepRecord>,
    in_s1: bool,
    in_s2: bool,
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

impl Simulation {
    pub fn new(scenario: &Scenario) -> Result<Self, SimError> {
        let scheduler = make_scheduler(scenario.scheduler, stream(scenario.seed, 2));
        Self::with_scheduler(scenario, scheduler)
    }

    /// Start a run under a caller-supplied scheduler (e.g. an adversarial one).
    pub fn with_scheduler(scenario: &Scenario, scheduler: Box<dyn Scheduler>) -> Result<Self, SimError> {
        scenario.validate()?;
        let mut env_rng = stream(scenario.seed, 1);
        let cfg = init_config(scenario, &mut env_rng)?;
        let mut injections = scenario.injections.clone();
        injections.sort_by_key(|i| i.at_step);
        let in_s1 = predicate::s1(&cfg);
        let in_s2 = predicate::s2(&cfg);
        let init = StepRecord {
            index: 0,
            tick: 0,
            actor: Actor::Environment,
            label: StepLabel::Init,
            delta: Vec::new(),
            snapshot: Some(cfg.procs.clone()),
            markers: Markers {
                entered_s1: in_s1,
                entered_s2: in_s2,
                restore_complete: false,
            },
        };
        Ok(Simulation {
            scenario: scenario.clone(),
            cfg,
            scheduler,
            env_rng,
            injections,
            next_injection: 0,
            tick: 0,
            records: vec![init],
            in_s1,
            in_s2,
        })
    }

    pub fn config(&self) -> &Configuration {
        &self.cfg
    }

    pub fn tick(&self) -> u64 {
        self.tick
    }

    pub fn records(&self) -> &[StepRecord] {
        &self.records
    }

    pub fn budget_left(&self) -> bool {
        self.tick < self.scenario.max_steps
    }

    fn injections_left(&self) -> bool {
        self.next_injection < self.injections.len()
    }

    fn push(&mut self, next: Configuration, actor: Actor, label: StepLabel, restore_complete: bool) {
        let index = self.records.len() as u64;
        let s1 = predicate::s1(&next);
        let s2 = predicate::s2(&next);
        let markers = Markers {
            entered_s1: s1 && !self.in_s1,
            entered_s2: s2 && !self.in_s2,
            restore_complete,
        };
        self.in_s1 = s1;
        self.in_s2 = s2;
        let record = StepRecord {
            index,
            tick: self.tick,
            actor,
            label,
            delta: delta(&self.cfg, &next),
            snapshot: (index % SNAPSHOT_EVERY == 0).then(|| next.procs.clone()),
            markers,
        };
        self.records.push(record);
        self.cfg = next;
    }

    fn apply_injection(&mut self, kind: InjectionKind) -> Result<(), SimError> {
        match inject(&self.cfg, &kind, &mut self.env_rng)? {
            Injected::Applied { cfg, target } => {
                self.push(
                    cfg,
                    Actor::Environment,
                    StepLabel::Injection { injection: kind, target },
                    false,
                );
            }
            Injected::Dropped { reason } => {
                let cfg = self.cfg.clone();
                self.push(cfg, Actor::Environment, StepLabel::Dropped { injection: kind, reason }, false);
            }
        }
        Ok(())
    }

    /// Whether the leader reports that everyone is aware and waits for input.
    fn leader_awaits_authorization(&self) -> bool {
        let Some(root) = tree::unique_root(&self.cfg) else {
            return false;
        };
        let p = self.cfg.proc(root);
        p.status == Status::Top && p.ctsn == p.otsn && !p.authorized
    }

    /// Run one tick. Returns `false` once the budget is spent.
    pub fn step(&mut self) -> Result<bool, SimError> {
        if !self.budget_left() {
            return Ok(false);
        }
        while self.next_injection < self.injections.len() && self.injections[self.next_injection].at_step <= self.tick {
            let kind = self.injections[self.next_injection].kind.clone();
            self.next_injection += 1;
            self.apply_injection(kind)?;
        }
        if self.scenario.auto_authorize && self.leader_awaits_authorization() {
            self.apply_injection(InjectionKind::Authorize)?;
        }
        let (next, fired) = schedule_step(&self.cfg, self.scheduler.as_mut())?;
        match fired {
            Some((pid, action)) => {
                let p = next.proc(pid);
                let done = action.is_restore_completion() && p.is_root() && p.status == Status::Stable;
                self.push(next, Actor::Process(pid), StepLabel::Action { action }, done);
            }
            None => self.push(next, Actor::Environment, StepLabel::Stutter, false),
        }
        self.tick += 1;
        Ok(true)
    }

    fn stop_reached(&self, stop: Option<&dyn Fn(&Configuration) -> bool>) -> bool {
        if self.injections_left() {
            return false;
        }
        let scenario_stop = match self.scenario.stop {
            StopCondition::None => false,
            StopCondition::S1Quiescent => {
                self.in_s1 && self.cfg.alive_procs().all(|p| !p.pending_ae) && candidates(&self.cfg).is_empty()
            }
        };
        scenario_stop || stop.is_some_and(|f| f(&self.cfg))
    }

    /// Run until the budget is spent or a stop predicate holds.
    pub fn run(mut self, stop: Option<&dyn Fn(&Configuration) -> bool>) -> Result<Trace, SimError> {
        let mut end = RunEnd::BudgetExhausted;
        loop {
            if self.stop_reached(stop) {
                end = RunEnd::Stopped;
                break;
            }
            if !self.step()? {
                break;
            }
        }
        Ok(self.into_trace(end))
    }

    pub fn into_trace(self, end: RunEnd) -> Trace {
        Trace {
            topology: (*self.scenario.topology).clone(),
            mode: self.scenario.mode,
            seed: self.scenario.seed,
            records: self.records,
            end,
        }
    }
}

/// Run a scenario to completion under its own scheduler policy.
pub fn run(scenario: &Scenario) -> Result<Trace, SimError> {
    Simulation::new(scenario)?.run(None)
}

/// Run a scenario with an extra caller-supplied stop predicate.
pub fn run_until(scenario: &Scenario, stop: &dyn Fn(&Configuration) -> bool) -> Result<Trace, SimError> {
    Simulation::new(scenario)?.run(Some(stop))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counter::ModeKind;
    use crate::protocol::Action;
    use crate::topology::Topology;

    #[test]
    fn legitimate_run_only_stutters() {
        let s = Scenario::new(Topology::line(3), ModeKind::Unbounded, 7, 20);
        let trace = run(&s).unwrap();
        assert_eq!(trace.records.len(), 21);
        assert!(trace.records[1..].iter().all(|r| r.label == StepLabel::Stutter));
        assert!(trace.records[0].markers.entered_s1);
        assert_eq!(trace.end, RunEnd::BudgetExhausted);
    }

    #[test]
    fn single_process_scenario_follows_walkthrough() {
        let mut s = Scenario::new(Topology::line(1), ModeKind::Unbounded, 1, 20)
            .inject_at(0, InjectionKind::AuditableEvent { pid: 0 });
        s.auto_authorize = true;
        s.stop = StopCondition::S1Quiescent;
        let trace = run(&s).unwrap();
        let labels: Vec<String> = trace
            .records
            .iter()
            .map(|r| match &r.label {
                StepLabel::Action { action } => action.label(),
                StepLabel::Injection { injection, .. } => format!("{injection}"),
                other => format!("{other:?}"),
            })
            .collect();
        assert_eq!(
            labels,
            ["Init", "auditable event at 0", "AR1", "AR3", "AR5", "authorize", "AR7", "AR9"]
        );
        // Restore is a legitimate status, so S1 holds as soon as AR7 fires.
        assert!(trace.records[6].markers.entered_s1);
        assert!(trace.records[7].markers.restore_complete);
        // All ⊥ already satisfies S2.
        assert!(trace.records[3].markers.entered_s2);
        assert_eq!(trace.end, RunEnd::Stopped);
        let last = trace.configurations().unwrap().pop().unwrap();
        assert_eq!((last.proc(0).otsn, last.proc(0).ctsn), (1, 1));
        assert_eq!(trace.records[6].action(), Some((0, Action::Ar7)));
    }

    #[test]
    fn same_seed_same_trace() {
        let mut s = Scenario::new(Topology::ring(5), ModeKind::Bounded, 99, 300);
        s.init = crate::sim::InitPolicy::ArbitraryRandom;
        let a = run(&s).unwrap().to_json();
        let b = run(&s).unwrap().to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn replay_matches_snapshots() {
        let mut s = Scenario::new(Topology::star(5), ModeKind::Unbounded, 3, 400)
            .inject_at(2, InjectionKind::AuditableEvent { pid: 3 })
            .inject_at(40, InjectionKind::FailStop { pid: 4 });
        s.auto_authorize = true;
        let trace = run(&s).unwrap();
        assert!(trace.records.len() > 130);
        let cfgs = trace.configurations().unwrap();
        assert_eq!(cfgs.len(), trace.records.len());
    }

    #[test]
    fn dead_processes_never_act() {
        let mut s = Scenario::new(Topology::line(4), ModeKind::Unbounded, 5, 300)
            .inject_at(0, InjectionKind::FailStop { pid: 1 })
            .inject_at(3, InjectionKind::AuditableEvent { pid: 3 });
        s.auto_authorize = true;
        let trace = run(&s).unwrap();
        for r in &trace.records {
            if let Actor::Process(pid) = r.actor {
                assert_ne!(pid, 1, "record {}", r.index);
            }
        }
    }
}
