use rand::Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use thiserror::Error;

use crate::counter::{Mode, ModeKind};
use crate::sim::inject::{validate_injection, InjectError, InjectionKind};
use crate::state::{Configuration, ProcState, StateError, Status};
use crate::topology::Topology;
use crate::tree;

/// How the first configuration of a run is produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitPolicy {
    /// Tree at fixpoint, everyone Stable, all counters zero, `res = 1`.
    Legitimate,
    /// Every field uniform over its domain.
    ArbitraryRandom,
    /// Uniform over the fault-span: all `otsn`/`ctsn` equal, every status
    /// Restore or Stable, everything else arbitrary.
    RandomT,
    Explicit(Vec<ProcState>),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchedulerPolicy {
    #[default]
    UniformRandom,
    RoundRobin,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopCondition {
    #[default]
    None,
    /// Stop once no injection is left, the configuration is in `S1`, no
    /// detection is pending and no protocol action is enabled.
    S1Quiescent,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Injection {
    /// Tick at which the injection is applied, before that tick's protocol step.
    pub at_step: u64,
    pub kind: InjectionKind,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub topology: Arc<Topology>,
    pub mode: ModeKind,
    pub init: InitPolicy,
    pub injections: Vec<Injection>,
    pub scheduler: SchedulerPolicy,
    pub seed: u64,
    pub max_steps: u64,
    pub stop: StopCondition,
    /// Authorize the leader as soon as it reports that every process is aware
    /// (leader at ⊤ with `ctsn = otsn`).
    pub auto_authorize: bool,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("max_steps must be positive")]
    NoBudget,
    #[error("explicit initial state: {0}")]
    Explicit(#[from] StateError),
    #[error("injection #{index}: {source}")]
    Injection {
        index: usize,
        #[source]
        source: InjectError,
    },
}

impl Scenario {
    /// A scenario with legitimate init, no injections and a uniform scheduler.
    pub fn new(topology: Topology, mode: ModeKind, seed: u64, max_steps: u64) -> Self {
        Scenario {
            topology: Arc::new(topology),
            mode,
            init: InitPolicy::Legitimate,
            injections: Vec::new(),
            scheduler: SchedulerPolicy::UniformRandom,
            seed,
            max_steps,
            stop: StopCondition::None,
            auto_authorize: false,
        }
    }

    pub fn mode(&self) -> Mode {
        Mode::new(self.mode, self.topology.n())
    }

    pub fn inject_at(mut self, at_step: u64, kind: InjectionKind) -> Self {
        self.injections.push(Injection { at_step, kind });
        self
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.max_steps == 0 {
            return Err(ScenarioError::NoBudget);
        }
        if let InitPolicy::Explicit(procs) = &self.init {
            Configuration::new(self.topology.clone(), self.mode, procs.clone())?;
        }
        for (index, inj) in self.injections.iter().enumerate() {
            validate_injection(&inj.kind, self.mode(), self.topology.n())
                .map_err(|source| ScenarioError::Injection { index, source })?;
        }
        Ok(())
    }
}

/// A fully random process, every field drawn from its domain. Unbounded
/// counters are drawn from `0..=N²`.
pub fn random_proc<R: Rng + ?Sized>(id: usize, mode: Mode, rng: &mut R) -> ProcState {
    let n = mode.n_procs;
    let counter_max = (n * n) as u64;
    let sn_max = if mode.is_bounded() { 1 } else { counter_max };
    ProcState {
        id,
        parent: rng.gen_range(0..n),
        leader: rng.gen_range(0..n),
        dist: rng.gen_range(0..=n as u64),
        status: Status::ALL[rng.gen_range(0..4)],
        sn: rng.gen_range(0..=sn_max),
        otsn: rng.gen_range(0..=counter_max),
        ctsn: rng.gen_range(0..=counter_max),
        res: rng.gen_range(0..=1),
        alive: true,
        pending_ae: false,
        authorized: false,
    }
}

/// Build the initial configuration of a scenario.
pub fn init_config<R: Rng + ?Sized>(scenario: &Scenario, rng: &mut R) -> Result<Configuration, ScenarioError> {
    let topo = scenario.topology.clone();
    let n = topo.n();
    let mode = scenario.mode();
    let cfg = match &scenario.init {
        InitPolicy::Legitimate => {
            let mut cfg = Configuration::new_unchecked(topo, scenario.mode, (0..n).map(ProcState::fresh).collect());
            tree::settle(&mut cfg);
            cfg
        }
        InitPolicy::ArbitraryRandom => {
            let procs = (0..n).map(|id| random_proc(id, mode, rng)).collect();
            Configuration::new_unchecked(topo, scenario.mode, procs)
        }
        InitPolicy::RandomT => {
            let c = rng.gen_range(0..=(n * n) as u64);
            let procs = (0..n)
                .map(|id| {
                    let mut p = random_proc(id, mode, rng);
                    p.otsn = c;
                    p.ctsn = c;
                    p.status = if rng.gen_bool(0.5) { Status::Restore } else { Status::Stable };
                    p
                })
                .collect();
            Configuration::new_unchecked(topo, scenario.mode, procs)
        }
        InitPolicy::Explicit(procs) => Configuration::new(topo, scenario.mode, procs.clone())?,
    };
    cfg.validate()?;
    Ok(cfg)
}
