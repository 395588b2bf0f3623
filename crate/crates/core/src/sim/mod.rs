//! Execution engine: initial configurations, environment injections,
//! schedulers and trace recording.

pub mod inject;
pub mod run;
pub mod scenario;
pub mod scheduler;
pub mod trace;

pub use inject::{authorization_target, inject, Field, InjectError, Injected, InjectionKind};
pub use run::{run, run_until, SimError, Simulation};
pub use scenario::{init_config, InitPolicy, Injection, Scenario, ScenarioError, SchedulerPolicy, StopCondition};
pub use scheduler::{candidates, schedule_step, RoundRobin, Scheduler, UniformRandom};
pub use trace::{Actor, Markers, RunEnd, StepLabel, StepRecord, Trace, TraceError};
