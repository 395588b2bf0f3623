//! Predicates, trace properties and exhaustive small-scope checks.

pub mod closure;
pub mod explore;
pub mod predicate;
pub mod report;
pub mod space;
pub mod trace_checks;

pub use closure::{check_closure, check_closure_with, CheckError, ClosureOptions};
pub use explore::{build_graph, explore, scenario_setup, Alphabet, ExploreError, Goal, Move, StateGraph};
pub use predicate::{eval_predicate, PredicateError, PredicateId};
pub use report::{CheckReport, PathStep, Stats, Verdict, Witness};
pub use space::{CounterSpace, SpaceSpec, TreeSpace};
pub use trace_checks::{
    check_as_window, check_authorization_gate, check_convergence, check_notify, check_two_phase, check_unison,
    TraceCheckError,
};
