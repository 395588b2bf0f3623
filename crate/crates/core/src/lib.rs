//! Simulator, trace checker and small-scope model checker for the auditable
//! restoration protocol: processes on a spanning tree notice auditable events,
//! make every process aware of them (the auditable state `S2`), and only then
//! let an authorized leader restore the legitimate states `S1`.
//!
//! Both the unbounded-counter protocol (`AR1`–`AR11`) and the bounded one
//! (`B1`–`B12`) are implemented. Everything below [`sim`] is a pure function
//! of immutable [`state::Configuration`] values.

pub mod checker;
pub mod counter;
pub mod protocol;
pub mod scenario_file;
pub mod sim;
pub mod state;
pub mod topology;
pub mod tree;

/// Process identifier, `0..N`.
pub type Pid = usize;

pub use checker::predicate::{eval_predicate, PredicateId};
pub use counter::{Mode, ModeKind};
pub use protocol::Action;
pub use state::{Configuration, ProcState, Status};
pub use topology::Topology;

#[cfg(test)]
pub(crate) mod testutil {
    use std::sync::Arc;

    use crate::counter::ModeKind;
    use crate::state::{Configuration, ProcState};
    use crate::topology::Topology;
    use crate::tree;

    /// Legitimate configuration on the line `0 – 1 – … – n-1`.
    pub fn legit_line(n: usize, kind: ModeKind) -> Configuration {
        let mut cfg = Configuration::new_unchecked(Arc::new(Topology::line(n)), kind, (0..n).map(ProcState::fresh).collect());
        tree::settle(&mut cfg);
        cfg
    }

    pub fn single(kind: ModeKind) -> Configuration {
        legit_line(1, kind)
    }
}
