//! A verification laboratory for house allocation mechanisms.
//!
//! `hallot` assigns `n` indivisible objects to `n` agents with strict
//! preferences and no transfers. At small `n` the full preference domain
//! (all `(n!)^n` profiles) is enumerable, so mechanisms become finite
//! lookup tables and every axiom of interest can be decided exhaustively,
//! with concrete counterexample witnesses when an axiom fails.
//!
//! The crate provides:
//!
//! - [`domain`]: agents, objects, preferences, profiles, allocations, and
//!   the canonical enumeration of the profile domain;
//! - [`mechanisms`]: serial dictatorships, sequential dictatorships built
//!   from hierarchy trees, constant rules, a catalog of branching
//!   counterexample mechanisms, and table materialization;
//! - [`axioms`]: exhaustive checkers for efficiency, incentive, and
//!   fairness axioms, each returning a replayable witness on failure;
//! - [`characterize`]: membership tests for the serial/sequential
//!   dictatorship families with priority and hierarchy recovery;
//! - [`search`]: enumeration of the entire mechanism space under axiom
//!   constraints, exhaustively at `n = 2` and by constraint propagation at
//!   `n = 3`;
//! - [`varpop`]: variable-population problems with pairwise consistency
//!   and pairwise neutrality checks.

pub mod axioms;
pub mod characterize;
pub mod domain;
pub mod mechanisms;
pub mod search;
pub mod varpop;

pub use axioms::{Axiom, AxiomReport, CheckOptions, Witness};
pub use characterize::{characterize, CharacterizationResult, Family};
pub use domain::{
    AgentId, Allocation, Domain, DomainError, ObjectId, Preference, Priority, Profile,
    DEFAULT_PROFILE_CAP,
};
pub use mechanisms::{
    materialize, Hierarchy, Mechanism, MechanismTable, SequentialDictatorship,
    SerialDictatorship,
};
pub use search::{enumerate_mechanisms, SearchMode, SearchResult, SearchSpec};


#[cfg(test)]
mod concurrency_tests {
    use super::*;

    fn assert_send_sync<T: Send + Sync>() {}

    #[test]
    fn core_types_are_shareable_across_threads() {
        assert_send_sync::<ObjectId>();
        assert_send_sync::<AgentId>();
        assert_send_sync::<Preference>();
        assert_send_sync::<Profile>();
        assert_send_sync::<Allocation>();
        assert_send_sync::<Priority>();
        assert_send_sync::<Domain>();
        assert_send_sync::<MechanismTable>();
        assert_send_sync::<Hierarchy>();
    }
}
