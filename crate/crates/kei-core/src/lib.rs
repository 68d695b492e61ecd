//! Clearing engine for kidney exchange pools in which a limited supply of
//! immunosuppressants can unlock transplants that would otherwise be
//! blood- or tissue-incompatible.
//!
//! The crate is organised around two exact solution paths:
//!
//! * a bipartite max-weight perfect-matching model ([`graph`], [`matching`],
//!   [`solve`]) that clears unbounded exchanges under six policy objectives
//!   and enforces suppressant budgets through a slot gadget, and
//! * a position-indexed cycle-and-chain integer program ([`pool`], [`picef`],
//!   [`solver`]) that additionally bounds cycle and chain lengths.
//!
//! Supporting modules provide the instance model ([`instance`]), brute-force
//! reference optima for testing ([`oracle`]), a synthetic pool generator
//! ([`gen`]), and the budget-sweep experiment harness ([`sweep`]).
//!
//! The `parallel` feature (on by default) parallelises cycle enumeration and
//! sweep execution with rayon; with the feature disabled every code path runs
//! sequentially and produces identical results.

pub mod error;
pub mod fixtures;
pub mod gen;
pub mod graph;
pub mod instance;
pub mod matching;
pub mod oracle;
pub mod par;
pub mod picef;
pub mod pool;
pub mod scheme;
pub mod solve;
pub mod solver;
pub mod sweep;

pub use error::KeiError;
pub use instance::{
    Allocation, AllocationStats, BloodType, Donor, KeiInstance, ModelClass, Recipient,
};
pub use scheme::WeightScheme;
