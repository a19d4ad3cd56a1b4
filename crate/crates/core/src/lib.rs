//! Equivalence checking for chains of IL programs, from an imperative
//! original down to a MapReduce formulation.

pub mod chain;
pub mod corpus;
pub mod coupling;
pub mod ffl;
pub mod gen;
pub mod il;
pub mod prims;
pub mod rewrite;
pub mod translate;
pub mod value;

pub use value::{ErrorKind, Outcome, RuntimeError, Value};
