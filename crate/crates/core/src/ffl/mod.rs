//! The functional core: a simply typed lambda calculus with sums, products,
//! arrays, `fold` and `iter`, plus the MapReduce primitives.

pub mod eval;
pub mod expand;
pub mod ops;
pub mod pretty;
pub mod term;
pub mod typeck;

pub use eval::{eval, eval_applied, Closure, Env, Evaluator};
pub use expand::expand_synonyms;
pub use ops::{alpha_equal, shift, substitute};
pub use pretty::render;
pub use term::{build, FUnOp, FflType, Term, T};
pub use typeck::{typecheck_in, typecheck_term, FflTypeError};
