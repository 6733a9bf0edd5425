//! Predicates mined from a local code corpus.

mod extract;
mod index;
mod predicate;

pub use extract::*;
pub use index::*;
pub use predicate::*;
