//! Instrumented execution of MiniLang tests.

mod exec;
mod trace;
mod value;

pub use exec::*;
pub use trace::*;
pub use value::Value;
