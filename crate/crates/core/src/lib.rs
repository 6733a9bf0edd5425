//! Test-driven condition synthesis for MiniLang programs.

pub mod config;
pub mod diff;
pub mod doc_filter;
pub mod engine;
pub mod fault_loc;
pub mod interp;
pub mod lang;
pub mod miner;
pub mod var_rank;

pub use config::Config;
pub use engine::{repair, RepairError, RepairOutcome, RepairReport};
pub use lang::{parse_program, parse_program_with_tests, Patch, PatchKind, Program};
