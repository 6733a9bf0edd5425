//! Fixture loading shared by the benches.

use std::path::PathBuf;

use acs_core::miner::{build_index, CorpusIndex};
use acs_core::{parse_program_with_tests, Program};

pub fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn sources(name: &str) -> (String, String) {
    let dir = fixtures_dir();
    let read = |f: String| std::fs::read_to_string(dir.join(f)).expect("fixture");
    (read(format!("{name}.mini")), read(format!("{name}.test.mini")))
}

pub fn fixture(name: &str) -> Program {
    let (src, tests) = sources(name);
    let mut p = parse_program_with_tests(&src, &tests).expect("fixture parses");
    p.source_name = format!("{name}.mini");
    p
}

pub fn corpus_index() -> CorpusIndex {
    build_index(&fixtures_dir().join("corpus"), false).expect("corpus")
}
