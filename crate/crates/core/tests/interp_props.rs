use std::collections::BTreeSet;
use std::path::PathBuf;

use acs_core::interp::*;
use acs_core::lang::*;
use acs_core::var_rank::{collect_candidates, pseudo_variables};
use proptest::prelude::*;

fn load(name: &str) -> Program {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures");
    let src = std::fs::read_to_string(dir.join(format!("{name}.mini"))).unwrap();
    let tests = std::fs::read_to_string(dir.join(format!("{name}.test.mini"))).unwrap();
    parse_program_with_tests(&src, &tests).unwrap()
}

const FIXTURES: [&str; 6] = ["math99", "math3", "math85", "math35", "time19", "hour"];

#[test]
fn traces_are_deterministic() {
    for name in FIXTURES {
        let p = load(name);
        let interp = Interpreter::new(&p);
        for f in &p.functions {
            for s in f.statements() {
                let plan = InstrumentationPlan::site(s.id, pseudo_variables(&collect_candidates(&p, f, s.id)));
                let a = interp.run_suite(&plan);
                let b = interp.run_suite(&plan);
                assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
            }
        }
    }
}

#[test]
fn snapshots_cover_the_candidate_set() {
    for name in FIXTURES {
        let p = load(name);
        let interp = Interpreter::new(&p);
        for f in &p.functions {
            for s in f.statements().into_iter().filter(|s| s.condition().is_some()) {
                let candidates = collect_candidates(&p, f, s.id);
                let expected: BTreeSet<String> = candidates.iter().map(|c| c.name.clone()).collect();
                let plan = InstrumentationPlan::site(s.id, pseudo_variables(&candidates));
                for t in interp.run_suite(&plan).traces {
                    for c in t.evals_at(s.id) {
                        let keys: BTreeSet<String> = c.env.keys().cloned().collect();
                        assert_eq!(keys, expected, "{name} at {}", s.id.0);
                    }
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn flips_only_change_the_suffix(which in 0usize..3, pick in 0usize..64) {
        let p = load(["math99", "math85", "math3"][which]);
        let interp = Interpreter::new(&p);
        let plan = InstrumentationPlan::empty();
        for unit in p.units() {
            let base = interp.run_test_unit(&unit, &plan).unwrap();
            if base.cond_evals.is_empty() {
                continue;
            }
            let k = pick % base.cond_evals.len();
            let target = &base.cond_evals[k];
            let flipped = interp.run_with_flip(&unit, target.site, target.instance_index, &plan).unwrap();
            prop_assert_eq!(&base.cond_evals[..k], &flipped.cond_evals[..k]);
            let at = &flipped.cond_evals[k];
            prop_assert_eq!((at.site, at.instance_index, at.original), (target.site, target.instance_index, target.original));
            prop_assert_eq!(at.outcome, !target.outcome);
        }
    }
}

#[test]
fn exceptions_and_limits() {
    let p = parse_program_with_tests(
        "fn get(xs: int[], i: int) -> int { return xs[i]; }
         fn spin(n: int) -> int { while (true) { n = n + 1; } return n; }
         fn deep(n: int) -> int { return deep(n + 1); }",
        "test oob { assert_eq(1, get([1], 3)); }
         test caught { assert_throws(IndexError, get([1], 3)); }
         test loop { assert_eq(0, spin(0)); }
         test rec { assert_throws(StackOverflow, deep(0)); }",
    )
    .unwrap();
    let interp = Interpreter::new(&p).with_step_budget(100_000);
    let s = interp.run_suite(&InstrumentationPlan::empty());
    let kinds: Vec<_> = s.traces.iter().map(|t| t.failure_kind.clone()).collect();
    assert_eq!(kinds[0], Some(FailureKind::UnexpectedException { name: "IndexError".into() }));
    assert_eq!(kinds[1], None);
    assert_eq!(kinds[2], Some(FailureKind::RuntimeLimitExceeded));
    assert_eq!(kinds[3], None);
}
