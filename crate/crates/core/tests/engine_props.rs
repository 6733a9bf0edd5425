use std::path::PathBuf;
use std::sync::OnceLock;

use acs_core::doc_filter::{filter_for_exception, parse_doc, split_identifier};
use acs_core::engine::{is_boundary_check, repair};
use acs_core::interp::{InstrumentationPlan, Interpreter};
use acs_core::lang::*;
use acs_core::miner::{build_index, predefined_predicates, CorpusIndex};
use acs_core::var_rank::{Candidate, CandidateKind};
use acs_core::Config;
use proptest::prelude::*;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn load(name: &str) -> Program {
    let dir = fixtures();
    let src = std::fs::read_to_string(dir.join(format!("{name}.mini"))).unwrap();
    let tests = std::fs::read_to_string(dir.join(format!("{name}.test.mini"))).unwrap();
    let mut p = parse_program_with_tests(&src, &tests).unwrap();
    p.source_name = format!("{name}.mini");
    p
}

fn corpus() -> &'static CorpusIndex {
    static INDEX: OnceLock<CorpusIndex> = OnceLock::new();
    INDEX.get_or_init(|| build_index(&fixtures().join("corpus"), false).unwrap())
}

const FIXTURES: [&str; 6] = ["math99", "math3", "math85", "math35", "time19", "hour"];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn found_patches_are_plausible_and_well_formed(
        which in 0usize..6,
        max_level in 1usize..4,
        top_k in 1usize..21,
        max_iterations in 1usize..5,
    ) {
        let program = load(FIXTURES[which]);
        let config = Config { max_level, top_k, max_iterations, ..Config::default() };
        let out = repair(&program, corpus(), &config).unwrap();
        let r = &out.report;
        prop_assert_eq!(r.patch_found, out.patched.is_some());
        let Some(patched) = &out.patched else {
            prop_assert!(r.failure_reason.is_some());
            prop_assert!(r.patches.is_empty());
            return Ok(());
        };
        prop_assert!(Interpreter::new(patched).run_suite(&InstrumentationPlan::empty()).all_pass());
        prop_assert_eq!(r.validation_summary.failed, 0);
        let phase_two_at = r.log.iter().position(|l| l == "phase 2");
        for rec in &r.patches {
            let cond = parse_expr(&rec.condition).unwrap();
            match rec.template_kind {
                PatchKind::OracleThrowing | PatchKind::ValueReturning => {
                    prop_assert_eq!(rec.phase, 1);
                    prop_assert!(is_boundary_check(&cond, rec.template_kind == PatchKind::OracleThrowing), "{}", rec.condition);
                    prop_assert!(phase_two_at.is_none());
                }
                PatchKind::Narrowing | PatchKind::Widening => {
                    prop_assert_eq!(rec.phase, 2);
                    let p1 = r.log.iter().position(|l| l.starts_with("phase 1"));
                    prop_assert!(p1 < phase_two_at, "{:#?}", r.log);
                }
            }
            prop_assert!(rec.variable_rank >= 1);
            let ty = if rec.predicate.contains('.') { Type::Float } else { Type::Int };
            prop_assert!(rec.predicate_rank >= 1 && rec.predicate_rank <= top_k + predefined_predicates(&ty).len());
        }
    }
}

#[test]
fn narrowing_changes_only_the_flipped_instance() {
    let program = load("math85");
    let out = repair(&program, corpus(), &Config::default()).unwrap();
    assert_eq!(out.report.template_kind, Some(PatchKind::Narrowing));
    let site = out.report.anchor.as_ref().unwrap().node;
    let patched = out.patched.unwrap();
    let plan = InstrumentationPlan::site(site, Vec::new());
    let before = Interpreter::new(&program);
    let after = Interpreter::new(&patched);
    for unit in program.units() {
        let a: Vec<bool> = before.run_test_unit(&unit, &plan).unwrap().evals_at(site).map(|c| c.outcome).collect();
        let b: Vec<bool> = after.run_test_unit(&unit, &plan).unwrap().evals_at(site).map(|c| c.outcome).collect();
        let was_passing = before.run_test_unit(&unit, &InstrumentationPlan::empty()).unwrap().passed();
        if was_passing {
            assert_eq!(a, b, "{unit}");
        } else {
            let k = a.iter().zip(&b).position(|(x, y)| x != y).expect("some outcome changes");
            assert_eq!(a[..k], b[..k]);
            assert!(a[k] && !b[k], "narrowing turns true into false");
        }
    }
}

fn param(name: &str) -> Candidate {
    Candidate { kind: CandidateKind::Param, name: name.into(), expr: None, static_type: Type::Float, decl_site: None }
}

#[test]
fn doc_filter_on_bounded_initial() {
    let tags = parse_doc(&DocComment {
        text: " @throws IllegalArgumentException if initial is not between min and max".into(),
    });
    let cands = ["initial", "min", "max", "functionValue"].map(param).to_vec();
    let kept = filter_for_exception(cands, &tags, "IllegalArgumentException");
    assert_eq!(kept.iter().map(|c| c.name.as_str()).collect::<Vec<_>>(), ["initial"]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn doc_filter_keeps_an_ordered_subset(
        names in prop::collection::vec("[a-z]{1,4}([A-Z][a-z]{1,4})?", 1..6),
        words in prop::collection::vec("[a-zA-Z]{1,8}", 0..6),
        verb in prop::sample::select(vec!["is", "exceeds", "equals", "has"]),
    ) {
        let text = format!(" @throws E if {} {verb} bad", words.join(" "));
        let tags = parse_doc(&DocComment { text });
        let cands: Vec<Candidate> = names.iter().map(|n| param(n)).collect();
        let kept = filter_for_exception(cands.clone(), &tags, "E");
        let mut rest = cands.iter();
        for k in &kept {
            prop_assert!(rest.any(|c| c == k), "{:?} not an ordered subset", kept);
        }
        prop_assert_eq!(filter_for_exception(cands.clone(), &tags, "Other"), cands);
    }

    #[test]
    fn identifier_words_split_to_themselves(name in "[a-z]{1,5}([A-Z][a-z]{1,5}|_[a-z]{1,4}){0,3}") {
        let words = split_identifier(&name);
        prop_assert!(!words.is_empty());
        for w in &words {
            prop_assert_eq!(split_identifier(w), vec![w.clone()]);
        }
        prop_assert_eq!(words.concat(), name.replace('_', "").to_lowercase());
    }
}
