use std::collections::{BTreeMap, BTreeSet};

use acs_core::interp::{Snapshot, Value};
use acs_core::lang::*;
use acs_core::var_rank::*;
use proptest::prelude::*;

#[path = "support/levels.rs"]
mod levels;
use levels::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn levels_match_reachability(m in arb_method()) {
        let text = m.source();
        let p = parse_program(&text).unwrap_or_else(|e| panic!("{text}\n{e}"));
        let g = build_dependency_graph(&p.functions[0]);
        let expected_nodes: Vec<String> = (0..m.vars).map(|i| format!("v{i}")).collect();
        prop_assert_eq!(&g.nodes, &expected_nodes);
        let edges = m.edges();
        let named: BTreeSet<(String, String)> = edges.iter().map(|(a, b)| (format!("v{a}"), format!("v{b}"))).collect();
        prop_assert_eq!(&g.edges, &named, "{}", text);
        let want = brute_levels(m.vars, &edges);
        for (i, l) in want.iter().enumerate() {
            prop_assert_eq!(g.level(&format!("v{i}")), Some(*l), "{}", text);
        }
        // Edges between different components always go down a level.
        let comp = strongly_connected(m.vars, &edges.iter().copied().collect::<Vec<_>>());
        for &(a, b) in &edges {
            if comp[a] != comp[b] {
                prop_assert!(want[a] < want[b]);
            }
        }
    }

    #[test]
    fn ranking_respects_cutoff(m in arb_method(), max_level in 1usize..4) {
        let p = parse_program(&m.source()).unwrap();
        let f = &p.functions[0];
        let site = f.body.stmts.last().unwrap().id;
        let cands = collect_candidates(&p, f, site);
        let g = build_dependency_graph(f);
        let r = rank_variables(&cands, &g, f, site, max_level);
        prop_assert_eq!(r.ranked.len() + r.excluded.len(), cands.len());
        prop_assert!(r.ranked.iter().all(|c| c.level <= max_level));
        prop_assert!(r.excluded.iter().all(|c| c.level > max_level));
        for w in r.ranked.windows(2) {
            prop_assert!((w[0].level, w[0].distance) <= (w[1].level, w[1].distance));
        }
    }

    #[test]
    fn random_graph_levels(n in 1usize..8, raw in prop::collection::btree_set((0usize..8, 0usize..8), 0..20)) {
        let edges: BTreeSet<(usize, usize)> = raw.into_iter().filter(|&(a, b)| a < n && b < n && a != b).collect();
        let got = levels(n, &edges.iter().copied().collect::<Vec<_>>());
        prop_assert_eq!(got, brute_levels(n, &edges));
    }
}

fn candidate(name: &str) -> Candidate {
    Candidate { kind: CandidateKind::Param, name: name.into(), expr: None, static_type: Type::Int, decl_site: None }
}

/// Values with different labels never coincide.
fn separable(name: &str, labeled: &LabeledInstances) -> bool {
    let mut seen: BTreeMap<Option<i64>, bool> = BTreeMap::new();
    for i in &labeled.instances {
        let v = match i.env.get(name).cloned().flatten() {
            Some(Value::Int(x)) => Some(x),
            _ => None,
        };
        if *seen.entry(v).or_insert(i.expected) != i.expected {
            return false;
        }
    }
    true
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn runtime_filter_keeps_exactly_the_separable(
        rows in prop::collection::vec((prop::collection::vec(prop::option::of(0i64..3), 4), any::<bool>()), 0..8)
    ) {
        let names = ["c0", "c1", "c2", "c3"];
        let mut labeled = LabeledInstances::default();
        for (vals, expected) in &rows {
            let env: Snapshot = names.iter().zip(vals).map(|(n, v)| (n.to_string(), v.map(Value::Int))).collect();
            labeled.push(env, *expected);
        }
        let kept = filter_by_runtime(names.iter().map(|n| candidate(n)).collect(), &labeled);
        let kept_names: Vec<&str> = kept.iter().map(|c| c.name.as_str()).collect();
        let want: Vec<&str> = names.iter().copied().filter(|n| separable(n, &labeled)).collect();
        prop_assert_eq!(kept_names, want);
    }
}
