//! Candidate variables for condition synthesis and their priority order.

mod candidates;
mod depgraph;

use serde::Serialize;

pub use candidates::*;
pub use depgraph::*;

use crate::interp::Snapshot;
use crate::lang::{FunctionDecl, NodeId};

pub const DEFAULT_MAX_LEVEL: usize = 2;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabeledInstance {
    pub env: Snapshot,
    pub expected: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct LabeledInstances {
    pub instances: Vec<LabeledInstance>,
}

impl LabeledInstances {
    pub fn push(&mut self, env: Snapshot, expected: bool) {
        self.instances.push(LabeledInstance { env, expected });
    }
}

/// Drops candidates that take the same value on two instances with
/// different labels.
pub fn filter_by_runtime(candidates: Vec<Candidate>, labeled: &LabeledInstances) -> Vec<Candidate> {
    candidates
        .into_iter()
        .filter(|c| {
            let value = |i: &LabeledInstance| i.env.get(&c.name).cloned().flatten();
            let items = &labeled.instances;
            !items
                .iter()
                .enumerate()
                .any(|(i, a)| items[i + 1..].iter().any(|b| a.expected != b.expected && value(a) == value(b)))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedCandidate {
    pub candidate: Candidate,
    pub level: usize,
    pub distance: usize,
}

/// Candidate order at a site, plus what the level cutoff removed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariableRanking {
    pub ranked: Vec<RankedCandidate>,
    pub excluded: Vec<RankedCandidate>,
}

/// Position of statement `id` in the method's pre-order, counting the
/// function entry as 0.
fn position(method: &FunctionDecl, id: NodeId) -> Option<usize> {
    method.statements().iter().position(|s| s.id == id).map(|i| i + 1)
}

pub fn candidate_level(c: &Candidate, graph: &DependencyGraph) -> usize {
    c.variables().iter().filter_map(|v| graph.level(v)).min().unwrap_or(1)
}

pub fn rank_variables(
    candidates: &[Candidate],
    graph: &DependencyGraph,
    method: &FunctionDecl,
    site: NodeId,
    max_level: usize,
) -> VariableRanking {
    let here = position(method, site).unwrap_or(0);
    let mut all: Vec<(usize, RankedCandidate)> = candidates
        .iter()
        .enumerate()
        .map(|(order, c)| {
            let from = c.decl_site.and_then(|d| position(method, d)).unwrap_or(0);
            let ranked = RankedCandidate {
                candidate: c.clone(),
                level: candidate_level(c, graph),
                distance: here.abs_diff(from),
            };
            (order, ranked)
        })
        .collect();
    all.sort_by_key(|(order, r)| (r.level, r.distance, *order));
    let (ranked, excluded): (Vec<_>, Vec<_>) = all.into_iter().map(|(_, r)| r).partition(|r| r.level <= max_level);
    VariableRanking { ranked, excluded }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::Value;
    use crate::lang::parse_program;

    const LCM: &str = "fn lcm(a: int, b: int) -> int {
        if (a == 0 || b == 0) { return 0; }
        let lcm: int = abs(mul(a / gcd(a, b), b));
        return lcm;
    }
    fn gcd(a: int, b: int) -> int { return a; }
    fn mul(a: int, b: int) -> int { return a * b; }";

    #[test]
    fn lcm_levels_and_order() {
        let p = parse_program(LCM).unwrap();
        let f = p.function("lcm").unwrap();
        let site = f.body.stmts[2].id;
        let cands = collect_candidates(&p, f, site);
        let names: Vec<_> = cands.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["a", "b", "lcm"]);
        let g = build_dependency_graph(f);
        assert_eq!((g.level("lcm"), g.level("a"), g.level("b")), (Some(1), Some(2), Some(2)));
        let r = rank_variables(&cands, &g, f, site, DEFAULT_MAX_LEVEL);
        let order: Vec<_> = r.ranked.iter().map(|r| r.candidate.name.as_str()).collect();
        assert_eq!(order, ["lcm", "a", "b"]);
        assert!(r.excluded.is_empty());
    }

    #[test]
    fn no_assignments_all_level_one() {
        let p = parse_program("fn f(x: int, y: int) -> int { if (x > y) { return x; } return y; }").unwrap();
        let g = build_dependency_graph(&p.functions[0]);
        assert!(g.levels.values().all(|&l| l == 1));
    }

    #[test]
    fn cycle_condensed() {
        // x=0, y=1, z=2: x->y, y->x, z->x
        assert_eq!(levels(3, &[(0, 1), (1, 0), (2, 0)]), vec![2, 2, 1]);
    }

    #[test]
    fn level_three_excluded_and_distance_ties() {
        let p = parse_program(
            "fn f(m: int) -> int { let h: int = m % 2; let o: int = h + 1; let q: int = 5; let r: int = 7; return o + q + r; }",
        )
        .unwrap();
        let f = &p.functions[0];
        let site = f.body.stmts[4].id;
        let cands = collect_candidates(&p, f, site);
        let g = build_dependency_graph(f);
        let r = rank_variables(&cands, &g, f, site, 2);
        assert_eq!(r.excluded.iter().map(|c| c.candidate.name.as_str()).collect::<Vec<_>>(), ["m"]);
        assert_eq!(r.excluded[0].level, 3);
        let order: Vec<_> = r.ranked.iter().map(|c| c.candidate.name.as_str()).collect();
        assert_eq!(order, ["r", "q", "o", "h"]);
    }

    #[test]
    fn empty_method_has_no_candidates() {
        let p = parse_program("fn f() -> int { return 1; }").unwrap();
        let f = &p.functions[0];
        assert!(collect_candidates(&p, f, f.body.stmts[0].id).is_empty());
    }

    #[test]
    fn harvests_pseudo_variables() {
        let p = parse_program(
            "fn f(str: string) -> int { if (starts_with(str, \"-\")) { return 1; } let n: int = len(str); return n; }",
        )
        .unwrap();
        let f = &p.functions[0];
        let cands = collect_candidates(&p, f, f.body.stmts[2].id);
        let pseudo: Vec<_> = cands.iter().filter(|c| c.kind == CandidateKind::CondExpr).collect();
        assert_eq!(pseudo.len(), 1);
        assert_eq!(pseudo[0].name, "starts_with(str, \"-\")");
        assert_eq!(pseudo[0].static_type, crate::lang::Type::Bool);
    }

    fn cand(name: &str) -> Candidate {
        Candidate {
            kind: CandidateKind::Local,
            name: name.into(),
            expr: None,
            static_type: crate::lang::Type::Int,
            decl_site: None,
        }
    }

    fn inst(pairs: &[(&str, i64)], expected: bool) -> LabeledInstance {
        LabeledInstance { env: pairs.iter().map(|(k, v)| (k.to_string(), Some(Value::Int(*v)))).collect(), expected }
    }

    #[test]
    fn runtime_filter() {
        let li = LabeledInstances { instances: vec![inst(&[("a", 1)], false), inst(&[("a", 1)], true)] };
        assert!(filter_by_runtime(vec![cand("a")], &li).is_empty());
        let li = LabeledInstances {
            instances: vec![inst(&[("lcm", 50), ("b", 1)], false), inst(&[("lcm", i64::MIN), ("b", 1)], true)],
        };
        let kept: Vec<_> = filter_by_runtime(vec![cand("lcm"), cand("b")], &li).into_iter().map(|c| c.name).collect();
        assert_eq!(kept, ["lcm"]);
        let li = LabeledInstances { instances: vec![inst(&[("a", 1)], true)] };
        assert_eq!(filter_by_runtime(vec![cand("a")], &li).len(), 1);
    }
}
