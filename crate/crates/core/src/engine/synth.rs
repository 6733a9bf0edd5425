use crate::interp::ExecutionTrace;
use crate::lang::*;
use crate::miner::Predicate;
use crate::var_rank::{LabeledInstances, RankedCandidate};

/// Rule 1: equality against a constant. Rule 2: a strict comparison, only
/// when the guard throws.
pub fn is_boundary_check(condition: &Expr, throws: bool) -> bool {
    let mut e = condition.unparen();
    while let ExprKind::Unary(UnaryOp::Not, inner) = &e.kind {
        e = inner.unparen();
    }
    match &e.kind {
        ExprKind::Binary(BinaryOp::Eq, ..) => true,
        ExprKind::Call(name, args) => name == "equals" && args.len() == 2,
        ExprKind::Binary(BinaryOp::Lt | BinaryOp::Gt, ..) => throws,
        _ => false,
    }
}

/// Insertion labels: the failing unit's last arrival at the anchor must take
/// the guard, its earlier arrivals and every passing arrival must not.
pub fn label_insertion<'a>(
    failing: &ExecutionTrace,
    passing: impl IntoIterator<Item = &'a ExecutionTrace>,
    anchor: NodeId,
) -> LabeledInstances {
    let mut out = LabeledInstances::default();
    let arrivals: Vec<_> = failing.arrivals_at(anchor).collect();
    for (i, a) in arrivals.iter().enumerate() {
        out.push(a.env.clone(), i + 1 == arrivals.len());
    }
    for t in passing {
        for a in t.arrivals_at(anchor) {
            out.push(a.env.clone(), false);
        }
    }
    out
}

/// Labels for the synthesized part `c` of a rewritten condition. Under
/// narrowing `c` decides only evaluations that were originally true and must
/// be true exactly where the outcome is to become false; widening mirrors
/// this on originally false evaluations.
pub fn label_modification<'a>(
    kind: PatchKind,
    traces: impl IntoIterator<Item = &'a ExecutionTrace>,
    site: NodeId,
) -> LabeledInstances {
    let narrowing = kind == PatchKind::Narrowing;
    let mut out = LabeledInstances::default();
    for t in traces {
        for c in t.evals_at(site) {
            if c.original == narrowing {
                out.push(c.env.clone(), c.outcome != narrowing);
            }
        }
    }
    out
}

/// Whether `p` on the candidate's value matches every label.
pub fn qualifies(p: &Predicate, candidate: &RankedCandidate, labeled: &LabeledInstances) -> bool {
    !labeled.instances.is_empty()
        && labeled.instances.iter().all(|inst| match inst.env.get(&candidate.candidate.name) {
            Some(Some(v)) => p.holds(v) == Some(inst.expected),
            _ => false,
        })
}
