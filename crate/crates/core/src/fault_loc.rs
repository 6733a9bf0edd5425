//! Spectrum-based fault localization and predicate switching.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::interp::{InstrumentationPlan, Interpreter, SuiteResult};
use crate::lang::{FunctionDecl, NodeId, Program, TestUnit};

/// Probed condition instances per method per failing unit.
pub const FLIP_BUDGET: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FaultLocError {
    #[error("no failing test unit")]
    NoFailingTest,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CoverageMatrix {
    pub units: Vec<(TestUnit, bool)>,
    /// `(ef, ep)` for every statement of every function.
    pub per_statement: BTreeMap<NodeId, (usize, usize)>,
    pub failed: usize,
    pub passed: usize,
}

pub fn build_coverage_matrix(program: &Program, suite: &SuiteResult) -> Result<CoverageMatrix, FaultLocError> {
    if suite.failed_units == 0 {
        return Err(FaultLocError::NoFailingTest);
    }
    let mut per_statement: BTreeMap<NodeId, (usize, usize)> =
        program.statements().into_iter().map(|s| (s.id, (0, 0))).collect();
    for trace in &suite.traces {
        for id in &trace.covered_statements {
            if let Some(counts) = per_statement.get_mut(id) {
                if trace.passed() {
                    counts.1 += 1;
                } else {
                    counts.0 += 1;
                }
            }
        }
    }
    Ok(CoverageMatrix {
        units: suite.traces.iter().map(|t| (t.test_unit.clone(), t.passed())).collect(),
        per_statement,
        failed: suite.failed_units,
        passed: suite.passed_units,
    })
}

pub fn ochiai(ef: usize, ep: usize, failed: usize) -> f64 {
    if ef == 0 {
        return 0.0;
    }
    ef as f64 / ((failed * (ef + ep)) as f64).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedMethod {
    pub name: String,
    pub score: f64,
}

impl CoverageMatrix {
    pub fn suspiciousness(&self, stmt: NodeId) -> f64 {
        let (ef, ep) = self.per_statement.get(&stmt).copied().unwrap_or((0, 0));
        ochiai(ef, ep, self.failed)
    }
}

/// Methods by descending maximum statement score; ties keep source order.
pub fn rank_methods(program: &Program, matrix: &CoverageMatrix) -> Vec<RankedMethod> {
    let mut ranked: Vec<RankedMethod> = program
        .functions
        .iter()
        .map(|f| RankedMethod {
            name: f.name.clone(),
            score: f.statements().iter().map(|s| matrix.suspiciousness(s.id)).fold(0.0, f64::max),
        })
        .collect();
    ranked.sort_by(|a, b| b.score.total_cmp(&a.score));
    ranked
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum FlipDirection {
    TrueToFalse,
    FalseToTrue,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct FlipCandidate {
    pub site: NodeId,
    pub instance_index: usize,
    pub direction: FlipDirection,
    pub fixed_units: BTreeSet<TestUnit>,
}

/// Flips each condition instance of `method` reached by each failing unit and
/// keeps those that make the unit pass, ordered by `(site, instance, direction)`.
pub fn predicate_switch_search(
    interp: &Interpreter<'_>,
    method: &FunctionDecl,
    failing: &[TestUnit],
) -> Vec<FlipCandidate> {
    let plan = InstrumentationPlan::empty();
    let probes: Vec<(TestUnit, NodeId, usize, FlipDirection)> = failing
        .iter()
        .filter_map(|u| interp.run_test_unit(u, &plan).ok().map(|t| (u, t)))
        .flat_map(|(u, trace)| {
            trace
                .cond_evals
                .iter()
                .filter(|c| method.contains(c.site))
                .take(FLIP_BUDGET)
                .map(|c| {
                    let dir = if c.outcome { FlipDirection::TrueToFalse } else { FlipDirection::FalseToTrue };
                    (u.clone(), c.site, c.instance_index, dir)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let fixed: Vec<bool> = probes
        .par_iter()
        .map(|(u, site, instance, _)| {
            interp.run_with_flip(u, *site, *instance, &plan).map(|t| t.passed()).unwrap_or(false)
        })
        .collect();
    let mut merged: BTreeMap<(NodeId, usize, FlipDirection), BTreeSet<TestUnit>> = BTreeMap::new();
    for ((unit, site, instance, dir), ok) in probes.into_iter().zip(fixed) {
        if ok {
            merged.entry((site, instance, dir)).or_default().insert(unit);
        }
    }
    merged
        .into_iter()
        .map(|((site, instance_index, direction), fixed_units)| FlipCandidate {
            site,
            instance_index,
            direction,
            fixed_units,
        })
        .collect()
}
