use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::value::Value;
use crate::lang::{Expr, NodeId, TestUnit};

/// Variable and pseudo-variable values at one program point. Pseudo-variables
/// whose evaluation raised an exception map to `None`.
pub type Snapshot = BTreeMap<String, Option<Value>>;

/// Sites to snapshot, each with the pseudo-variable expressions to evaluate
/// there. Pseudo-variables are keyed by their printed text.
#[derive(Debug, Clone, Default)]
pub struct InstrumentationPlan {
    pub sites: BTreeMap<NodeId, Vec<(String, Expr)>>,
}

impl InstrumentationPlan {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn site(site: NodeId, pseudo: Vec<(String, Expr)>) -> Self {
        let mut sites = BTreeMap::new();
        sites.insert(site, pseudo);
        InstrumentationPlan { sites }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct CondEval {
    pub site: NodeId,
    pub instance_index: usize,
    pub outcome: bool,
    /// The natural outcome, before any forced flip.
    pub original: bool,
    pub env: Snapshot,
}

/// Execution reaching a planned statement.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Arrival {
    pub site: NodeId,
    pub instance_index: usize,
    pub env: Snapshot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum FailureKind {
    AssertionMismatch { actual: Value, expected: Value },
    UnexpectedException { name: String },
    MissingExpectedException,
    RuntimeLimitExceeded,
}

impl std::fmt::Display for FailureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FailureKind::AssertionMismatch { actual, expected } => {
                write!(f, "expected {expected}, got {actual}")
            }
            FailureKind::UnexpectedException { name } => write!(f, "unexpected exception {name}"),
            FailureKind::MissingExpectedException => f.write_str("expected exception not thrown"),
            FailureKind::RuntimeLimitExceeded => f.write_str("step budget exceeded"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ExecutionTrace {
    pub test_unit: TestUnit,
    pub verdict: Verdict,
    pub failure_kind: Option<FailureKind>,
    pub covered_statements: BTreeSet<NodeId>,
    /// Logical time of each covered statement's most recent execution.
    pub timestamps: BTreeMap<NodeId, u64>,
    pub cond_evals: Vec<CondEval>,
    pub arrivals: Vec<Arrival>,
    pub last_executed_statement: Option<NodeId>,
    pub steps: u64,
}

impl ExecutionTrace {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Condition evaluations at `site`, in order.
    pub fn evals_at(&self, site: NodeId) -> impl Iterator<Item = &CondEval> {
        self.cond_evals.iter().filter(move |c| c.site == site)
    }

    pub fn arrivals_at(&self, site: NodeId) -> impl Iterator<Item = &Arrival> {
        self.arrivals.iter().filter(move |a| a.site == site)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SuiteResult {
    pub traces: Vec<ExecutionTrace>,
    pub passed_units: usize,
    pub failed_units: usize,
}

impl SuiteResult {
    pub fn from_traces(traces: Vec<ExecutionTrace>) -> Self {
        let passed_units = traces.iter().filter(|t| t.passed()).count();
        let failed_units = traces.len() - passed_units;
        SuiteResult { traces, passed_units, failed_units }
    }

    pub fn all_pass(&self) -> bool {
        self.failed_units == 0
    }

    pub fn failing(&self) -> impl Iterator<Item = &ExecutionTrace> {
        self.traces.iter().filter(|t| !t.passed())
    }

    pub fn passing(&self) -> impl Iterator<Item = &ExecutionTrace> {
        self.traces.iter().filter(|t| t.passed())
    }

    pub fn trace(&self, unit: &TestUnit) -> Option<&ExecutionTrace> {
        self.traces.iter().find(|t| &t.test_unit == unit)
    }
}
