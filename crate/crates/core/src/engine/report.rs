use serde::Serialize;

use crate::interp::SuiteResult;
use crate::lang::*;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct AnchorInfo {
    pub method: String,
    pub node: NodeId,
    /// First line of the anchor statement as printed.
    pub statement: String,
}

impl AnchorInfo {
    pub fn new(program: &Program, node: NodeId) -> Self {
        let method = program.function_containing(node).map(|f| f.name.clone()).unwrap_or_default();
        let statement = program
            .find_stmt(node)
            .map(|s| print_stmt(s).lines().next().unwrap_or_default().trim().to_string())
            .unwrap_or_default();
        AnchorInfo { method, node, statement }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct PatchRecord {
    pub template_kind: PatchKind,
    pub anchor: AnchorInfo,
    /// The condition as it appears in the patched program.
    pub condition: String,
    pub rendered: String,
    pub variable: String,
    /// 1-based positions in the candidate and predicate orders.
    pub variable_rank: usize,
    pub predicate: String,
    pub predicate_rank: usize,
    pub phase: u8,
    pub fixed_units: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ValidationSummary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
}

impl From<&SuiteResult> for ValidationSummary {
    fn from(s: &SuiteResult) -> Self {
        ValidationSummary { total: s.traces.len(), passed: s.passed_units, failed: s.failed_units }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RepairReport {
    pub patch_found: bool,
    pub template_kind: Option<PatchKind>,
    pub anchor: Option<AnchorInfo>,
    pub condition: Option<String>,
    pub variable_rank: Option<usize>,
    pub predicate_rank: Option<usize>,
    pub phase: Option<u8>,
    pub elapsed_ms: Option<u64>,
    pub validation_summary: ValidationSummary,
    pub log: Vec<String>,
    pub patches: Vec<PatchRecord>,
    pub failure_reason: Option<String>,
}

impl RepairReport {
    pub fn failure(reason: String, summary: ValidationSummary, log: Vec<String>) -> Self {
        RepairReport {
            patch_found: false,
            template_kind: None,
            anchor: None,
            condition: None,
            variable_rank: None,
            predicate_rank: None,
            phase: None,
            elapsed_ms: None,
            validation_summary: summary,
            log,
            patches: Vec::new(),
            failure_reason: Some(reason),
        }
    }

    /// Report of a success; the top-level fields describe the last patch.
    pub fn success(patches: Vec<PatchRecord>, summary: ValidationSummary, log: Vec<String>) -> Self {
        let last = patches.last().expect("a successful repair has a patch").clone();
        RepairReport {
            patch_found: true,
            template_kind: Some(last.template_kind),
            anchor: Some(last.anchor),
            condition: Some(last.condition),
            variable_rank: Some(last.variable_rank),
            predicate_rank: Some(last.predicate_rank),
            phase: Some(last.phase),
            elapsed_ms: None,
            validation_summary: summary,
            log,
            patches,
            failure_reason: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
