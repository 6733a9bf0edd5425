//! Template choice, synthesis and validation of condition patches.

mod oracle;
mod report;
mod synth;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rayon::prelude::*;

pub use oracle::*;
pub use report::*;
pub use synth::*;

use crate::config::{Config, ConfigError};
use crate::diff::unified_diff;
use crate::doc_filter::{filter_for_exception, parse_doc};
use crate::fault_loc::{build_coverage_matrix, predicate_switch_search, rank_methods, FlipCandidate, FlipDirection};
use crate::interp::{ExecutionTrace, InstrumentationPlan, Interpreter, SuiteResult};
use crate::lang::*;
use crate::miner::{query_similar, rank_predicates, ContextKey, CorpusIndex, Predicate};
use crate::var_rank::*;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RepairError {
    #[error("NoFailingTest: every test unit passes")]
    NoFailingTest,
    #[error("method {0} is not covered by the failing unit")]
    MethodNotCovered(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// The method statement executed last in `trace`.
pub fn locate_anchor(trace: &ExecutionTrace, method: &FunctionDecl) -> Result<NodeId, RepairError> {
    method
        .statements()
        .into_iter()
        .filter_map(|s| trace.timestamps.get(&s.id).map(|t| (*t, s.id)))
        .max()
        .map(|(_, id)| id)
        .ok_or_else(|| RepairError::MethodNotCovered(method.name.clone()))
}

#[derive(Debug, Clone)]
pub struct RepairOutcome {
    pub report: RepairReport,
    pub patched: Option<Program>,
    pub diff: Option<String>,
}

struct Attempt {
    patched: Program,
    suite: SuiteResult,
    record: PatchRecord,
}

struct Engine<'a> {
    index: &'a CorpusIndex,
    config: &'a Config,
    deadline: Instant,
    timed_out: bool,
    log: Vec<String>,
    /// Candidates dropped by the level cutoff, with their levels.
    excluded: BTreeMap<String, usize>,
}

fn interpreter<'p>(program: &'p Program, config: &Config) -> Interpreter<'p> {
    Interpreter::new(program).with_step_budget(config.step_budget)
}

/// Searches for a plausible patch of `program`, whose tests must include a
/// failing unit.
pub fn repair(program: &Program, index: &CorpusIndex, config: &Config) -> Result<RepairOutcome, RepairError> {
    config.validate()?;
    let suite = interpreter(program, config).run_suite(&InstrumentationPlan::empty());
    if suite.all_pass() {
        return Err(RepairError::NoFailingTest);
    }
    let mut engine = Engine {
        index,
        config,
        deadline: Instant::now() + Duration::from_secs(config.timeout_seconds),
        timed_out: false,
        log: Vec::new(),
        excluded: BTreeMap::new(),
    };
    let found = engine.phase_one(program, suite.clone()).or_else(|| engine.phase_two(program, &suite));
    let name = if program.source_name.is_empty() { "program.mini" } else { program.source_name.as_str() };
    Ok(match found {
        Some((patched, final_suite, records)) => {
            let recheck = interpreter(&patched, config).run_suite(&InstrumentationPlan::empty());
            assert!(recheck.all_pass(), "accepted patches pass the whole suite");
            let diff = unified_diff(program, &patched, name);
            RepairOutcome {
                report: RepairReport::success(records, (&final_suite).into(), engine.log),
                patched: Some(patched),
                diff: Some(diff),
            }
        }
        None => {
            let reason = engine.failure_reason();
            RepairOutcome {
                report: RepairReport::failure(reason, (&suite).into(), engine.log),
                patched: None,
                diff: None,
            }
        }
    })
}

impl Engine<'_> {
    fn out_of_time(&mut self) -> bool {
        if !self.timed_out && Instant::now() >= self.deadline {
            self.timed_out = true;
            self.log.push(format!("timeout after {}s", self.config.timeout_seconds));
        }
        self.timed_out
    }

    fn failure_reason(&self) -> String {
        let mut reason = if self.timed_out {
            format!("TimeoutExceeded: no plausible patch within {}s", self.config.timeout_seconds)
        } else {
            "no plausible patch found".to_string()
        };
        if !self.excluded.is_empty() {
            let names: Vec<String> = self.excluded.iter().map(|(n, l)| format!("{n} (level {l})")).collect();
            reason.push_str(&format!(
                "; level-cutoff exhaustion: candidates beyond level {} were not tried: {}",
                self.config.max_level,
                names.join(", ")
            ));
        }
        reason
    }

    fn suspicious_methods<'p>(&mut self, program: &'p Program, suite: &SuiteResult) -> Vec<&'p FunctionDecl> {
        let Ok(matrix) = build_coverage_matrix(program, suite) else { return Vec::new() };
        let ranked = rank_methods(program, &matrix);
        let names: Vec<String> = ranked.iter().map(|m| format!("{}={:.3}", m.name, m.score)).collect();
        self.log.push(format!("methods: {}", names.join(", ")));
        ranked.iter().take(self.config.method_budget).filter_map(|m| program.function(&m.name)).collect()
    }

    fn rank(&mut self, method: &FunctionDecl, site: NodeId, candidates: Vec<Candidate>) -> Vec<RankedCandidate> {
        let graph = build_dependency_graph(method);
        let ranking = rank_variables(&candidates, &graph, method, site, self.config.max_level);
        for r in &ranking.excluded {
            self.excluded.insert(r.candidate.name.clone(), r.level);
        }
        let names: Vec<String> = ranking.ranked.iter().map(|r| format!("{}@{}", r.candidate.name, r.level)).collect();
        self.log.push(format!("  variables: [{}]", names.join(", ")));
        if !ranking.excluded.is_empty() {
            let names: Vec<String> =
                ranking.excluded.iter().map(|r| format!("{}@{}", r.candidate.name, r.level)).collect();
            self.log.push(format!("  beyond level {}: [{}]", self.config.max_level, names.join(", ")));
        }
        ranking.ranked
    }

    fn predicates(&self, program: &Program, method: &FunctionDecl, c: &Candidate) -> Vec<Predicate> {
        let key = ContextKey::new(c.static_type.clone(), &c.name, &method.name);
        let exclude = (!program.source_name.is_empty()).then_some(program.source_name.as_str());
        rank_predicates(&query_similar(self.index, &key, exclude), &key, self.config.top_k)
    }

    fn validate(&self, patched: &Program) -> SuiteResult {
        interpreter(patched, self.config).run_suite(&InstrumentationPlan::empty())
    }

    /// Oracle-returning templates, accumulating guards that fix a failing
    /// unit without breaking a passing one.
    fn phase_one(
        &mut self,
        original: &Program,
        mut suite: SuiteResult,
    ) -> Option<(Program, SuiteResult, Vec<PatchRecord>)> {
        let mut current = original.clone();
        let mut records: Vec<PatchRecord> = Vec::new();
        for round in 1..=self.config.max_iterations {
            self.log.push(format!("phase 1 round {round}"));
            let failing: Vec<TestUnit> = suite.failing().map(|t| t.test_unit.clone()).collect();
            let methods = self.suspicious_methods(&current, &suite);
            let mut accepted = None;
            'units: for unit in &failing {
                for method in &methods {
                    if self.out_of_time() {
                        break 'units;
                    }
                    if let Some(a) = self.insertion_task(&current, &suite, unit, method) {
                        accepted = Some(a);
                        break 'units;
                    }
                }
            }
            let attempt = accepted?;
            records.push(attempt.record);
            if attempt.suite.all_pass() {
                return Some((attempt.patched, attempt.suite, records));
            }
            current = attempt.patched;
            suite = attempt.suite;
        }
        self.log.push(format!("phase 1 stopped after {} rounds", self.config.max_iterations));
        None
    }

    fn insertion_task(
        &mut self,
        program: &Program,
        suite: &SuiteResult,
        unit: &TestUnit,
        method: &FunctionDecl,
    ) -> Option<Attempt> {
        let trace = suite.trace(unit)?;
        let anchor = match locate_anchor(trace, method) {
            Ok(a) => a,
            Err(e) => {
                self.log.push(format!("{unit} @ {}: {e}", method.name));
                return None;
            }
        };
        let oracle = match extract_oracle(program, unit, method) {
            Ok(o) => o,
            Err(e) => {
                self.log.push(format!("{unit} @ {}: {e}", method.name));
                return None;
            }
        };
        let (kind, payload) = match &oracle {
            OracleSpec::Exception(e) => (PatchKind::OracleThrowing, PatchPayload::Throw { exception: e.clone() }),
            OracleSpec::Constant(v) => {
                let value = v.to_expr()?;
                (PatchKind::ValueReturning, PatchPayload::Return { prefix: Vec::new(), value })
            }
            OracleSpec::Function { prefix, value, .. } => {
                (PatchKind::ValueReturning, PatchPayload::Return { prefix: prefix.clone(), value: value.clone() })
            }
        };
        self.log.push(format!(
            "{unit} @ {}: anchor {} `{}`, oracle {}, template {:?}",
            method.name,
            anchor.0,
            AnchorInfo::new(program, anchor).statement,
            oracle.describe(),
            kind
        ));
        let probe = Patch {
            kind,
            anchor,
            condition: Expr::new(NodeId(0), ExprKind::Bool(true)),
            payload: payload.clone(),
            textual_diff: String::new(),
        };
        if let Err(e) = apply_patch(program, &probe) {
            self.log.push(format!("  oracle does not fit the anchor: {e}"));
            return None;
        }

        let candidates = collect_candidates(program, method, anchor);
        let plan = InstrumentationPlan::site(anchor, pseudo_variables(&candidates));
        let interp = interpreter(program, self.config);
        let mut runs: Vec<&TestUnit> = vec![unit];
        runs.extend(suite.passing().map(|t| &t.test_unit));
        let traces: Vec<ExecutionTrace> = runs.par_iter().filter_map(|u| interp.run_test_unit(u, &plan).ok()).collect();
        let labeled = label_insertion(&traces[0], &traces[1..], anchor);

        let candidates = match (&oracle, &method.doc) {
            (OracleSpec::Exception(e), Some(doc)) => filter_for_exception(candidates, &parse_doc(doc), e),
            _ => candidates,
        };
        let candidates = filter_by_runtime(candidates, &labeled);
        let ranked = self.rank(method, anchor, candidates);
        let throws = kind == PatchKind::OracleThrowing;

        for (vi, rc) in ranked.iter().enumerate() {
            let preds = self.predicates(program, method, &rc.candidate);
            for (pi, p) in preds.iter().enumerate() {
                if !qualifies(p, rc, &labeled) {
                    continue;
                }
                let Some(condition) = p.to_condition(rc.candidate.as_expr()) else { continue };
                let text = print_expr(&condition);
                if !is_boundary_check(&condition, throws) {
                    self.log.push(format!(
                        "  {} #{}/{p} #{}: `{text}` is not a boundary check",
                        rc.candidate.name,
                        vi + 1,
                        pi + 1
                    ));
                    continue;
                }
                if self.out_of_time() {
                    return None;
                }
                let patch = Patch { kind, anchor, condition, payload: payload.clone(), textual_diff: String::new() };
                let patched = match apply_patch(program, &patch) {
                    Ok(p) => p,
                    Err(e) => {
                        self.log.push(format!("  `{text}`: {e}"));
                        continue;
                    }
                };
                let after = self.validate(&patched);
                let fixes = after.trace(unit).is_some_and(|t| t.passed());
                let regressions =
                    suite.passing().filter(|t| !after.trace(&t.test_unit).is_some_and(|a| a.passed())).count();
                self.log.push(format!(
                    "  {} #{}/{p} #{}: `{text}` -> {}/{} pass",
                    rc.candidate.name,
                    vi + 1,
                    pi + 1,
                    after.passed_units,
                    after.traces.len()
                ));
                if after.all_pass() || (fixes && regressions == 0) {
                    let fixed_units = suite
                        .failing()
                        .filter(|t| after.trace(&t.test_unit).is_some_and(|a| a.passed()))
                        .map(|t| t.test_unit.to_string())
                        .collect();
                    let record = PatchRecord {
                        template_kind: kind,
                        anchor: AnchorInfo::new(program, anchor),
                        condition: text,
                        rendered: patch.render(program),
                        variable: rc.candidate.name.clone(),
                        variable_rank: vi + 1,
                        predicate: p.to_string(),
                        predicate_rank: pi + 1,
                        phase: 1,
                        fixed_units,
                    };
                    return Some(Attempt { patched, suite: after, record });
                }
            }
        }
        None
    }

    /// Modification templates driven by predicate switching.
    fn phase_two(
        &mut self,
        program: &Program,
        suite: &SuiteResult,
    ) -> Option<(Program, SuiteResult, Vec<PatchRecord>)> {
        if self.timed_out {
            return None;
        }
        self.log.push("phase 2".to_string());
        let failing: Vec<TestUnit> = suite.failing().map(|t| t.test_unit.clone()).collect();
        let interp = interpreter(program, self.config);
        for method in self.suspicious_methods(program, suite) {
            let flips = predicate_switch_search(&interp, method, &failing);
            self.log.push(format!("{}: {} flip candidates", method.name, flips.len()));
            for flip in &flips {
                if self.out_of_time() {
                    return None;
                }
                if let Some(a) = self.modification_task(program, suite, method, flip) {
                    return Some((a.patched, a.suite, vec![a.record]));
                }
            }
        }
        None
    }

    fn modification_task(
        &mut self,
        program: &Program,
        suite: &SuiteResult,
        method: &FunctionDecl,
        flip: &FlipCandidate,
    ) -> Option<Attempt> {
        let cond = program.find_stmt(flip.site)?.condition()?;
        let kind = match flip.direction {
            FlipDirection::TrueToFalse => PatchKind::Narrowing,
            FlipDirection::FalseToTrue => PatchKind::Widening,
        };
        self.log.push(format!(
            "flip {} instance {} {:?} on `{}` fixes {:?}: {kind:?}",
            flip.site.0,
            flip.instance_index,
            flip.direction,
            print_expr(cond),
            flip.fixed_units.iter().map(|u| u.to_string()).collect::<Vec<_>>()
        ));
        let candidates = collect_candidates(program, method, flip.site);
        let plan = InstrumentationPlan::site(flip.site, pseudo_variables(&candidates));
        let interp = interpreter(program, self.config);
        let fixed: Vec<&TestUnit> = flip.fixed_units.iter().collect();
        let passing: Vec<&TestUnit> = suite.passing().map(|t| &t.test_unit).collect();
        let mut traces: Vec<ExecutionTrace> = fixed
            .par_iter()
            .filter_map(|u| interp.run_with_flip(u, flip.site, flip.instance_index, &plan).ok())
            .collect();
        traces.extend(passing.par_iter().filter_map(|u| interp.run_test_unit(u, &plan).ok()).collect::<Vec<_>>());
        let labeled = label_modification(kind, &traces, flip.site);
        let candidates = filter_by_runtime(candidates, &labeled);
        let ranked = self.rank(method, flip.site, candidates);

        for (vi, rc) in ranked.iter().enumerate() {
            let preds = self.predicates(program, method, &rc.candidate);
            for (pi, p) in preds.iter().enumerate() {
                if !qualifies(p, rc, &labeled) {
                    continue;
                }
                let Some(condition) = p.to_condition(rc.candidate.as_expr()) else { continue };
                if self.out_of_time() {
                    return None;
                }
                let patch = Patch {
                    kind,
                    anchor: flip.site,
                    condition,
                    payload: PatchPayload::Rewrite { original: cond.id },
                    textual_diff: String::new(),
                };
                let rendered = patch.render(program);
                let patched = match apply_patch(program, &patch) {
                    Ok(p) => p,
                    Err(e) => {
                        self.log.push(format!("  `{rendered}`: {e}"));
                        continue;
                    }
                };
                let after = self.validate(&patched);
                self.log.push(format!(
                    "  {} #{}/{p} #{}: `{rendered}` -> {}/{} pass",
                    rc.candidate.name,
                    vi + 1,
                    pi + 1,
                    after.passed_units,
                    after.traces.len()
                ));
                if after.all_pass() {
                    let record = PatchRecord {
                        template_kind: kind,
                        anchor: AnchorInfo::new(program, flip.site),
                        condition: rendered.clone(),
                        rendered,
                        variable: rc.candidate.name.clone(),
                        variable_rank: vi + 1,
                        predicate: p.to_string(),
                        predicate_rank: pi + 1,
                        phase: 2,
                        fixed_units: suite.failing().map(|t| t.test_unit.to_string()).collect(),
                    };
                    return Some(Attempt { patched, suite: after, record });
                }
            }
        }
        None
    }
}
