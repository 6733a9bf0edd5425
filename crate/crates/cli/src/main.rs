use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use acs_core::engine::{repair, RepairError, RepairReport, ValidationSummary};
use acs_core::fault_loc::{build_coverage_matrix, predicate_switch_search, rank_methods};
use acs_core::interp::{InstrumentationPlan, Interpreter};
use acs_core::lang::{parse_program_with_tests, print_items, NodeId, Program, Type};
use acs_core::miner::{build_index, query_similar, rank_predicates, ContextKey, CorpusIndex, MinerError};
use acs_core::var_rank::{build_dependency_graph, collect_candidates, rank_variables};
use acs_core::Config;

#[derive(Parser)]
#[command(name = "acs", version, about = "Condition-synthesis repair for MiniLang programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a plausible patch.
    Repair(RepairArgs),
    /// Build a predicate index from a corpus directory.
    Index(IndexArgs),
    /// Rank suspicious methods and list predicate-switching candidates.
    Localize(SuiteArgs),
    /// Query the index for predicates of a context.
    Mine(MineArgs),
    /// Run the test suite.
    RunTests(SuiteArgs),
    /// Show the candidate variable order at a statement.
    RankVars(RankArgs),
}

#[derive(Args, Clone)]
struct ProgramArgs {
    #[arg(long)]
    program: PathBuf,
    #[arg(long)]
    tests: PathBuf,
}

#[derive(Args)]
struct SuiteArgs {
    #[command(flatten)]
    input: ProgramArgs,
    #[arg(long, default_value_t = Config::default().step_budget)]
    step_budget: u64,
    #[arg(long, default_value_t = Config::default().method_budget)]
    method_budget: usize,
}

#[derive(Args)]
struct RepairArgs {
    #[command(flatten)]
    input: ProgramArgs,
    /// JSONL index written by `acs index`.
    #[arg(long)]
    index: PathBuf,
    #[arg(long)]
    out_report: Option<PathBuf>,
    #[arg(long)]
    out_diff: Option<PathBuf>,
    /// Where to write the patched program.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = Config::default().timeout_seconds)]
    timeout: u64,
    #[arg(long, default_value_t = Config::default().max_level)]
    max_level: usize,
    #[arg(long, default_value_t = Config::default().top_k)]
    top_k: usize,
    #[arg(long, default_value_t = Config::default().method_budget)]
    method_budget: usize,
    #[arg(long, default_value_t = Config::default().max_iterations)]
    max_iterations: usize,
    #[arg(long, default_value_t = Config::default().step_budget)]
    step_budget: u64,
    /// Write the traces of the unpatched suite to this file.
    #[arg(long)]
    dump_traces: Option<PathBuf>,
    /// Record wall time in the report.
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct IndexArgs {
    #[arg(long)]
    corpus_dir: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Mine `if` conditions only.
    #[arg(long)]
    if_only: bool,
}

#[derive(Args)]
struct MineArgs {
    #[arg(long)]
    index: PathBuf,
    #[arg(long = "type")]
    ty: Type,
    #[arg(long)]
    name: Option<String>,
    #[arg(long, default_value = "")]
    method: String,
    #[arg(long, default_value_t = Config::default().top_k)]
    k: usize,
    /// Skip entries from files with this name.
    #[arg(long)]
    exclude: Option<String>,
}

#[derive(Args)]
struct RankArgs {
    #[command(flatten)]
    input: ProgramArgs,
    #[arg(long)]
    method: String,
    /// Statement id; defaults to the method's last top-level statement.
    #[arg(long)]
    site: Option<u32>,
    #[arg(long, default_value_t = Config::default().max_level)]
    max_level: usize,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("ACS_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Repair(a) => cmd_repair(a),
        Command::Index(a) => cmd_index(a),
        Command::Localize(a) => cmd_localize(a),
        Command::Mine(a) => cmd_mine(a),
        Command::RunTests(a) => cmd_run_tests(a),
        Command::RankVars(a) => cmd_rank_vars(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn load_program(input: &ProgramArgs) -> Result<Program> {
    let src = read(&input.program)?;
    let tests = read(&input.tests)?;
    let mut program = parse_program_with_tests(&src, &tests)
        .with_context(|| format!("{} / {}", input.program.display(), input.tests.display()))?;
    program.source_name = input.program.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(program)
}

fn load_index(path: &Path) -> Result<CorpusIndex> {
    if !path.is_file() {
        bail!("index file {} does not exist", path.display());
    }
    CorpusIndex::load(path).with_context(|| format!("cannot load index {}", path.display()))
}

fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("json"));
}

fn cmd_repair(a: RepairArgs) -> Result<u8> {
    let start = Instant::now();
    let config = Config {
        timeout_seconds: a.timeout,
        max_level: a.max_level,
        top_k: a.top_k,
        method_budget: a.method_budget,
        max_iterations: a.max_iterations,
        step_budget: a.step_budget,
        if_only_mining: false,
    };
    config.validate()?;
    let program = load_program(&a.input)?;
    let index = load_index(&a.index)?;
    if let Some(path) = &a.dump_traces {
        let suite =
            Interpreter::new(&program).with_step_budget(config.step_budget).run_suite(&InstrumentationPlan::empty());
        write(path, &serde_json::to_string_pretty(&suite)?)?;
    }
    let (mut report, diff, patched) = match repair(&program, &index, &config) {
        Ok(out) => (out.report, out.diff, out.patched),
        Err(RepairError::NoFailingTest) => {
            let suite = Interpreter::new(&program)
                .with_step_budget(config.step_budget)
                .run_suite(&InstrumentationPlan::empty());
            let summary = ValidationSummary::from(&suite);
            (RepairReport::failure(RepairError::NoFailingTest.to_string(), summary, Vec::new()), None, None)
        }
        Err(e) => return Err(e.into()),
    };
    if a.timing {
        report.elapsed_ms = Some(start.elapsed().as_millis() as u64);
    }
    let json = report.to_json();
    match &a.out_report {
        Some(path) => write(path, &format!("{json}\n"))?,
        None => println!("{json}"),
    }
    if let Some(path) = &a.out_diff {
        write(path, diff.as_deref().unwrap_or(""))?;
    }
    if let (Some(path), Some(p)) = (&a.out, &patched) {
        write(path, &print_items(p))?;
    }
    if report.patch_found {
        eprintln!(
            "patch found: {}",
            report.patches.iter().map(|p| p.rendered.as_str()).collect::<Vec<_>>().join(" ; ")
        );
        Ok(0)
    } else {
        eprintln!("no patch: {}", report.failure_reason.as_deref().unwrap_or(""));
        Ok(1)
    }
}

fn cmd_index(a: IndexArgs) -> Result<u8> {
    if !a.corpus_dir.is_dir() {
        bail!("corpus directory {} does not exist", a.corpus_dir.display());
    }
    match build_index(&a.corpus_dir, a.if_only) {
        Ok(index) => {
            write(&a.out, &index.to_jsonl())?;
            println!("{} entries", index.entries.len());
            Ok(0)
        }
        Err(e @ MinerError::EmptyCorpus(_)) => {
            eprintln!("{e}");
            Ok(1)
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_localize(a: SuiteArgs) -> Result<u8> {
    let program = load_program(&a.input)?;
    let interp = Interpreter::new(&program).with_step_budget(a.step_budget);
    let suite = interp.run_suite(&InstrumentationPlan::empty());
    let matrix = build_coverage_matrix(&program, &suite)?;
    let methods = rank_methods(&program, &matrix);
    let failing: Vec<_> = suite.failing().map(|t| t.test_unit.clone()).collect();
    let flips: Vec<_> = methods
        .iter()
        .take(a.method_budget)
        .filter_map(|m| program.function(&m.name))
        .map(|f| json!({ "method": f.name, "candidates": predicate_switch_search(&interp, f, &failing) }))
        .collect();
    print_json(&json!({ "methods": methods, "flips": flips }));
    Ok(0)
}

fn cmd_mine(a: MineArgs) -> Result<u8> {
    let index = load_index(&a.index)?;
    let key = ContextKey::new(a.ty, a.name.as_deref().unwrap_or(""), &a.method);
    let mined = query_similar(&index, &key, a.exclude.as_deref());
    let ranked: Vec<_> = rank_predicates(&mined, &key, a.k)
        .into_iter()
        .map(|p| json!({ "predicate": p.to_string(), "count": mined.get(&p).copied().unwrap_or(0) }))
        .collect();
    print_json(&json!({ "context": key, "predicates": ranked }));
    Ok(0)
}

fn cmd_run_tests(a: SuiteArgs) -> Result<u8> {
    let program = load_program(&a.input)?;
    let suite = Interpreter::new(&program).with_step_budget(a.step_budget).run_suite(&InstrumentationPlan::empty());
    let units: Vec<_> = suite
        .traces
        .iter()
        .map(|t| {
            json!({
                "unit": t.test_unit.to_string(),
                "verdict": t.verdict,
                "failure": t.failure_kind.as_ref().map(|f| f.to_string()),
            })
        })
        .collect();
    let total = suite.traces.len();
    let rate = if total == 0 { 100.0 } else { 100.0 * suite.passed_units as f64 / total as f64 };
    print_json(&json!({
        "total": total,
        "passed": suite.passed_units,
        "failed": suite.failed_units,
        "passRate": rate,
        "units": units,
    }));
    Ok(if suite.all_pass() { 0 } else { 1 })
}

fn cmd_rank_vars(a: RankArgs) -> Result<u8> {
    let program = load_program(&a.input)?;
    let method = program.function(&a.method).with_context(|| format!("no function {}", a.method))?;
    let site = match a.site {
        Some(id) => NodeId(id),
        None => method.body.stmts.last().map(|s| s.id).context("method has no statements")?,
    };
    if !method.contains(site) {
        bail!("statement {} is not in {}", site.0, method.name);
    }
    let candidates = collect_candidates(&program, method, site);
    let graph = build_dependency_graph(method);
    let ranking = rank_variables(&candidates, &graph, method, site, a.max_level);
    print_json(&json!({ "site": site, "ranking": ranking, "levels": graph.levels }));
    Ok(0)
}
