use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::interp::Value;
use crate::lang::*;
use crate::miner::fold_constant;

#[derive(Debug, Clone, PartialEq)]
pub enum OracleSpec {
    Constant(Value),
    Exception(String),
    Function { prefix: Vec<Stmt>, value: Expr, rename: BTreeMap<String, String> },
}

impl OracleSpec {
    pub fn describe(&self) -> String {
        match self {
            OracleSpec::Constant(v) => format!("Constant({v})"),
            OracleSpec::Exception(e) => format!("Exception({e})"),
            OracleSpec::Function { prefix, value, .. } => {
                format!("Function(prefix={}, value={})", prefix.len(), print_expr(value))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, thiserror::Error)]
pub enum OracleError {
    #[error("no test unit {0}")]
    UnknownUnit(TestUnit),
    #[error("unsupported oracle: {0}")]
    UnsupportedOracle(String),
}

/// Statements of `stmts` that the value of `seed` depends on, in source order.
pub fn backward_slice<'a>(stmts: &[&'a Stmt], seed: &Expr) -> Vec<&'a Stmt> {
    let mut needed: BTreeSet<String> = seed.variables().into_iter().collect();
    let mut included = vec![false; stmts.len()];
    loop {
        let mut changed = false;
        for (i, s) in stmts.iter().enumerate() {
            if included[i] {
                continue;
            }
            if s.defined_variable().is_some_and(|v| needed.contains(v)) {
                included[i] = true;
                changed = true;
                for e in s.exprs() {
                    needed.extend(e.variables());
                }
            }
        }
        if !changed {
            break;
        }
    }
    stmts.iter().zip(included).filter(|(_, inc)| *inc).map(|(s, _)| *s).collect()
}

fn rename_expr(e: &mut Expr, rename: &BTreeMap<String, String>) {
    e.walk_mut(&mut |x| {
        if let ExprKind::Var(name) = &mut x.kind {
            if let Some(to) = rename.get(name) {
                *name = to.clone();
            }
        }
    });
}

fn rename_stmt(s: &mut Stmt, rename: &BTreeMap<String, String>) {
    match &mut s.kind {
        StmtKind::Let { init: e, .. } | StmtKind::Expr(e) => rename_expr(e, rename),
        StmtKind::Assign { name, value } => {
            rename_expr(value, rename);
            if let Some(to) = rename.get(name) {
                *name = to.clone();
            }
        }
        _ => {}
    }
}

fn calls_to<'a>(e: &'a Expr, method: &str) -> Vec<&'a Expr> {
    let mut out = Vec::new();
    e.walk(&mut |x| {
        if matches!(&x.kind, ExprKind::Call(name, _) if name == method) {
            out.push(x);
        }
    });
    out
}

/// The oracle of `unit`, as seen from `method`.
pub fn extract_oracle(program: &Program, unit: &TestUnit, method: &FunctionDecl) -> Result<OracleSpec, OracleError> {
    let test = program.test(&unit.test).ok_or_else(|| OracleError::UnknownUnit(unit.clone()))?;
    let assertion = *test.assertions().get(unit.assertion).ok_or_else(|| OracleError::UnknownUnit(unit.clone()))?;
    let (expected, actual) = match &assertion.kind {
        StmtKind::AssertThrows { exception, .. } => return Ok(OracleSpec::Exception(exception.clone())),
        StmtKind::AssertEq { expected, actual } => (expected, actual),
        _ => unreachable!("units point at assertions"),
    };
    if let Some(value) = fold_constant(expected).and_then(|c| c.to_value()) {
        return Ok(OracleSpec::Constant(value));
    }
    let calls = calls_to(actual, &method.name);
    let [call] = calls.as_slice() else {
        return Err(OracleError::UnsupportedOracle(format!(
            "{} calls to {} in the assertion",
            calls.len(),
            method.name
        )));
    };
    let ExprKind::Call(_, args) = &call.kind else { unreachable!() };
    let mut rename = BTreeMap::new();
    for (arg, param) in args.iter().zip(&method.params) {
        let Some(var) = arg.unparen().as_var() else {
            return Err(OracleError::UnsupportedOracle(format!("argument {} is not a variable", print_expr(arg))));
        };
        rename.insert(var.to_string(), param.name.clone());
    }
    let before: Vec<&Stmt> = test.body.stmts.iter().take_while(|s| s.id != assertion.id).collect();
    let oracle_slice = backward_slice(&before, expected);
    let input_ids: BTreeSet<NodeId> = args.iter().flat_map(|a| backward_slice(&before, a)).map(|s| s.id).collect();
    let prefix = oracle_slice
        .into_iter()
        .filter(|s| !input_ids.contains(&s.id))
        .map(|s| {
            let mut s = s.clone();
            rename_stmt(&mut s, &rename);
            s
        })
        .collect();
    let mut value = expected.clone();
    rename_expr(&mut value, &rename);
    Ok(OracleSpec::Function { prefix, value, rename })
}
