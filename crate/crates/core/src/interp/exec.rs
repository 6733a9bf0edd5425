use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;

use super::trace::*;
use super::value::Value;
use crate::lang::typecheck::resolves_to_builtin;
use crate::lang::*;

pub const DEFAULT_STEP_BUDGET: u64 = 10_000_000;
pub const MAX_CALL_DEPTH: usize = 256;
const EXEC_STACK_BYTES: usize = 256 << 20;
/// Budget for evaluating one pseudo-variable at a snapshot.
const PSEUDO_STEP_BUDGET: u64 = 100_000;

pub const DIV_BY_ZERO: &str = "DivByZero";
pub const INDEX_ERROR: &str = "IndexError";
pub const NULL_ERROR: &str = "NullError";
pub const STACK_OVERFLOW: &str = "StackOverflow";
pub const MISSING_RETURN: &str = "MissingReturn";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InterpError {
    #[error("no test unit {0}")]
    UnknownUnit(TestUnit),
    #[error("instance {instance} of condition {site} was never reached")]
    InstanceNeverReached { site: NodeId, instance: usize },
}

enum Abort {
    Exception(String),
    Limit,
}

enum Flow {
    Normal,
    Return(Value),
}

fn throw<T>(name: &str) -> Result<T, Abort> {
    Err(Abort::Exception(name.to_string()))
}

/// Tree-walking interpreter with coverage and condition instrumentation.
#[derive(Debug, Clone, Copy)]
pub struct Interpreter<'p> {
    program: &'p Program,
    step_budget: u64,
}

impl<'p> Interpreter<'p> {
    pub fn new(program: &'p Program) -> Self {
        Interpreter { program, step_budget: DEFAULT_STEP_BUDGET }
    }

    pub fn with_step_budget(mut self, budget: u64) -> Self {
        self.step_budget = budget;
        self
    }

    pub fn run_test_unit(&self, unit: &TestUnit, plan: &InstrumentationPlan) -> Result<ExecutionTrace, InterpError> {
        self.run(unit, plan, None)
    }

    /// Runs `unit` with the given evaluation instance of `site` negated.
    pub fn run_with_flip(
        &self,
        unit: &TestUnit,
        site: NodeId,
        instance: usize,
        plan: &InstrumentationPlan,
    ) -> Result<ExecutionTrace, InterpError> {
        self.run(unit, plan, Some((site, instance)))
    }

    /// Every unit in file order.
    pub fn run_suite(&self, plan: &InstrumentationPlan) -> SuiteResult {
        let units = self.program.units();
        let traces =
            units.par_iter().map(|u| self.run_test_unit(u, plan).expect("units of the program exist")).collect();
        SuiteResult::from_traces(traces)
    }

    fn run(
        &self,
        unit: &TestUnit,
        plan: &InstrumentationPlan,
        flip: Option<(NodeId, usize)>,
    ) -> Result<ExecutionTrace, InterpError> {
        let test = self.program.test(&unit.test).ok_or_else(|| InterpError::UnknownUnit(unit.clone()))?;
        if unit.assertion >= test.assertions().len() {
            return Err(InterpError::UnknownUnit(unit.clone()));
        }
        let run = Run {
            program: self.program,
            plan,
            budget: self.step_budget,
            steps: 0,
            clock: 0,
            muted: false,
            in_program: false,
            depth: 0,
            flip,
            flip_done: false,
            cond_counts: HashMap::new(),
            arrival_counts: HashMap::new(),
            covered: BTreeSet::new(),
            timestamps: BTreeMap::new(),
            cond_evals: Vec::new(),
            arrivals: Vec::new(),
            last: None,
            frames: vec![vec![Vec::new()]],
        };
        // Deep MiniLang recursion needs more native stack than worker threads have.
        let failure = std::thread::scope(|scope| {
            std::thread::Builder::new()
                .stack_size(EXEC_STACK_BYTES)
                .spawn_scoped(scope, move || {
                    let mut run = run;
                    let failure = run.run_unit(test, unit.assertion);
                    (failure, run)
                })
                .expect("spawn interpreter thread")
                .join()
                .expect("interpreter thread panicked")
        });
        let (failure, run) = failure;
        if let Some((site, instance)) = flip {
            if !run.flip_done {
                return Err(InterpError::InstanceNeverReached { site, instance });
            }
        }
        Ok(ExecutionTrace {
            test_unit: unit.clone(),
            verdict: if failure.is_none() { Verdict::Pass } else { Verdict::Fail },
            failure_kind: failure,
            covered_statements: run.covered,
            timestamps: run.timestamps,
            cond_evals: run.cond_evals,
            arrivals: run.arrivals,
            last_executed_statement: run.last,
            steps: run.steps,
        })
    }
}

type Scopes = Vec<Vec<(String, Value)>>;

struct Run<'p, 'a> {
    program: &'p Program,
    plan: &'a InstrumentationPlan,
    budget: u64,
    steps: u64,
    clock: u64,
    /// Muted execution records nothing and cannot be flipped.
    muted: bool,
    in_program: bool,
    depth: usize,
    flip: Option<(NodeId, usize)>,
    flip_done: bool,
    cond_counts: HashMap<NodeId, usize>,
    arrival_counts: HashMap<NodeId, usize>,
    covered: BTreeSet<NodeId>,
    timestamps: BTreeMap<NodeId, u64>,
    cond_evals: Vec<CondEval>,
    arrivals: Vec<Arrival>,
    last: Option<NodeId>,
    frames: Vec<Scopes>,
}

impl Run<'_, '_> {
    fn recording(&self) -> bool {
        self.in_program && !self.muted
    }

    fn tick(&mut self) -> Result<(), Abort> {
        self.steps += 1;
        if self.steps > self.budget {
            Err(Abort::Limit)
        } else {
            Ok(())
        }
    }

    fn run_unit(&mut self, test: &TestCase, target: usize) -> Option<FailureKind> {
        let mut index = 0;
        for stmt in &test.body.stmts {
            if stmt.kind.is_assertion() {
                if index < target {
                    self.muted = true;
                    let outcome = self.check_assertion(stmt);
                    self.muted = false;
                    if let Err(()) = outcome {
                        return Some(FailureKind::RuntimeLimitExceeded);
                    }
                    index += 1;
                    continue;
                }
                return match self.check_assertion(stmt) {
                    Ok(failure) => failure,
                    Err(()) => Some(FailureKind::RuntimeLimitExceeded),
                };
            }
            match self.exec_stmt(stmt) {
                Ok(_) => {}
                Err(Abort::Exception(name)) => return Some(FailureKind::UnexpectedException { name }),
                Err(Abort::Limit) => return Some(FailureKind::RuntimeLimitExceeded),
            }
        }
        unreachable!("unit index checked against the assertion count")
    }

    /// `Err(())` means the step budget ran out.
    fn check_assertion(&mut self, stmt: &Stmt) -> Result<Option<FailureKind>, ()> {
        match &stmt.kind {
            StmtKind::AssertEq { expected, actual } => {
                let pair = self.eval(expected).and_then(|e| Ok((e, self.eval(actual)?)));
                match pair {
                    Ok((expected, actual)) => Ok(if runtime_eq(&expected, &actual) {
                        None
                    } else {
                        Some(FailureKind::AssertionMismatch { actual, expected })
                    }),
                    Err(Abort::Exception(name)) => Ok(Some(FailureKind::UnexpectedException { name })),
                    Err(Abort::Limit) => Err(()),
                }
            }
            StmtKind::AssertThrows { exception, expr } => match self.eval(expr) {
                Ok(_) => Ok(Some(FailureKind::MissingExpectedException)),
                Err(Abort::Exception(name)) if &name == exception => Ok(None),
                Err(Abort::Exception(name)) => Ok(Some(FailureKind::UnexpectedException { name })),
                Err(Abort::Limit) => Err(()),
            },
            _ => unreachable!("not an assertion"),
        }
    }

    fn scopes(&mut self) -> &mut Scopes {
        self.frames.last_mut().expect("frame")
    }

    fn lookup(&self, name: &str) -> &Value {
        self.frames
            .last()
            .expect("frame")
            .iter()
            .rev()
            .flat_map(|s| s.iter().rev())
            .find(|(n, _)| n == name)
            .map(|(_, v)| v)
            .expect("variables are resolved statically")
    }

    fn snapshot(&mut self, site: NodeId) -> Option<Snapshot> {
        let pseudo = self.plan.sites.get(&site)?;
        let mut env: Snapshot = BTreeMap::new();
        for scope in self.frames.last().expect("frame") {
            for (n, v) in scope {
                env.insert(n.clone(), Some(v.clone()));
            }
        }
        let saved = (self.steps, self.budget, self.muted);
        for (key, expr) in pseudo {
            self.steps = 0;
            self.budget = PSEUDO_STEP_BUDGET;
            self.muted = true;
            let v = self.eval(expr).ok();
            env.insert(key.clone(), v);
        }
        (self.steps, self.budget, self.muted) = saved;
        Some(env)
    }

    fn touch(&mut self, id: NodeId) {
        self.clock += 1;
        self.covered.insert(id);
        self.timestamps.insert(id, self.clock);
        self.last = Some(id);
    }

    fn exec_block(&mut self, b: &Block) -> Result<Flow, Abort> {
        self.scopes().push(Vec::new());
        let mut result = Ok(Flow::Normal);
        for s in &b.stmts {
            match self.exec_stmt(s) {
                Ok(Flow::Normal) => {}
                other => {
                    result = other;
                    break;
                }
            }
        }
        self.scopes().pop();
        result
    }

    fn eval_cond(&mut self, stmt: NodeId, cond: &Expr) -> Result<bool, Abort> {
        self.tick()?;
        let original = self.eval(cond)?.as_bool().expect("conditions are bool");
        if !self.recording() {
            return Ok(original);
        }
        self.touch(stmt);
        let count = self.cond_counts.entry(stmt).or_insert(0);
        let instance = *count;
        *count += 1;
        let mut outcome = original;
        if self.flip == Some((stmt, instance)) {
            outcome = !original;
            self.flip_done = true;
        }
        let env = self.snapshot(stmt).unwrap_or_default();
        self.cond_evals.push(CondEval { site: stmt, instance_index: instance, outcome, original, env });
        Ok(outcome)
    }

    fn exec_stmt(&mut self, s: &Stmt) -> Result<Flow, Abort> {
        self.tick()?;
        if self.recording() {
            self.touch(s.id);
            if self.plan.sites.contains_key(&s.id) {
                let count = self.arrival_counts.entry(s.id).or_insert(0);
                let instance = *count;
                *count += 1;
                let env = self.snapshot(s.id).unwrap_or_default();
                self.arrivals.push(Arrival { site: s.id, instance_index: instance, env });
            }
        }
        match &s.kind {
            StmtKind::Let { name, init, .. } => {
                let v = self.eval(init)?;
                self.scopes().last_mut().expect("scope").push((name.clone(), v));
            }
            StmtKind::Assign { name, value } => {
                let v = self.eval(value)?;
                let slot = self
                    .scopes()
                    .iter_mut()
                    .rev()
                    .flat_map(|s| s.iter_mut().rev())
                    .find(|(n, _)| n == name)
                    .expect("variables are resolved statically");
                slot.1 = v;
            }
            StmtKind::If { cond, then_block, else_block } => {
                if self.eval_cond(s.id, cond)? {
                    return self.exec_block(then_block);
                } else if let Some(b) = else_block {
                    return self.exec_block(b);
                }
            }
            StmtKind::While { cond, body } => {
                while self.eval_cond(s.id, cond)? {
                    if let Flow::Return(v) = self.exec_block(body)? {
                        return Ok(Flow::Return(v));
                    }
                }
            }
            StmtKind::Return(e) => return Ok(Flow::Return(self.eval(e)?)),
            StmtKind::Throw(name) => return throw(name),
            StmtKind::Expr(e) => {
                self.eval(e)?;
            }
            StmtKind::Block(b) => return self.exec_block(b),
            StmtKind::AssertEq { .. } | StmtKind::AssertThrows { .. } => {
                unreachable!("assertions only occur at the top of test bodies")
            }
        }
        Ok(Flow::Normal)
    }

    fn call(&mut self, f: &FunctionDecl, args: Vec<Value>) -> Result<Value, Abort> {
        if self.depth >= MAX_CALL_DEPTH {
            return throw(STACK_OVERFLOW);
        }
        let params = f.params.iter().map(|p| p.name.clone()).zip(args).collect();
        self.frames.push(vec![params]);
        self.depth += 1;
        let outer = std::mem::replace(&mut self.in_program, true);
        let result = self.exec_block(&f.body);
        self.in_program = outer;
        self.depth -= 1;
        self.frames.pop();
        match result? {
            Flow::Return(v) => Ok(v),
            Flow::Normal => throw(MISSING_RETURN),
        }
    }

    fn eval(&mut self, e: &Expr) -> Result<Value, Abort> {
        Ok(match &e.kind {
            ExprKind::Int(v) => Value::Int(*v),
            ExprKind::Float(v) => Value::Float(*v),
            ExprKind::Bool(b) => Value::Bool(*b),
            ExprKind::Str(s) => Value::Str(s.clone()),
            ExprKind::Null => Value::Null,
            ExprKind::Named(c) => Value::Int(c.value()),
            ExprKind::Var(name) => self.lookup(name).clone(),
            ExprKind::Paren(inner) => self.eval(inner)?,
            ExprKind::Unary(UnaryOp::Neg, inner) => match self.eval(inner)? {
                Value::Int(v) => Value::Int(v.wrapping_neg()),
                Value::Float(v) => Value::Float(-v),
                other => unreachable!("negating {other}"),
            },
            ExprKind::Unary(UnaryOp::Not, inner) => Value::Bool(!self.eval_bool(inner)?),
            ExprKind::Binary(BinaryOp::And, l, r) => Value::Bool(self.eval_bool(l)? && self.eval_bool(r)?),
            ExprKind::Binary(BinaryOp::Or, l, r) => Value::Bool(self.eval_bool(l)? || self.eval_bool(r)?),
            ExprKind::Binary(op, l, r) => {
                let a = self.eval(l)?;
                let b = self.eval(r)?;
                binary(*op, a, b)?
            }
            ExprKind::Index(base, idx) => {
                let i = match self.eval(idx)? {
                    Value::Int(i) => i,
                    other => unreachable!("index {other}"),
                };
                // Index variables in place so loops over arrays stay linear.
                let base_value;
                let array = match &base.unparen().kind {
                    ExprKind::Var(name) => self.lookup(name),
                    _ => {
                        base_value = self.eval(base)?;
                        &base_value
                    }
                };
                match array {
                    Value::Array(items) => match usize::try_from(i).ok().and_then(|i| items.get(i)) {
                        Some(v) => v.clone(),
                        None => return throw(INDEX_ERROR),
                    },
                    Value::Null => return throw(NULL_ERROR),
                    other => unreachable!("indexing {other}"),
                }
            }
            ExprKind::Field(base, field) => match self.eval(base)? {
                Value::Record(_, fields) => {
                    fields.into_iter().find(|(n, _)| n == field).map(|(_, v)| v).expect("fields are checked")
                }
                Value::Null => return throw(NULL_ERROR),
                other => unreachable!("field of {other}"),
            },
            ExprKind::Record(name, fields) => {
                let decl = self.program.record(name).expect("records are resolved");
                let mut values = Vec::with_capacity(fields.len());
                for (n, e) in fields {
                    values.push((n.clone(), self.eval(e)?));
                }
                let ordered = decl
                    .fields
                    .iter()
                    .map(|f| {
                        let i = values.iter().position(|(n, _)| n == &f.name).expect("fields are checked");
                        values[i].clone()
                    })
                    .collect();
                Value::Record(name.clone(), ordered)
            }
            ExprKind::Array(items) => {
                let mut out = Vec::with_capacity(items.len());
                for item in items {
                    out.push(self.eval(item)?);
                }
                Value::Array(out)
            }
            ExprKind::Is(inner, name) => Value::Bool(matches!(self.eval(inner)?, Value::Record(n, _) if &n == name)),
            ExprKind::Call(name, args) => {
                let mut values = Vec::with_capacity(args.len());
                for a in args {
                    values.push(self.eval(a)?);
                }
                if resolves_to_builtin(self.program, name) {
                    builtin(name, values)?
                } else {
                    let f = self.program.function(name).expect("calls are resolved");
                    self.call(f, values)?
                }
            }
        })
    }

    fn eval_bool(&mut self, e: &Expr) -> Result<bool, Abort> {
        Ok(self.eval(e)?.as_bool().expect("bool operand"))
    }
}

/// `==` on runtime values: structural, with IEEE float comparison.
pub fn runtime_eq(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Float(x), Value::Float(y)) => x == y,
        (Value::Array(x), Value::Array(y)) => x.len() == y.len() && x.iter().zip(y).all(|(p, q)| runtime_eq(p, q)),
        (Value::Record(n, x), Value::Record(m, y)) => {
            n == m && x.iter().zip(y).all(|((_, p), (_, q))| runtime_eq(p, q))
        }
        _ => a == b,
    }
}

fn binary(op: BinaryOp, a: Value, b: Value) -> Result<Value, Abort> {
    use BinaryOp::*;
    Ok(match (op, &a, &b) {
        (Eq, _, _) => Value::Bool(runtime_eq(&a, &b)),
        (Ne, _, _) => Value::Bool(!runtime_eq(&a, &b)),
        (_, Value::Int(x), Value::Int(y)) => {
            let (x, y) = (*x, *y);
            match op {
                Add => Value::Int(x.wrapping_add(y)),
                Sub => Value::Int(x.wrapping_sub(y)),
                Mul => Value::Int(x.wrapping_mul(y)),
                Div if y == 0 => return throw(DIV_BY_ZERO),
                Div => Value::Int(x.wrapping_div(y)),
                Rem if y == 0 => return throw(DIV_BY_ZERO),
                Rem => Value::Int(x.wrapping_rem(y)),
                Lt => Value::Bool(x < y),
                Le => Value::Bool(x <= y),
                Gt => Value::Bool(x > y),
                Ge => Value::Bool(x >= y),
                _ => unreachable!(),
            }
        }
        (_, Value::Float(x), Value::Float(y)) => {
            let (x, y) = (*x, *y);
            match op {
                Add => Value::Float(x + y),
                Sub => Value::Float(x - y),
                Mul => Value::Float(x * y),
                Div => Value::Float(x / y),
                Rem => Value::Float(x % y),
                Lt => Value::Bool(x < y),
                Le => Value::Bool(x <= y),
                Gt => Value::Bool(x > y),
                Ge => Value::Bool(x >= y),
                _ => unreachable!(),
            }
        }
        _ => unreachable!("operands checked statically: {a} {} {b}", op.symbol()),
    })
}

fn builtin(name: &str, args: Vec<Value>) -> Result<Value, Abort> {
    Ok(match (name, args.as_slice()) {
        ("len", [Value::Array(items)]) => Value::Int(items.len() as i64),
        ("len", [Value::Str(s)]) => Value::Int(s.chars().count() as i64),
        ("len", [Value::Null]) => return throw(NULL_ERROR),
        ("equals", [a, b]) => Value::Bool(runtime_eq(a, b)),
        ("starts_with", [Value::Str(s), Value::Str(p)]) => Value::Bool(s.starts_with(p.as_str())),
        ("starts_with", _) => return throw(NULL_ERROR),
        ("abs", [Value::Int(v)]) => Value::Int(v.wrapping_abs()),
        ("abs", [Value::Float(v)]) => Value::Float(v.abs()),
        ("min", [Value::Int(a), Value::Int(b)]) => Value::Int(*a.min(b)),
        ("max", [Value::Int(a), Value::Int(b)]) => Value::Int(*a.max(b)),
        ("min", [Value::Float(a), Value::Float(b)]) => Value::Float(a.min(*b)),
        ("max", [Value::Float(a), Value::Float(b)]) => Value::Float(a.max(*b)),
        _ => unreachable!("builtin {name} checked statically"),
    })
}
