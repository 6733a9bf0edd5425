//! MiniLang syntax tree.
//!
//! Every statement and expression carries a [`NodeId`]. Ids are assigned in
//! pre-order over records, then functions, then tests, so two parses of the
//! same text always agree. Nodes synthesized by a patch get fresh ids above
//! the current maximum and never disturb existing ones.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Int,
    Float,
    Bool,
    Str,
    Array(Box<Type>),
    Record(String),
    /// Type of the `null` literal; never written in source.
    Null,
}

impl Type {
    /// Types whose values may be `null`.
    pub fn is_reference(&self) -> bool {
        matches!(self, Type::Str | Type::Array(_) | Type::Record(_) | Type::Null)
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Type::Int | Type::Float)
    }

    /// Whether a value of type `other` may be stored where `self` is expected.
    pub fn accepts(&self, other: &Type) -> bool {
        self == other || (*other == Type::Null && self.is_reference())
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Int => f.write_str("int"),
            Type::Float => f.write_str("float"),
            Type::Bool => f.write_str("bool"),
            Type::Str => f.write_str("string"),
            Type::Array(elem) => write!(f, "{elem}[]"),
            Type::Record(name) => f.write_str(name),
            Type::Null => f.write_str("null"),
        }
    }
}

impl FromStr for Type {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(inner) = s.strip_suffix("[]") {
            return Ok(Type::Array(Box::new(inner.parse()?)));
        }
        Ok(match s {
            "int" => Type::Int,
            "float" => Type::Float,
            "bool" => Type::Bool,
            "string" => Type::Str,
            "null" => Type::Null,
            name if !name.is_empty()
                && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
                && !name.starts_with(|c: char| c.is_ascii_digit()) =>
            {
                Type::Record(name.to_string())
            }
            other => return Err(format!("not a type: `{other}`")),
        })
    }
}

impl Serialize for Type {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Type {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NamedConst {
    MinInt,
    MaxInt,
}

impl NamedConst {
    pub fn value(self) -> i64 {
        match self {
            NamedConst::MinInt => i64::MIN,
            NamedConst::MaxInt => i64::MAX,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            NamedConst::MinInt => "MIN_INT",
            NamedConst::MaxInt => "MAX_INT",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Rem => "%",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::And => "&&",
            BinaryOp::Or => "||",
        }
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinaryOp::Or => 1,
            BinaryOp::And => 2,
            BinaryOp::Eq | BinaryOp::Ne => 3,
            BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => 4,
            BinaryOp::Add | BinaryOp::Sub => 5,
            BinaryOp::Mul | BinaryOp::Div | BinaryOp::Rem => 6,
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(self, BinaryOp::Eq | BinaryOp::Ne | BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge)
    }

    /// The operator obtained by swapping operands: `a < b` is `b > a`.
    pub fn mirrored(self) -> BinaryOp {
        match self {
            BinaryOp::Lt => BinaryOp::Gt,
            BinaryOp::Le => BinaryOp::Ge,
            BinaryOp::Gt => BinaryOp::Lt,
            BinaryOp::Ge => BinaryOp::Le,
            other => other,
        }
    }
}

/// Precedence of `is` tests, between comparisons and arithmetic.
pub const IS_PRECEDENCE: u8 = 4;
/// Precedence of prefix operators.
pub const UNARY_PRECEDENCE: u8 = 7;
/// Precedence of atoms and postfix forms.
pub const ATOM_PRECEDENCE: u8 = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub id: NodeId,
    pub kind: ExprKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Int(i64),
    Float(f64),
    Bool(bool),
    Str(String),
    Null,
    Named(NamedConst),
    Var(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Call(String, Vec<Expr>),
    Index(Box<Expr>, Box<Expr>),
    Field(Box<Expr>, String),
    Record(String, Vec<(String, Expr)>),
    Array(Vec<Expr>),
    Is(Box<Expr>, String),
    Paren(Box<Expr>),
}

impl Expr {
    pub fn new(id: NodeId, kind: ExprKind) -> Self {
        Expr { id, kind }
    }

    /// Binding strength of this expression's outermost operator.
    pub fn precedence(&self) -> u8 {
        match &self.kind {
            ExprKind::Binary(op, ..) => op.precedence(),
            ExprKind::Is(..) => IS_PRECEDENCE,
            ExprKind::Unary(..) => UNARY_PRECEDENCE,
            ExprKind::Int(v) if *v < 0 => UNARY_PRECEDENCE,
            ExprKind::Float(v) if v.is_sign_negative() => UNARY_PRECEDENCE,
            _ => ATOM_PRECEDENCE,
        }
    }

    /// Strips any number of redundant parentheses.
    pub fn unparen(&self) -> &Expr {
        let mut e = self;
        while let ExprKind::Paren(inner) = &e.kind {
            e = inner;
        }
        e
    }

    pub fn as_var(&self) -> Option<&str> {
        match &self.unparen().kind {
            ExprKind::Var(name) => Some(name),
            _ => None,
        }
    }

    /// Visits this expression and every sub-expression in pre-order.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match &self.kind {
            ExprKind::Unary(_, e) | ExprKind::Field(e, _) | ExprKind::Is(e, _) | ExprKind::Paren(e) => e.walk(f),
            ExprKind::Binary(_, l, r) | ExprKind::Index(l, r) => {
                l.walk(f);
                r.walk(f);
            }
            ExprKind::Call(_, args) | ExprKind::Array(args) => args.iter().for_each(|a| a.walk(f)),
            ExprKind::Record(_, fields) => fields.iter().for_each(|(_, e)| e.walk(f)),
            _ => {}
        }
    }

    pub fn walk_mut(&mut self, f: &mut impl FnMut(&mut Expr)) {
        f(self);
        match &mut self.kind {
            ExprKind::Unary(_, e) | ExprKind::Field(e, _) | ExprKind::Is(e, _) | ExprKind::Paren(e) => e.walk_mut(f),
            ExprKind::Binary(_, l, r) | ExprKind::Index(l, r) => {
                l.walk_mut(f);
                r.walk_mut(f);
            }
            ExprKind::Call(_, args) | ExprKind::Array(args) => args.iter_mut().for_each(|a| a.walk_mut(f)),
            ExprKind::Record(_, fields) => fields.iter_mut().for_each(|(_, e)| e.walk_mut(f)),
            _ => {}
        }
    }

    /// Distinct variable names referenced, in first-occurrence order.
    pub fn variables(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        self.walk(&mut |e| {
            if let ExprKind::Var(name) = &e.kind {
                if !out.iter().any(|n| n == name) {
                    out.push(name.clone());
                }
            }
        });
        out
    }

    pub fn contains_call(&self) -> bool {
        let mut found = false;
        self.walk(&mut |e| found |= matches!(e.kind, ExprKind::Call(..)));
        found
    }

    /// Equality ignoring node ids.
    pub fn same_shape(&self, other: &Expr) -> bool {
        let mut a = self.clone();
        let mut b = other.clone();
        a.walk_mut(&mut |e| e.id = NodeId(0));
        b.walk_mut(&mut |e| e.id = NodeId(0));
        a == b
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Block {
    pub stmts: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub id: NodeId,
    pub kind: StmtKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Let {
        name: String,
        ty: Type,
        init: Expr,
    },
    Assign {
        name: String,
        value: Expr,
    },
    If {
        cond: Expr,
        then_block: Block,
        else_block: Option<Block>,
    },
    While {
        cond: Expr,
        body: Block,
    },
    Return(Expr),
    Throw(String),
    Expr(Expr),
    Block(Block),
    /// `assert_eq(expected, actual);`, allowed only in test bodies.
    AssertEq {
        expected: Expr,
        actual: Expr,
    },
    /// `assert_throws(Exc, expr);`, allowed only in test bodies.
    AssertThrows {
        exception: String,
        expr: Expr,
    },
}

impl StmtKind {
    pub fn is_assertion(&self) -> bool {
        matches!(self, StmtKind::AssertEq { .. } | StmtKind::AssertThrows { .. })
    }
}

impl Stmt {
    /// The condition of an `if` or `while`.
    pub fn condition(&self) -> Option<&Expr> {
        match &self.kind {
            StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => Some(cond),
            _ => None,
        }
    }

    /// Child blocks in source order.
    pub fn blocks(&self) -> Vec<&Block> {
        match &self.kind {
            StmtKind::If { then_block, else_block, .. } => {
                let mut v = vec![then_block];
                v.extend(else_block.iter());
                v
            }
            StmtKind::While { body, .. } | StmtKind::Block(body) => vec![body],
            _ => Vec::new(),
        }
    }

    /// Expressions directly owned by this statement, in source order.
    pub fn exprs(&self) -> Vec<&Expr> {
        match &self.kind {
            StmtKind::Let { init, .. } => vec![init],
            StmtKind::Assign { value, .. } => vec![value],
            StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => vec![cond],
            StmtKind::Return(e) | StmtKind::Expr(e) => vec![e],
            StmtKind::AssertEq { expected, actual } => vec![expected, actual],
            StmtKind::AssertThrows { expr, .. } => vec![expr],
            StmtKind::Throw(_) | StmtKind::Block(_) => Vec::new(),
        }
    }

    /// The variable this statement declares or assigns, if any.
    pub fn defined_variable(&self) -> Option<&str> {
        match &self.kind {
            StmtKind::Let { name, .. } | StmtKind::Assign { name, .. } => Some(name),
            _ => None,
        }
    }
}

impl Block {
    /// Visits every statement in pre-order, descending into nested blocks.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Stmt)) {
        for stmt in &self.stmts {
            f(stmt);
            for block in stmt.blocks() {
                block.walk(f);
            }
        }
    }

    pub fn find(&self, id: NodeId) -> Option<&Stmt> {
        let mut found = None;
        self.walk(&mut |s| {
            if s.id == id && found.is_none() {
                found = Some(s);
            }
        });
        found
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.find(id).is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub ty: Type,
}

/// Raw text between `/**` and `*/`.
#[derive(Debug, Clone, PartialEq)]
pub struct DocComment {
    pub text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionDecl {
    pub id: NodeId,
    pub name: String,
    pub params: Vec<Param>,
    pub ret: Type,
    pub body: Block,
    pub doc: Option<DocComment>,
}

impl FunctionDecl {
    /// Statements of the body in pre-order.
    pub fn statements(&self) -> Vec<&Stmt> {
        let mut out = Vec::new();
        self.body.walk(&mut |s| out.push(s));
        out
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.body.contains(id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecordDecl {
    pub id: NodeId,
    pub name: String,
    pub fields: Vec<Param>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestCase {
    pub id: NodeId,
    pub name: String,
    pub body: Block,
}

impl TestCase {
    /// Assertion statements in order; a unit's index points into this list.
    pub fn assertions(&self) -> Vec<&Stmt> {
        self.body.stmts.iter().filter(|s| s.kind.is_assertion()).collect()
    }
}

/// One assertion of one test: the granularity at which tests pass or fail.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TestUnit {
    pub test: String,
    pub assertion: usize,
}

impl fmt::Display for TestUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.test, self.assertion)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Program {
    pub source_name: String,
    pub records: Vec<RecordDecl>,
    pub functions: Vec<FunctionDecl>,
    pub tests: Vec<TestCase>,
    /// Source positions of parsed nodes; synthesized nodes have none.
    pub spans: BTreeMap<NodeId, Pos>,
    pub(crate) next_id: u32,
}

impl PartialEq for Program {
    /// Structural equality; source names and positions are ignored.
    fn eq(&self, other: &Self) -> bool {
        self.records == other.records && self.functions == other.functions && self.tests == other.tests
    }
}

impl Program {
    pub fn function(&self, name: &str) -> Option<&FunctionDecl> {
        self.functions.iter().find(|f| f.name == name)
    }

    pub fn record(&self, name: &str) -> Option<&RecordDecl> {
        self.records.iter().find(|r| r.name == name)
    }

    pub fn test(&self, name: &str) -> Option<&TestCase> {
        self.tests.iter().find(|t| t.name == name)
    }

    /// All assertion units in file order.
    pub fn units(&self) -> Vec<TestUnit> {
        self.tests
            .iter()
            .flat_map(|t| (0..t.assertions().len()).map(move |i| TestUnit { test: t.name.clone(), assertion: i }))
            .collect()
    }

    /// The function whose body contains statement `id`.
    pub fn function_containing(&self, id: NodeId) -> Option<&FunctionDecl> {
        self.functions.iter().find(|f| f.contains(id))
    }

    /// Every statement of every function, in pre-order.
    pub fn statements(&self) -> Vec<&Stmt> {
        self.functions.iter().flat_map(|f| f.statements()).collect()
    }

    pub fn find_stmt(&self, id: NodeId) -> Option<&Stmt> {
        self.functions.iter().find_map(|f| f.body.find(id))
    }

    pub fn fresh_id(&mut self) -> NodeId {
        let id = NodeId(self.next_id);
        self.next_id += 1;
        id
    }

    /// Copy of the program with ids reassigned in canonical pre-order.
    pub fn renumbered(&self) -> Program {
        let mut p = self.clone();
        p.spans.clear();
        let mut counter = 0u32;
        renumber_program(&mut p, &mut |_| {
            counter += 1;
            NodeId(counter - 1)
        });
        p.next_id = counter;
        p
    }
}

/// Reassigns every id in pre-order; `next` receives the old id.
pub(crate) fn renumber_program(p: &mut Program, next: &mut impl FnMut(NodeId) -> NodeId) {
    for r in &mut p.records {
        r.id = next(r.id);
    }
    for f in &mut p.functions {
        f.id = next(f.id);
        renumber_block(&mut f.body, next);
    }
    for t in &mut p.tests {
        t.id = next(t.id);
        renumber_block(&mut t.body, next);
    }
}

pub(crate) fn renumber_block(block: &mut Block, next: &mut impl FnMut(NodeId) -> NodeId) {
    for stmt in &mut block.stmts {
        renumber_stmt(stmt, next);
    }
}

pub(crate) fn renumber_stmt(stmt: &mut Stmt, next: &mut impl FnMut(NodeId) -> NodeId) {
    stmt.id = next(stmt.id);
    match &mut stmt.kind {
        StmtKind::Let { init: e, .. }
        | StmtKind::Assign { value: e, .. }
        | StmtKind::Return(e)
        | StmtKind::Expr(e)
        | StmtKind::AssertThrows { expr: e, .. } => renumber_expr(e, next),
        StmtKind::If { cond, then_block, else_block } => {
            renumber_expr(cond, next);
            renumber_block(then_block, next);
            if let Some(b) = else_block {
                renumber_block(b, next);
            }
        }
        StmtKind::While { cond, body } => {
            renumber_expr(cond, next);
            renumber_block(body, next);
        }
        StmtKind::Block(b) => renumber_block(b, next),
        StmtKind::AssertEq { expected, actual } => {
            renumber_expr(expected, next);
            renumber_expr(actual, next);
        }
        StmtKind::Throw(_) => {}
    }
}

pub(crate) fn renumber_expr(expr: &mut Expr, next: &mut impl FnMut(NodeId) -> NodeId) {
    expr.walk_mut(&mut |e| e.id = next(e.id));
}
