//! Name resolution and static typing.

use std::collections::{BTreeMap, HashSet};

use super::ast::*;
use super::LangError;

pub const BUILTINS: &[&str] = &["len", "equals", "starts_with", "abs", "min", "max"];

pub fn is_builtin(name: &str) -> bool {
    BUILTINS.contains(&name)
}

/// Builtins are shadowed by program functions of the same name.
pub fn resolves_to_builtin(program: &Program, name: &str) -> bool {
    is_builtin(name) && program.function(name).is_none()
}

/// Lexical scopes of one function or test body.
#[derive(Debug, Clone, Default)]
pub struct Scope {
    frames: Vec<Vec<(String, Type)>>,
}

impl Scope {
    pub fn new() -> Self {
        Scope { frames: vec![Vec::new()] }
    }

    pub fn push(&mut self) {
        self.frames.push(Vec::new());
    }

    pub fn pop(&mut self) {
        self.frames.pop();
    }

    pub fn lookup(&self, name: &str) -> Option<&Type> {
        self.frames.iter().rev().flat_map(|f| f.iter()).find(|(n, _)| n == name).map(|(_, t)| t)
    }

    pub fn declare(&mut self, name: &str, ty: Type) -> bool {
        if self.lookup(name).is_some() {
            return false;
        }
        self.frames.last_mut().expect("scope frame").push((name.to_string(), ty));
        true
    }

    /// Visible variables, outermost first.
    pub fn visible(&self) -> impl Iterator<Item = &(String, Type)> {
        self.frames.iter().flat_map(|f| f.iter())
    }

    pub fn from_map(vars: &BTreeMap<String, Type>) -> Self {
        let mut s = Scope::new();
        for (n, t) in vars {
            s.declare(n, t.clone());
        }
        s
    }
}

pub struct Checker<'p> {
    program: &'p Program,
}

impl<'p> Checker<'p> {
    pub fn new(program: &'p Program) -> Self {
        Checker { program }
    }

    fn pos(&self, id: NodeId) -> Pos {
        self.program.spans.get(&id).copied().unwrap_or(Pos { line: 0, col: 0 })
    }

    fn resolve_err(&self, id: NodeId, msg: impl Into<String>) -> LangError {
        LangError::Resolve { pos: self.pos(id), message: msg.into() }
    }

    fn type_err(&self, id: NodeId, msg: impl Into<String>) -> LangError {
        LangError::Type { pos: self.pos(id), message: msg.into() }
    }

    pub fn check_program(&self) -> Result<(), LangError> {
        let p = self.program;
        let mut seen = HashSet::new();
        for r in &p.records {
            if !seen.insert(r.name.as_str()) {
                return Err(self.resolve_err(r.id, format!("duplicate record `{}`", r.name)));
            }
            let mut fields = HashSet::new();
            for f in &r.fields {
                if !fields.insert(f.name.as_str()) {
                    return Err(self.type_err(r.id, format!("duplicate field `{}`", f.name)));
                }
                self.check_type_exists(r.id, &f.ty)?;
            }
        }
        let mut seen = HashSet::new();
        for f in &p.functions {
            if !seen.insert(f.name.as_str()) {
                return Err(self.resolve_err(f.id, format!("duplicate function `{}`", f.name)));
            }
        }
        for f in &p.functions {
            self.check_function(f)?;
        }
        let mut seen = HashSet::new();
        for t in &p.tests {
            if !seen.insert(t.name.as_str()) {
                return Err(self.resolve_err(t.id, format!("duplicate test `{}`", t.name)));
            }
            self.check_test(t)?;
        }
        Ok(())
    }

    fn check_type_exists(&self, at: NodeId, ty: &Type) -> Result<(), LangError> {
        match ty {
            Type::Record(name) if self.program.record(name).is_none() => {
                Err(self.resolve_err(at, format!("unknown type `{name}`")))
            }
            Type::Array(inner) => self.check_type_exists(at, inner),
            _ => Ok(()),
        }
    }

    fn check_function(&self, f: &FunctionDecl) -> Result<(), LangError> {
        self.check_type_exists(f.id, &f.ret)?;
        let mut scope = Scope::new();
        for param in &f.params {
            self.check_type_exists(f.id, &param.ty)?;
            if !scope.declare(&param.name, param.ty.clone()) {
                return Err(self.type_err(f.id, format!("duplicate parameter `{}`", param.name)));
            }
        }
        self.check_block(&f.body, &mut scope, Some(&f.ret))
    }

    fn check_test(&self, t: &TestCase) -> Result<(), LangError> {
        let mut scope = Scope::new();
        for stmt in &t.body.stmts {
            match &stmt.kind {
                StmtKind::Let { .. } | StmtKind::Assign { .. } | StmtKind::Expr(_) => {}
                StmtKind::AssertEq { .. } | StmtKind::AssertThrows { .. } => {}
                _ => {
                    return Err(self.type_err(
                        stmt.id,
                        "test bodies may only contain let, assignment, expression and assertion statements",
                    ))
                }
            }
            self.check_stmt(stmt, &mut scope, None)?;
        }
        Ok(())
    }

    fn check_block(&self, b: &Block, scope: &mut Scope, ret: Option<&Type>) -> Result<(), LangError> {
        scope.push();
        let result = b.stmts.iter().try_for_each(|s| self.check_stmt(s, scope, ret));
        scope.pop();
        result
    }

    pub fn check_stmt(&self, s: &Stmt, scope: &mut Scope, ret: Option<&Type>) -> Result<(), LangError> {
        match &s.kind {
            StmtKind::Let { name, ty, init } => {
                self.check_type_exists(s.id, ty)?;
                let t = self.type_of(init, scope)?;
                if !ty.accepts(&t) {
                    return Err(self.type_err(s.id, format!("`{name}` declared {ty} but initialized with {t}")));
                }
                if !scope.declare(name, ty.clone()) {
                    return Err(self.type_err(s.id, format!("`{name}` is already declared")));
                }
            }
            StmtKind::Assign { name, value } => {
                let Some(target) = scope.lookup(name).cloned() else {
                    return Err(self.resolve_err(s.id, format!("unknown variable `{name}`")));
                };
                let t = self.type_of(value, scope)?;
                if !target.accepts(&t) {
                    return Err(self.type_err(s.id, format!("cannot assign {t} to `{name}`: {target}")));
                }
            }
            StmtKind::If { cond, then_block, else_block } => {
                self.expect(cond, scope, &Type::Bool)?;
                self.check_block(then_block, scope, ret)?;
                if let Some(b) = else_block {
                    self.check_block(b, scope, ret)?;
                }
            }
            StmtKind::While { cond, body } => {
                self.expect(cond, scope, &Type::Bool)?;
                self.check_block(body, scope, ret)?;
            }
            StmtKind::Return(e) => {
                let Some(ret) = ret else {
                    return Err(self.type_err(s.id, "`return` outside a function"));
                };
                let t = self.type_of(e, scope)?;
                if !ret.accepts(&t) {
                    return Err(self.type_err(s.id, format!("returns {t}, function returns {ret}")));
                }
            }
            StmtKind::Throw(_) => {}
            StmtKind::Expr(e) => {
                self.type_of(e, scope)?;
            }
            StmtKind::Block(b) => self.check_block(b, scope, ret)?,
            StmtKind::AssertEq { expected, actual } => {
                if ret.is_some() {
                    return Err(self.type_err(s.id, "assertions are only allowed in tests"));
                }
                let te = self.type_of(expected, scope)?;
                let ta = self.type_of(actual, scope)?;
                if !te.accepts(&ta) && !ta.accepts(&te) {
                    return Err(self.type_err(s.id, format!("assert_eq compares {te} with {ta}")));
                }
            }
            StmtKind::AssertThrows { expr, .. } => {
                if ret.is_some() {
                    return Err(self.type_err(s.id, "assertions are only allowed in tests"));
                }
                self.type_of(expr, scope)?;
            }
        }
        Ok(())
    }

    fn expect(&self, e: &Expr, scope: &Scope, want: &Type) -> Result<(), LangError> {
        let t = self.type_of(e, scope)?;
        if want.accepts(&t) {
            Ok(())
        } else {
            Err(self.type_err(e.id, format!("expected {want}, found {t}")))
        }
    }

    pub fn type_of(&self, e: &Expr, scope: &Scope) -> Result<Type, LangError> {
        Ok(match &e.kind {
            ExprKind::Int(_) | ExprKind::Named(_) => Type::Int,
            ExprKind::Float(_) => Type::Float,
            ExprKind::Bool(_) => Type::Bool,
            ExprKind::Str(_) => Type::Str,
            ExprKind::Null => Type::Null,
            ExprKind::Var(name) => match scope.lookup(name) {
                Some(t) => t.clone(),
                None => return Err(self.resolve_err(e.id, format!("unknown variable `{name}`"))),
            },
            ExprKind::Paren(inner) => self.type_of(inner, scope)?,
            ExprKind::Unary(UnaryOp::Neg, inner) => {
                let t = self.type_of(inner, scope)?;
                if !t.is_numeric() {
                    return Err(self.type_err(e.id, format!("cannot negate {t}")));
                }
                t
            }
            ExprKind::Unary(UnaryOp::Not, inner) => {
                self.expect(inner, scope, &Type::Bool)?;
                Type::Bool
            }
            ExprKind::Binary(op, l, r) => {
                let tl = self.type_of(l, scope)?;
                let tr = self.type_of(r, scope)?;
                match op {
                    BinaryOp::And | BinaryOp::Or => {
                        if tl != Type::Bool || tr != Type::Bool {
                            return Err(self.type_err(e.id, format!("`{}` needs bool operands", op.symbol())));
                        }
                        Type::Bool
                    }
                    BinaryOp::Eq | BinaryOp::Ne => {
                        if !tl.accepts(&tr) && !tr.accepts(&tl) {
                            return Err(self.type_err(e.id, format!("cannot compare {tl} with {tr}")));
                        }
                        Type::Bool
                    }
                    BinaryOp::Lt | BinaryOp::Le | BinaryOp::Gt | BinaryOp::Ge => {
                        if !tl.is_numeric() || tl != tr {
                            return Err(self.type_err(e.id, format!("cannot order {tl} against {tr}")));
                        }
                        Type::Bool
                    }
                    _ => {
                        if !tl.is_numeric() || tl != tr {
                            return Err(self.type_err(
                                e.id,
                                format!("`{}` needs matching numeric operands, found {tl} and {tr}", op.symbol()),
                            ));
                        }
                        tl
                    }
                }
            }
            ExprKind::Index(base, idx) => {
                let tb = self.type_of(base, scope)?;
                self.expect(idx, scope, &Type::Int)?;
                match tb {
                    Type::Array(elem) => *elem,
                    other => return Err(self.type_err(e.id, format!("cannot index {other}"))),
                }
            }
            ExprKind::Field(base, field) => {
                let tb = self.type_of(base, scope)?;
                let Type::Record(rname) = &tb else {
                    return Err(self.type_err(e.id, format!("{tb} has no fields")));
                };
                let rec = self.program.record(rname).expect("record types are resolved");
                match rec.fields.iter().find(|f| &f.name == field) {
                    Some(f) => f.ty.clone(),
                    None => return Err(self.type_err(e.id, format!("record {rname} has no field `{field}`"))),
                }
            }
            ExprKind::Record(name, fields) => {
                let Some(rec) = self.program.record(name) else {
                    return Err(self.resolve_err(e.id, format!("unknown record `{name}`")));
                };
                if fields.len() != rec.fields.len() {
                    return Err(self.type_err(e.id, format!("record {name} needs {} fields", rec.fields.len())));
                }
                for decl in &rec.fields {
                    let Some((_, value)) = fields.iter().find(|(n, _)| n == &decl.name) else {
                        return Err(self.type_err(e.id, format!("missing field `{}`", decl.name)));
                    };
                    self.expect(value, scope, &decl.ty)?;
                }
                Type::Record(name.clone())
            }
            ExprKind::Array(items) => {
                let mut elem: Option<Type> = None;
                for item in items {
                    let t = self.type_of(item, scope)?;
                    match &elem {
                        None if t != Type::Null => elem = Some(t),
                        Some(et) if !et.accepts(&t) => {
                            return Err(self.type_err(e.id, format!("array mixes {et} and {t}")))
                        }
                        _ => {}
                    }
                }
                match elem {
                    Some(t) => Type::Array(Box::new(t)),
                    None => return Err(self.type_err(e.id, "cannot infer array element type")),
                }
            }
            ExprKind::Is(inner, name) => {
                if self.program.record(name).is_none() {
                    return Err(self.resolve_err(e.id, format!("unknown record `{name}`")));
                }
                let t = self.type_of(inner, scope)?;
                if !matches!(t, Type::Record(_) | Type::Null) {
                    return Err(self.type_err(e.id, format!("`is` needs a record operand, found {t}")));
                }
                Type::Bool
            }
            ExprKind::Call(name, args) => {
                let arg_types = args.iter().map(|a| self.type_of(a, scope)).collect::<Result<Vec<_>, _>>()?;
                let Some(f) = self.program.function(name) else {
                    if is_builtin(name) {
                        return self.builtin_type(e.id, name, &arg_types);
                    }
                    return Err(self.resolve_err(e.id, format!("unknown function `{name}`")));
                };
                if f.params.len() != args.len() {
                    return Err(self
                        .type_err(e.id, format!("`{name}` takes {} arguments, {} given", f.params.len(), args.len())));
                }
                for (p, t) in f.params.iter().zip(&arg_types) {
                    if !p.ty.accepts(t) {
                        return Err(
                            self.type_err(e.id, format!("`{name}` parameter `{}` is {}, got {t}", p.name, p.ty))
                        );
                    }
                }
                f.ret.clone()
            }
        })
    }

    fn builtin_type(&self, id: NodeId, name: &str, args: &[Type]) -> Result<Type, LangError> {
        let bad = || self.type_err(id, format!("bad arguments to `{name}`: {args:?}"));
        match (name, args) {
            ("len", [Type::Array(_) | Type::Str]) => Ok(Type::Int),
            ("equals", [a, b]) if a.is_reference() && (a.accepts(b) || b.accepts(a)) => Ok(Type::Bool),
            ("starts_with", [Type::Str, Type::Str]) => Ok(Type::Bool),
            ("abs", [t]) if t.is_numeric() => Ok(t.clone()),
            ("min" | "max", [a, b]) if a.is_numeric() && a == b => Ok(a.clone()),
            _ => Err(bad()),
        }
    }
}

/// Static type of `e` under the given variable bindings.
pub fn type_of(program: &Program, vars: &BTreeMap<String, Type>, e: &Expr) -> Result<Type, LangError> {
    Checker::new(program).type_of(e, &Scope::from_map(vars))
}
