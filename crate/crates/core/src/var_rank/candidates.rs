use std::collections::BTreeMap;

use serde::Serialize;

use crate::lang::typecheck::type_of;
use crate::lang::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CandidateKind {
    Param,
    Local,
    CondExpr,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Candidate {
    pub kind: CandidateKind,
    /// Variable name, or the printed expression for pseudo-variables; also
    /// the key of the candidate in snapshots.
    pub name: String,
    #[serde(skip)]
    pub expr: Option<Expr>,
    pub static_type: Type,
    /// Declaring `let`, or the conditional a pseudo-variable came from.
    pub decl_site: Option<NodeId>,
}

impl Candidate {
    pub fn is_variable(&self) -> bool {
        self.kind != CandidateKind::CondExpr
    }

    /// Variables the candidate reads.
    pub fn variables(&self) -> Vec<String> {
        match &self.expr {
            Some(e) => e.variables(),
            None => vec![self.name.clone()],
        }
    }

    /// The expression standing for this candidate inside a condition.
    pub fn as_expr(&self) -> Expr {
        match &self.expr {
            Some(e) => e.clone(),
            None => Expr::new(NodeId(0), ExprKind::Var(self.name.clone())),
        }
    }
}

/// Locals visible just before `site`, in declaration order, with their
/// declaring statements.
pub fn locals_in_scope(method: &FunctionDecl, site: NodeId) -> Option<Vec<(String, Type, NodeId)>> {
    fn walk(block: &Block, site: NodeId, visible: &mut Vec<(String, Type, NodeId)>) -> bool {
        let mark = visible.len();
        for stmt in &block.stmts {
            if stmt.id == site {
                return true;
            }
            for b in stmt.blocks() {
                if walk(b, site, visible) {
                    return true;
                }
            }
            if let StmtKind::Let { name, ty, .. } = &stmt.kind {
                visible.push((name.clone(), ty.clone(), stmt.id));
            }
        }
        visible.truncate(mark);
        false
    }
    let mut visible = Vec::new();
    walk(&method.body, site, &mut visible).then_some(visible)
}

/// Operands of comparisons and other atoms below `&&`, `||` and `!`.
pub fn condition_atoms(cond: &Expr) -> Vec<&Expr> {
    let mut out = Vec::new();
    fn go<'a>(e: &'a Expr, out: &mut Vec<&'a Expr>) {
        let e = e.unparen();
        match &e.kind {
            ExprKind::Binary(BinaryOp::And | BinaryOp::Or, l, r) => {
                go(l, out);
                go(r, out);
            }
            ExprKind::Unary(UnaryOp::Not, inner) => go(inner, out),
            ExprKind::Binary(op, l, r) if op.is_comparison() => {
                out.push(l.unparen());
                out.push(r.unparen());
            }
            _ => out.push(e),
        }
    }
    go(cond, &mut out);
    out
}

/// Params, then locals in scope at `site`, then expressions harvested from
/// the method's conditions whose variables are all in scope.
pub fn collect_candidates(program: &Program, method: &FunctionDecl, site: NodeId) -> Vec<Candidate> {
    let mut out: Vec<Candidate> = method
        .params
        .iter()
        .map(|p| Candidate {
            kind: CandidateKind::Param,
            name: p.name.clone(),
            expr: None,
            static_type: p.ty.clone(),
            decl_site: None,
        })
        .collect();
    let locals = locals_in_scope(method, site).unwrap_or_default();
    out.extend(locals.iter().map(|(name, ty, id)| Candidate {
        kind: CandidateKind::Local,
        name: name.clone(),
        expr: None,
        static_type: ty.clone(),
        decl_site: Some(*id),
    }));
    let scope: BTreeMap<String, Type> = out.iter().map(|c| (c.name.clone(), c.static_type.clone())).collect();
    for stmt in method.statements() {
        let Some(cond) = stmt.condition() else { continue };
        for atom in condition_atoms(cond) {
            let vars = atom.variables();
            if vars.is_empty() || atom.as_var().is_some() || !vars.iter().all(|v| scope.contains_key(v)) {
                continue;
            }
            let text = print_expr(atom);
            if out.iter().any(|c| c.name == text) {
                continue;
            }
            let Ok(ty) = type_of(program, &scope, atom) else { continue };
            out.push(Candidate {
                kind: CandidateKind::CondExpr,
                name: text,
                expr: Some(atom.clone()),
                static_type: ty,
                decl_site: Some(stmt.id),
            });
        }
    }
    out
}

/// Pseudo-variables of `candidates`, in the form an instrumentation plan takes.
pub fn pseudo_variables(candidates: &[Candidate]) -> Vec<(String, Expr)> {
    candidates.iter().filter_map(|c| c.expr.clone().map(|e| (c.name.clone(), e))).collect()
}
