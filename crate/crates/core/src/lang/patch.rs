//! Patches as AST transformations.

use serde::{Deserialize, Serialize};

use super::ast::*;
use super::printer::{print_expr, print_stmt};
use super::typecheck::Checker;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PatchKind {
    ValueReturning,
    OracleThrowing,
    Widening,
    Narrowing,
}

impl PatchKind {
    pub fn is_insertion(self) -> bool {
        matches!(self, PatchKind::ValueReturning | PatchKind::OracleThrowing)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PatchPayload {
    /// `if (c) { prefix; return value; }`
    Return { prefix: Vec<Stmt>, value: Expr },
    /// `if (c) { throw exception; }`
    Throw { exception: String },
    /// Rewrite of the condition with this id, owned by the anchor statement.
    Rewrite { original: NodeId },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Patch {
    pub kind: PatchKind,
    pub anchor: NodeId,
    pub condition: Expr,
    pub payload: PatchPayload,
    pub textual_diff: String,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PatchError {
    #[error("anchor {0} not found")]
    AnchorNotFound(NodeId),
    #[error("patched program does not type-check: {0}")]
    IllTypedCondition(String),
}

fn paren(e: Expr) -> Expr {
    Expr::new(NodeId(0), ExprKind::Paren(Box::new(e)))
}

impl Patch {
    /// The guard statement an insertion patch adds, with placeholder ids.
    pub fn guard(&self) -> Option<Stmt> {
        let body = match &self.payload {
            PatchPayload::Return { prefix, value } => {
                let mut stmts = prefix.clone();
                stmts.push(Stmt { id: NodeId(0), kind: StmtKind::Return(value.clone()) });
                stmts
            }
            PatchPayload::Throw { exception } => {
                vec![Stmt { id: NodeId(0), kind: StmtKind::Throw(exception.clone()) }]
            }
            PatchPayload::Rewrite { .. } => return None,
        };
        Some(Stmt {
            id: NodeId(0),
            kind: StmtKind::If { cond: self.condition.clone(), then_block: Block { stmts: body }, else_block: None },
        })
    }

    /// The condition a modification patch puts in place of `original`.
    pub fn rewritten(&self, original: &Expr) -> Expr {
        let c = paren(self.condition.clone());
        let old = paren(original.clone());
        let kind = match self.kind {
            PatchKind::Narrowing => ExprKind::Binary(
                BinaryOp::And,
                Box::new(old),
                Box::new(Expr::new(NodeId(0), ExprKind::Unary(UnaryOp::Not, Box::new(c)))),
            ),
            _ => ExprKind::Binary(BinaryOp::Or, Box::new(old), Box::new(c)),
        };
        Expr::new(NodeId(0), kind)
    }

    /// One-line rendering: the inserted guard, or the rewritten condition.
    pub fn render(&self, program: &Program) -> String {
        match self.guard() {
            Some(stmt) => one_line(&print_stmt(&stmt)),
            None => match program.find_stmt(self.anchor).and_then(|s| s.condition()) {
                Some(cond) => print_expr(&self.rewritten(cond)),
                None => print_expr(&self.condition),
            },
        }
    }
}

/// Joins a multi-line rendering into one line.
pub fn one_line(text: &str) -> String {
    text.lines().map(str::trim).filter(|l| !l.is_empty()).collect::<Vec<_>>().join(" ")
}

fn find_block_mut(block: &mut Block, id: NodeId) -> Option<(&mut Block, usize)> {
    if let Some(i) = block.stmts.iter().position(|s| s.id == id) {
        return Some((block, i));
    }
    for stmt in &mut block.stmts {
        let found = match &mut stmt.kind {
            StmtKind::If { then_block, else_block, .. } => match find_block_mut(then_block, id) {
                Some(hit) => Some(hit),
                None => else_block.as_mut().and_then(|b| find_block_mut(b, id)),
            },
            StmtKind::While { body, .. } | StmtKind::Block(body) => find_block_mut(body, id),
            _ => None,
        };
        if found.is_some() {
            return found;
        }
    }
    None
}

/// Applies `patch`, numbering every new node with fresh ids.
pub fn apply_patch(program: &Program, patch: &Patch) -> Result<Program, PatchError> {
    let mut out = program.clone();
    let mut next = out.next_id;
    let mut fresh = |_| {
        next += 1;
        NodeId(next - 1)
    };
    let anchor = patch.anchor;
    let mut applied = false;
    if let Some(mut guard) = patch.guard() {
        renumber_stmt(&mut guard, &mut fresh);
        for f in &mut out.functions {
            if let Some((block, i)) = find_block_mut(&mut f.body, anchor) {
                block.stmts.insert(i, guard);
                applied = true;
                break;
            }
        }
    } else {
        let PatchPayload::Rewrite { original } = patch.payload else { unreachable!() };
        for f in &mut out.functions {
            if let Some((block, i)) = find_block_mut(&mut f.body, anchor) {
                if let StmtKind::If { cond, .. } | StmtKind::While { cond, .. } = &mut block.stmts[i].kind {
                    if cond.id == original {
                        let mut new = patch.rewritten(cond);
                        renumber_expr(&mut new, &mut fresh);
                        *cond = new;
                        applied = true;
                    }
                }
                break;
            }
        }
    }
    if !applied {
        return Err(PatchError::AnchorNotFound(anchor));
    }
    out.next_id = next;
    Checker::new(&out).check_program().map_err(|e| PatchError::IllTypedCondition(e.to_string()))?;
    Ok(out)
}
