//! Recursive-descent parser with precedence climbing for expressions.

use std::collections::BTreeMap;

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};
use super::LangError;

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    counter: u32,
    spans: BTreeMap<NodeId, Pos>,
}

/// Parsed but not yet numbered or checked.
pub(crate) struct RawItems {
    pub records: Vec<RecordDecl>,
    pub functions: Vec<FunctionDecl>,
    pub tests: Vec<TestCase>,
    pub spans: BTreeMap<NodeId, Pos>,
}

pub(crate) fn parse_items(src: &str, id_base: u32) -> Result<RawItems, LangError> {
    let mut tokens = tokenize(src)?;
    // Doc comments only matter right before `fn`.
    let mut kept = Vec::with_capacity(tokens.len());
    for i in 0..tokens.len() {
        if let Tok::Doc(_) = tokens[i].tok {
            if !matches!(tokens.get(i + 1).map(|t| &t.tok), Some(Tok::Kw("fn"))) {
                continue;
            }
        }
        kept.push(std::mem::replace(&mut tokens[i], Token { tok: Tok::Eof, pos: Pos { line: 0, col: 0 } }));
    }
    let mut p = Parser { tokens: kept, pos: 0, counter: id_base, spans: BTreeMap::new() };
    let mut items = RawItems { records: vec![], functions: vec![], tests: vec![], spans: BTreeMap::new() };
    loop {
        match p.peek().clone() {
            Tok::Eof => break,
            Tok::Kw("record") => items.records.push(p.record()?),
            Tok::Kw("test") => items.tests.push(p.test()?),
            Tok::Kw("fn") | Tok::Doc(_) => items.functions.push(p.function()?),
            other => return Err(p.error(format!("expected `fn`, `record` or `test`, found {other}"))),
        }
    }
    items.spans = p.spans;
    Ok(items)
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn here(&self) -> Pos {
        self.tokens[self.pos].pos
    }

    fn advance(&mut self) -> Tok {
        let t = self.tokens[self.pos].tok.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, msg: impl Into<String>) -> LangError {
        LangError::syntax(self.here(), msg)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if matches!(self.peek(), Tok::Punct(q) if *q == p) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<(), LangError> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.error(format!("expected `{p}`, found {}", self.peek())))
        }
    }

    fn expect_kw(&mut self, k: &str) -> Result<(), LangError> {
        if matches!(self.peek(), Tok::Kw(q) if *q == k) {
            self.advance();
            Ok(())
        } else {
            Err(self.error(format!("expected `{k}`, found {}", self.peek())))
        }
    }

    fn ident(&mut self) -> Result<String, LangError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.advance();
                Ok(s)
            }
            other => Err(self.error(format!("expected identifier, found {other}"))),
        }
    }

    fn new_id(&mut self, pos: Pos) -> NodeId {
        let id = NodeId(self.counter);
        self.counter += 1;
        self.spans.insert(id, pos);
        id
    }

    fn ty(&mut self) -> Result<Type, LangError> {
        let pos = self.here();
        let mut ty = match self.advance() {
            Tok::Kw("int") => Type::Int,
            Tok::Kw("float") => Type::Float,
            Tok::Kw("bool") => Type::Bool,
            Tok::Kw("string") => Type::Str,
            Tok::Ident(name) => Type::Record(name),
            other => return Err(LangError::syntax(pos, format!("expected a type, found {other}"))),
        };
        while matches!(self.peek(), Tok::Punct("[")) && matches!(self.peek_at(1), Tok::Punct("]")) {
            self.advance();
            self.advance();
            ty = Type::Array(Box::new(ty));
        }
        Ok(ty)
    }

    fn record(&mut self) -> Result<RecordDecl, LangError> {
        let pos = self.here();
        self.expect_kw("record")?;
        let id = self.new_id(pos);
        let name = self.ident()?;
        self.expect_punct("{")?;
        let mut fields = Vec::new();
        while !self.eat_punct("}") {
            let fname = self.ident()?;
            self.expect_punct(":")?;
            let ty = self.ty()?;
            fields.push(Param { name: fname, ty });
            if !self.eat_punct(",") {
                self.expect_punct("}")?;
                break;
            }
        }
        Ok(RecordDecl { id, name, fields })
    }

    fn function(&mut self) -> Result<FunctionDecl, LangError> {
        let doc = match self.peek().clone() {
            Tok::Doc(text) => {
                self.advance();
                Some(DocComment { text })
            }
            _ => None,
        };
        let pos = self.here();
        self.expect_kw("fn")?;
        let id = self.new_id(pos);
        let name = self.ident()?;
        self.expect_punct("(")?;
        let mut params = Vec::new();
        while !self.eat_punct(")") {
            let pname = self.ident()?;
            self.expect_punct(":")?;
            let ty = self.ty()?;
            params.push(Param { name: pname, ty });
            if !self.eat_punct(",") {
                self.expect_punct(")")?;
                break;
            }
        }
        self.expect_punct("->")?;
        let ret = self.ty()?;
        let body = self.block()?;
        Ok(FunctionDecl { id, name, params, ret, body, doc })
    }

    fn test(&mut self) -> Result<TestCase, LangError> {
        let pos = self.here();
        self.expect_kw("test")?;
        let id = self.new_id(pos);
        let name = self.ident()?;
        let body = self.block()?;
        Ok(TestCase { id, name, body })
    }

    fn block(&mut self) -> Result<Block, LangError> {
        self.expect_punct("{")?;
        let mut stmts = Vec::new();
        while !self.eat_punct("}") {
            if matches!(self.peek(), Tok::Eof) {
                return Err(self.error("unexpected end of input, expected `}`"));
            }
            stmts.push(self.stmt()?);
        }
        Ok(Block { stmts })
    }

    fn stmt(&mut self) -> Result<Stmt, LangError> {
        let pos = self.here();
        let id = self.new_id(pos);
        let kind = match self.peek().clone() {
            Tok::Kw("let") => {
                self.advance();
                let name = self.ident()?;
                self.expect_punct(":")?;
                let ty = self.ty()?;
                self.expect_punct("=")?;
                let init = self.expr()?;
                self.expect_punct(";")?;
                StmtKind::Let { name, ty, init }
            }
            Tok::Kw("if") => return self.if_stmt(id),
            Tok::Kw("while") => {
                self.advance();
                self.expect_punct("(")?;
                let cond = self.expr()?;
                self.expect_punct(")")?;
                let body = self.block()?;
                StmtKind::While { cond, body }
            }
            Tok::Kw("return") => {
                self.advance();
                let e = self.expr()?;
                self.expect_punct(";")?;
                StmtKind::Return(e)
            }
            Tok::Kw("throw") => {
                self.advance();
                let name = self.ident()?;
                self.expect_punct(";")?;
                StmtKind::Throw(name)
            }
            Tok::Kw("assert_eq") => {
                self.advance();
                self.expect_punct("(")?;
                let expected = self.expr()?;
                self.expect_punct(",")?;
                let actual = self.expr()?;
                self.expect_punct(")")?;
                self.expect_punct(";")?;
                StmtKind::AssertEq { expected, actual }
            }
            Tok::Kw("assert_throws") => {
                self.advance();
                self.expect_punct("(")?;
                let exception = self.ident()?;
                self.expect_punct(",")?;
                let expr = self.expr()?;
                self.expect_punct(")")?;
                self.expect_punct(";")?;
                StmtKind::AssertThrows { exception, expr }
            }
            Tok::Punct("{") => StmtKind::Block(self.block()?),
            Tok::Ident(name) if matches!(self.peek_at(1), Tok::Punct("=")) => {
                self.advance();
                self.advance();
                let value = self.expr()?;
                self.expect_punct(";")?;
                StmtKind::Assign { name, value }
            }
            _ => {
                let e = self.expr()?;
                self.expect_punct(";")?;
                StmtKind::Expr(e)
            }
        };
        Ok(Stmt { id, kind })
    }

    fn if_stmt(&mut self, id: NodeId) -> Result<Stmt, LangError> {
        self.expect_kw("if")?;
        self.expect_punct("(")?;
        let cond = self.expr()?;
        self.expect_punct(")")?;
        let then_block = self.block()?;
        let else_block = if matches!(self.peek(), Tok::Kw("else")) {
            self.advance();
            if matches!(self.peek(), Tok::Kw("if")) {
                let pos = self.here();
                let nested_id = self.new_id(pos);
                Some(Block { stmts: vec![self.if_stmt(nested_id)?] })
            } else {
                Some(self.block()?)
            }
        } else {
            None
        };
        Ok(Stmt { id, kind: StmtKind::If { cond, then_block, else_block } })
    }

    pub fn expr(&mut self) -> Result<Expr, LangError> {
        self.binary(1)
    }

    fn binary_op(&self) -> Option<BinaryOp> {
        Some(match self.peek() {
            Tok::Punct("||") => BinaryOp::Or,
            Tok::Punct("&&") => BinaryOp::And,
            Tok::Punct("==") => BinaryOp::Eq,
            Tok::Punct("!=") => BinaryOp::Ne,
            Tok::Punct("<") => BinaryOp::Lt,
            Tok::Punct("<=") => BinaryOp::Le,
            Tok::Punct(">") => BinaryOp::Gt,
            Tok::Punct(">=") => BinaryOp::Ge,
            Tok::Punct("+") => BinaryOp::Add,
            Tok::Punct("-") => BinaryOp::Sub,
            Tok::Punct("*") => BinaryOp::Mul,
            Tok::Punct("/") => BinaryOp::Div,
            Tok::Punct("%") => BinaryOp::Rem,
            _ => return None,
        })
    }

    fn binary(&mut self, min_prec: u8) -> Result<Expr, LangError> {
        let start = self.here();
        let mut lhs = self.unary()?;
        loop {
            if matches!(self.peek(), Tok::Kw("is")) && IS_PRECEDENCE >= min_prec {
                self.advance();
                let name = self.ident()?;
                let id = self.new_id(start);
                lhs = Expr::new(id, ExprKind::Is(Box::new(lhs), name));
                continue;
            }
            let Some(op) = self.binary_op() else { break };
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.advance();
            let rhs = self.binary(prec + 1)?;
            let id = self.new_id(start);
            lhs = Expr::new(id, ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, LangError> {
        let pos = self.here();
        let op = match self.peek() {
            Tok::Punct("-") => UnaryOp::Neg,
            Tok::Punct("!") => UnaryOp::Not,
            _ => return self.postfix(),
        };
        self.advance();
        let id = self.new_id(pos);
        let inner = self.unary()?;
        Ok(Expr::new(id, ExprKind::Unary(op, Box::new(inner))))
    }

    fn postfix(&mut self) -> Result<Expr, LangError> {
        let start = self.here();
        let mut e = self.primary()?;
        loop {
            if self.eat_punct("[") {
                let idx = self.expr()?;
                self.expect_punct("]")?;
                let id = self.new_id(start);
                e = Expr::new(id, ExprKind::Index(Box::new(e), Box::new(idx)));
            } else if self.eat_punct(".") {
                let field = self.ident()?;
                let id = self.new_id(start);
                e = Expr::new(id, ExprKind::Field(Box::new(e), field));
            } else {
                break;
            }
        }
        Ok(e)
    }

    fn comma_list(&mut self, close: &str) -> Result<Vec<Expr>, LangError> {
        let mut items = Vec::new();
        while !self.eat_punct(close) {
            items.push(self.expr()?);
            if !self.eat_punct(",") {
                self.expect_punct(close)?;
                break;
            }
        }
        Ok(items)
    }

    fn primary(&mut self) -> Result<Expr, LangError> {
        let pos = self.here();
        let id = self.new_id(pos);
        let kind = match self.advance() {
            Tok::Int(v) => ExprKind::Int(v),
            Tok::Float(v) => ExprKind::Float(v),
            Tok::Str(s) => ExprKind::Str(s),
            Tok::Kw("true") => ExprKind::Bool(true),
            Tok::Kw("false") => ExprKind::Bool(false),
            Tok::Kw("null") => ExprKind::Null,
            Tok::Kw("MIN_INT") => ExprKind::Named(NamedConst::MinInt),
            Tok::Kw("MAX_INT") => ExprKind::Named(NamedConst::MaxInt),
            Tok::Punct("(") => {
                let inner = self.expr()?;
                self.expect_punct(")")?;
                ExprKind::Paren(Box::new(inner))
            }
            Tok::Punct("[") => {
                let items = self.comma_list("]")?;
                if items.is_empty() {
                    return Err(LangError::syntax(pos, "empty array literals are not supported"));
                }
                ExprKind::Array(items)
            }
            Tok::Ident(name) => {
                if self.eat_punct("(") {
                    ExprKind::Call(name, self.comma_list(")")?)
                } else if self.eat_punct("{") {
                    let mut fields = Vec::new();
                    while !self.eat_punct("}") {
                        let fname = self.ident()?;
                        self.expect_punct(":")?;
                        let value = self.expr()?;
                        fields.push((fname, value));
                        if !self.eat_punct(",") {
                            self.expect_punct("}")?;
                            break;
                        }
                    }
                    ExprKind::Record(name, fields)
                } else {
                    ExprKind::Var(name)
                }
            }
            other => return Err(LangError::syntax(pos, format!("expected an expression, found {other}"))),
        };
        Ok(Expr::new(id, kind))
    }
}

/// Parses a standalone expression (used for command-line arguments and tests).
pub fn parse_expr(src: &str) -> Result<Expr, LangError> {
    let tokens = tokenize(src)?;
    let mut p = Parser { tokens, pos: 0, counter: 0, spans: BTreeMap::new() };
    let mut e = p.expr()?;
    if !matches!(p.peek(), Tok::Eof) {
        return Err(p.error(format!("trailing input: {}", p.peek())));
    }
    let mut n = 0;
    renumber_expr(&mut e, &mut |_| {
        n += 1;
        NodeId(n - 1)
    });
    Ok(e)
}
