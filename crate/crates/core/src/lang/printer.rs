//! Canonical source formatting.

use std::fmt::Write;

use super::ast::*;

const INDENT: &str = "    ";

/// Full program text, tests included.
pub fn pretty_print(program: &Program) -> String {
    let mut out = print_items(program);
    for t in &program.tests {
        if !out.is_empty() {
            out.push('\n');
        }
        let _ = writeln!(out, "test {} {{", t.name);
        print_stmts(&mut out, &t.body.stmts, 1);
        out.push_str("}\n");
    }
    out
}

/// Records and functions only; the form used for patch diffs.
pub fn print_items(program: &Program) -> String {
    let mut out = String::new();
    for r in &program.records {
        if !out.is_empty() {
            out.push('\n');
        }
        let _ = writeln!(out, "record {} {{", r.name);
        for f in &r.fields {
            let _ = writeln!(out, "{INDENT}{}: {},", f.name, f.ty);
        }
        out.push_str("}\n");
    }
    for f in &program.functions {
        if !out.is_empty() {
            out.push('\n');
        }
        if let Some(doc) = &f.doc {
            let _ = writeln!(out, "/**{}*/", doc.text);
        }
        let params: Vec<String> = f.params.iter().map(|p| format!("{}: {}", p.name, p.ty)).collect();
        let _ = writeln!(out, "fn {}({}) -> {} {{", f.name, params.join(", "), f.ret);
        print_stmts(&mut out, &f.body.stmts, 1);
        out.push_str("}\n");
    }
    out
}

/// A single statement at indentation level zero, without a trailing newline.
pub fn print_stmt(stmt: &Stmt) -> String {
    let mut out = String::new();
    print_one(&mut out, stmt, 0);
    out.truncate(out.trim_end().len());
    out
}

fn print_stmts(out: &mut String, stmts: &[Stmt], depth: usize) {
    for s in stmts {
        print_one(out, s, depth);
    }
}

fn pad(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str(INDENT);
    }
}

fn print_one(out: &mut String, s: &Stmt, depth: usize) {
    pad(out, depth);
    match &s.kind {
        StmtKind::Let { name, ty, init } => {
            let _ = writeln!(out, "let {name}: {ty} = {};", print_expr(init));
        }
        StmtKind::Assign { name, value } => {
            let _ = writeln!(out, "{name} = {};", print_expr(value));
        }
        StmtKind::If { .. } => {
            print_if(out, s, depth);
            out.push('\n');
        }
        StmtKind::While { cond, body } => {
            let _ = writeln!(out, "while ({}) {{", print_expr(cond));
            print_stmts(out, &body.stmts, depth + 1);
            pad(out, depth);
            out.push_str("}\n");
        }
        StmtKind::Return(e) => {
            let _ = writeln!(out, "return {};", print_expr(e));
        }
        StmtKind::Throw(name) => {
            let _ = writeln!(out, "throw {name};");
        }
        StmtKind::Expr(e) => {
            let _ = writeln!(out, "{};", print_expr(e));
        }
        StmtKind::Block(b) => {
            out.push_str("{\n");
            print_stmts(out, &b.stmts, depth + 1);
            pad(out, depth);
            out.push_str("}\n");
        }
        StmtKind::AssertEq { expected, actual } => {
            let _ = writeln!(out, "assert_eq({}, {});", print_expr(expected), print_expr(actual));
        }
        StmtKind::AssertThrows { exception, expr } => {
            let _ = writeln!(out, "assert_throws({exception}, {});", print_expr(expr));
        }
    }
}

// Prints `if` chains without the leading indent or trailing newline.
fn print_if(out: &mut String, s: &Stmt, depth: usize) {
    let StmtKind::If { cond, then_block, else_block } = &s.kind else { unreachable!() };
    let _ = writeln!(out, "if ({}) {{", print_expr(cond));
    print_stmts(out, &then_block.stmts, depth + 1);
    pad(out, depth);
    out.push('}');
    if let Some(else_block) = else_block {
        match else_block.stmts.as_slice() {
            [nested] if matches!(nested.kind, StmtKind::If { .. }) => {
                out.push_str(" else ");
                print_if(out, nested, depth);
            }
            stmts => {
                out.push_str(" else {\n");
                print_stmts(out, stmts, depth + 1);
                pad(out, depth);
                out.push('}');
            }
        }
    }
}

pub fn print_expr(e: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e);
    out
}

fn write_operand(out: &mut String, e: &Expr, needs_parens: bool) {
    if needs_parens {
        out.push('(');
        write_expr(out, e);
        out.push(')');
    } else {
        write_expr(out, e);
    }
}

fn write_list(out: &mut String, items: &[Expr]) {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_expr(out, item);
    }
}

pub(crate) fn format_float(v: f64) -> String {
    format!("{v:?}")
}

fn write_expr(out: &mut String, e: &Expr) {
    match &e.kind {
        ExprKind::Int(v) => {
            let _ = write!(out, "{v}");
        }
        ExprKind::Float(v) => out.push_str(&format_float(*v)),
        ExprKind::Bool(b) => {
            let _ = write!(out, "{b}");
        }
        ExprKind::Str(s) => {
            out.push('"');
            for c in s.chars() {
                match c {
                    '\n' => out.push_str("\\n"),
                    '\t' => out.push_str("\\t"),
                    '"' => out.push_str("\\\""),
                    '\\' => out.push_str("\\\\"),
                    c => out.push(c),
                }
            }
            out.push('"');
        }
        ExprKind::Null => out.push_str("null"),
        ExprKind::Named(c) => out.push_str(c.keyword()),
        ExprKind::Var(name) => out.push_str(name),
        ExprKind::Unary(op, inner) => {
            out.push_str(match op {
                UnaryOp::Neg => "-",
                UnaryOp::Not => "!",
            });
            write_operand(out, inner, inner.precedence() < UNARY_PRECEDENCE);
        }
        ExprKind::Binary(op, l, r) => {
            let p = op.precedence();
            write_operand(out, l, l.precedence() < p);
            let _ = write!(out, " {} ", op.symbol());
            write_operand(out, r, r.precedence() <= p);
        }
        ExprKind::Call(name, args) => {
            out.push_str(name);
            out.push('(');
            write_list(out, args);
            out.push(')');
        }
        ExprKind::Index(base, idx) => {
            write_operand(out, base, base.precedence() < ATOM_PRECEDENCE);
            out.push('[');
            write_expr(out, idx);
            out.push(']');
        }
        ExprKind::Field(base, field) => {
            write_operand(out, base, base.precedence() < ATOM_PRECEDENCE);
            out.push('.');
            out.push_str(field);
        }
        ExprKind::Record(name, fields) => {
            out.push_str(name);
            out.push_str(" { ");
            for (i, (f, v)) in fields.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(f);
                out.push_str(": ");
                write_expr(out, v);
            }
            out.push_str(" }");
        }
        ExprKind::Array(items) => {
            out.push('[');
            write_list(out, items);
            out.push(']');
        }
        ExprKind::Is(inner, name) => {
            write_operand(out, inner, inner.precedence() < IS_PRECEDENCE);
            out.push_str(" is ");
            out.push_str(name);
        }
        ExprKind::Paren(inner) => {
            out.push('(');
            write_expr(out, inner);
            out.push(')');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse_expr, parse_program};
    use super::*;

    #[test]
    fn abs_round_trip() {
        let src = "fn abs(a: int) -> int { if (a < 0) { return -a; } return a; }";
        let p = parse_program(src).unwrap();
        let printed = pretty_print(&p);
        assert_eq!(parse_program(&printed).unwrap(), p);
    }

    #[test]
    fn nested_control_flow_is_reindented() {
        let src = "fn f(n: int) -> int { let i: int = 0; while (i < n) { if (i == 3) { return i; } else if (i == 4) { i = i + 2; } else { i = i + 1; } } return i; }";
        let p = parse_program(src).unwrap();
        let once = pretty_print(&p);
        let twice = pretty_print(&parse_program(&once).unwrap());
        assert_eq!(once, twice);
        assert!(once.contains("\n        if (i == 3) {\n            return i;\n        } else if (i == 4) {\n"));
    }

    #[test]
    fn doc_comment_verbatim() {
        let src = "/** Scales.\n * @throws Bad if x is negative\n */\nfn f(x: int) -> int { return x; }";
        let p = parse_program(src).unwrap();
        assert!(pretty_print(&p).starts_with("/** Scales.\n * @throws Bad if x is negative\n */\nfn f"));
    }

    #[test]
    fn parentheses_preserved_and_required_ones_added() {
        let e = parse_expr("(a + b) * c").unwrap();
        assert_eq!(print_expr(&e), "(a + b) * c");
        let e = parse_expr("a - (b - c)").unwrap();
        assert_eq!(print_expr(&e), "a - (b - c)");
        let synthetic = Expr::new(
            NodeId(0),
            ExprKind::Binary(BinaryOp::Mul, Box::new(parse_expr("a + b").unwrap()), Box::new(parse_expr("c").unwrap())),
        );
        assert_eq!(print_expr(&synthetic), "(a + b) * c");
    }

    #[test]
    fn floats_and_strings() {
        assert_eq!(print_expr(&parse_expr("1.0e-7").unwrap()), "1e-7");
        assert_eq!(print_expr(&parse_expr("98765432.1").unwrap()), "98765432.1");
        assert_eq!(print_expr(&parse_expr("\"a\\\"b\\n\"").unwrap()), "\"a\\\"b\\n\"");
    }
}
