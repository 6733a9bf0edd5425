//! Abstract single-variable conditions, their source text, and the
//! expected normalized predicates.

use acs_core::lang::{parse_expr, Type};
use acs_core::miner::{pred_extract, Constant, PredForm};

#[derive(Clone, Copy, Debug)]
pub enum Lit {
    Int(i64),
    Float(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Op {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

#[derive(Clone, Debug)]
pub enum Cond {
    Cmp { var_left: bool, op: Op, lit: Lit },
    Other,
    Equals,
    Is,
    Not(Box<Cond>),
    And(Box<Cond>, Box<Cond>),
    Or(Box<Cond>, Box<Cond>),
}

pub fn int_text(v: i64) -> String {
    match v {
        i64::MIN => "MIN_INT".into(),
        i64::MAX => "MAX_INT".into(),
        v => v.to_string(),
    }
}

pub fn float_text(v: f64) -> String {
    let s = format!("{v}");
    if s.contains('.') {
        s
    } else {
        format!("{s}.0")
    }
}

pub fn lit_source(l: Lit) -> String {
    match l {
        Lit::Int(v) => int_text(v),
        Lit::Float(v) => float_text(v),
    }
}

pub fn op_source(op: Op) -> &'static str {
    match op {
        Op::Eq => "==",
        Op::Ne => "!=",
        Op::Lt => "<",
        Op::Le => "<=",
        Op::Gt => ">",
        Op::Ge => ">=",
    }
}

pub fn source(c: &Cond) -> String {
    match c {
        Cond::Cmp { var_left: true, op, lit } => format!("x {} {}", op_source(*op), lit_source(*lit)),
        Cond::Cmp { var_left: false, op, lit } => format!("{} {} x", lit_source(*lit), op_source(*op)),
        Cond::Other => "y > 3".into(),
        Cond::Equals => "equals(x, \"a\")".into(),
        Cond::Is => "x is Circle".into(),
        Cond::Not(inner) => format!("!({})", source(inner)),
        Cond::And(a, b) => format!("({}) && ({})", source(a), source(b)),
        Cond::Or(a, b) => format!("({}) || ({})", source(a), source(b)),
    }
}

pub fn flip(op: Op) -> Op {
    match op {
        Op::Lt => Op::Gt,
        Op::Gt => Op::Lt,
        Op::Le => Op::Ge,
        Op::Ge => Op::Le,
        o => o,
    }
}

/// Expected canonical texts, built from integer and float order facts.
pub fn oracle(c: &Cond, out: &mut Vec<String>) {
    match c {
        Cond::Cmp { var_left, op, lit } => {
            let op = if *var_left { *op } else { flip(*op) };
            match (op, *lit) {
                (Op::Ne, _) => {}
                (Op::Eq, l) => out.push(format!("EqConst({})", lit_source(l))),
                (Op::Le | Op::Gt, Lit::Int(v)) => {
                    let next = v as i128 + 1;
                    if next <= i64::MAX as i128 {
                        out.push(format!("Lt({})", int_text(next as i64)));
                    }
                    out.push(format!("Gt({})", int_text(v)));
                }
                (Op::Lt | Op::Ge, Lit::Int(v)) => {
                    out.push(format!("Lt({})", int_text(v)));
                    let prev = v as i128 - 1;
                    if prev >= i64::MIN as i128 {
                        out.push(format!("Gt({})", int_text(prev as i64)));
                    }
                }
                (Op::Le | Op::Gt, Lit::Float(v)) => {
                    out.push(format!("Le({})", float_text(v)));
                    out.push(format!("Gt({})", float_text(v)));
                }
                (Op::Lt | Op::Ge, Lit::Float(v)) => {
                    out.push(format!("Lt({})", float_text(v)));
                    out.push(format!("Ge({})", float_text(v)));
                }
            }
        }
        Cond::Other => {}
        Cond::Equals => out.push("EqualsConst(\"a\")".into()),
        Cond::Is => out.push("TypeTest(Circle)".into()),
        Cond::Not(inner) => oracle(inner, out),
        Cond::And(a, b) | Cond::Or(a, b) => {
            oracle(a, out);
            oracle(b, out);
        }
    }
}

pub const OPS: [Op; 6] = [Op::Eq, Op::Ne, Op::Lt, Op::Le, Op::Gt, Op::Ge];

pub fn literals() -> Vec<Lit> {
    let mut v: Vec<Lit> = (-2..=2).chain([i64::MIN, i64::MAX]).map(Lit::Int).collect();
    v.extend([-2.0, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0].map(Lit::Float));
    v
}

pub fn atoms() -> Vec<Cond> {
    let mut out = vec![Cond::Other, Cond::Equals, Cond::Is];
    for op in OPS {
        for lit in literals() {
            for var_left in [true, false] {
                out.push(Cond::Cmp { var_left, op, lit });
            }
        }
    }
    out
}

pub fn grow(base: &[Cond]) -> Vec<Cond> {
    let mut out: Vec<Cond> = base.to_vec();
    out.extend(base.iter().map(|c| Cond::Not(Box::new(c.clone()))));
    for a in base {
        for b in base {
            out.push(Cond::And(Box::new(a.clone()), Box::new(b.clone())));
            out.push(Cond::Or(Box::new(a.clone()), Box::new(b.clone())));
        }
    }
    out
}

/// Describes the first way `pred_extract` departs from the oracle on `c`.
pub fn disagreement(c: &Cond) -> Option<String> {
    let text = source(c);
    let e = match parse_expr(&text) {
        Ok(e) => e,
        Err(err) => return Some(format!("{text}: {err}")),
    };
    let got = pred_extract(&e, "x", &Type::Int);
    let mut want = Vec::new();
    oracle(c, &mut want);
    let got_text: Vec<String> = got.iter().map(|p| p.to_string()).collect();
    if got_text != want {
        return Some(format!("{text}: got {got_text:?}, want {want:?}"));
    }
    let inclusive_int =
        got.iter().any(|p| matches!(p.form, PredForm::Le | PredForm::Ge) && matches!(p.constant, Constant::Int(_)));
    let not_eq = got_text.iter().any(|t| t.starts_with("NotEq"));
    (inclusive_int || not_eq).then(|| format!("{text}: non-normalized output {got_text:?}"))
}

pub fn depth_two_grid() -> Vec<Cond> {
    grow(&atoms())
}

/// Depth-three trees over a smaller atom set covering the overflow edges.
pub fn depth_three_grid() -> Vec<Cond> {
    let reduced = vec![
        Cond::Other,
        Cond::Equals,
        Cond::Is,
        Cond::Cmp { var_left: true, op: Op::Le, lit: Lit::Int(i64::MAX) },
        Cond::Cmp { var_left: false, op: Op::Lt, lit: Lit::Int(i64::MIN) },
        Cond::Cmp { var_left: true, op: Op::Ne, lit: Lit::Int(1) },
        Cond::Cmp { var_left: true, op: Op::Ge, lit: Lit::Float(-0.5) },
        Cond::Cmp { var_left: false, op: Op::Eq, lit: Lit::Int(-2) },
    ];
    grow(&grow(&reduced))
}
