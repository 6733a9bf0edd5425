use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};

use crate::interp::{runtime_eq, Value};
use crate::lang::printer::format_float;
use crate::lang::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PredForm {
    EqConst,
    EqualsConst,
    TypeTest,
    Lt,
    Le,
    Gt,
    Ge,
}

/// Predicate constant: an evaluated scalar literal or a record type name.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "camelCase")]
pub enum Constant {
    Int(i64),
    Float(f64),
    Bool(bool),
    Str(String),
    Null,
    Type(String),
}

impl Constant {
    fn key(&self) -> (u8, i64, u64, &str) {
        match self {
            Constant::Int(v) => (0, *v, 0, ""),
            Constant::Float(v) => (1, 0, v.to_bits(), ""),
            Constant::Bool(b) => (2, *b as i64, 0, ""),
            Constant::Str(s) => (3, 0, 0, s),
            Constant::Null => (4, 0, 0, ""),
            Constant::Type(t) => (5, 0, 0, t),
        }
    }

    pub fn from_value(v: &Value) -> Option<Constant> {
        Some(match v {
            Value::Int(i) => Constant::Int(*i),
            Value::Float(f) if f.is_finite() => Constant::Float(*f),
            Value::Bool(b) => Constant::Bool(*b),
            Value::Str(s) => Constant::Str(s.clone()),
            Value::Null => Constant::Null,
            _ => return None,
        })
    }

    pub fn to_value(&self) -> Option<Value> {
        Some(match self {
            Constant::Int(i) => Value::Int(*i),
            Constant::Float(f) => Value::Float(*f),
            Constant::Bool(b) => Value::Bool(*b),
            Constant::Str(s) => Value::Str(s.clone()),
            Constant::Null => Value::Null,
            Constant::Type(_) => return None,
        })
    }
}

impl PartialEq for Constant {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for Constant {}

impl Hash for Constant {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.key().hash(state);
    }
}

impl PartialOrd for Constant {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Constant {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constant::Type(t) => f.write_str(t),
            Constant::Float(v) => f.write_str(&format_float(*v)),
            other => write!(f, "{}", other.to_value().expect("scalar")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Predicate {
    pub form: PredForm,
    pub constant: Constant,
    pub operand_type: Type,
}

impl fmt::Display for Predicate {
    /// Canonical text, e.g. `Gt(24)`; also the tie-break key when ranking.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}({})", self.form, self.constant)
    }
}

fn wrap(e: Expr, min_prec: u8) -> Expr {
    if e.precedence() < min_prec {
        Expr::new(NodeId(0), ExprKind::Paren(Box::new(e)))
    } else {
        e
    }
}

impl Predicate {
    pub fn new(form: PredForm, constant: Constant, operand_type: Type) -> Self {
        Predicate { form, constant, operand_type }
    }

    /// Truth of the predicate for one operand value; `None` when it cannot
    /// be evaluated on that value.
    pub fn holds(&self, v: &Value) -> Option<bool> {
        use PredForm::*;
        match (self.form, &self.constant) {
            (TypeTest, Constant::Type(t)) => match v {
                Value::Record(n, _) => Some(n == t),
                Value::Null => Some(false),
                _ => None,
            },
            (EqConst | EqualsConst, c) => {
                let c = c.to_value()?;
                match (v, &c) {
                    (Value::Null, _) | (_, Value::Null) => Some(runtime_eq(v, &c)),
                    _ if std::mem::discriminant(v) == std::mem::discriminant(&c) => Some(runtime_eq(v, &c)),
                    _ => None,
                }
            }
            (form, c) => {
                let ord = match (v, c) {
                    (Value::Int(x), Constant::Int(y)) => x.partial_cmp(y),
                    (Value::Float(x), Constant::Float(y)) => x.partial_cmp(y),
                    _ => return None,
                };
                Some(match (form, ord) {
                    (Lt, Some(o)) => o == Ordering::Less,
                    (Le, Some(o)) => o != Ordering::Greater,
                    (Gt, Some(o)) => o == Ordering::Greater,
                    (Ge, Some(o)) => o != Ordering::Less,
                    (_, None) => false,
                    _ => unreachable!(),
                })
            }
        }
    }

    /// The condition `operand <op> constant` this predicate denotes.
    pub fn to_condition(&self, operand: Expr) -> Option<Expr> {
        let e = |kind| Expr::new(NodeId(0), kind);
        let constant = || self.constant.to_value().and_then(|v| v.to_expr());
        let cmp = |op: BinaryOp| -> Option<Expr> {
            let p = op.precedence();
            Some(e(ExprKind::Binary(op, Box::new(wrap(operand.clone(), p)), Box::new(wrap(constant()?, p + 1)))))
        };
        match self.form {
            PredForm::EqConst => cmp(BinaryOp::Eq),
            PredForm::Lt => cmp(BinaryOp::Lt),
            PredForm::Le => cmp(BinaryOp::Le),
            PredForm::Gt => cmp(BinaryOp::Gt),
            PredForm::Ge => cmp(BinaryOp::Ge),
            PredForm::EqualsConst => Some(e(ExprKind::Call("equals".into(), vec![operand, constant()?]))),
            PredForm::TypeTest => match &self.constant {
                Constant::Type(t) => Some(e(ExprKind::Is(Box::new(wrap(operand, IS_PRECEDENCE)), t.clone()))),
                _ => None,
            },
        }
    }
}

/// Fixed predicates tried after the mined ones.
pub fn predefined_predicates(t: &Type) -> Vec<Predicate> {
    let p = |c| Predicate::new(PredForm::EqConst, c, t.clone());
    match t {
        Type::Bool => vec![p(Constant::Bool(true)), p(Constant::Bool(false))],
        Type::Int => vec![p(Constant::Int(i64::MIN)), p(Constant::Int(i64::MAX))],
        Type::Str | Type::Array(_) | Type::Record(_) => vec![p(Constant::Null)],
        Type::Float | Type::Null => vec![],
    }
}
