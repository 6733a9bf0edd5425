use std::fmt;

use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;

use crate::lang::printer::format_float;
use crate::lang::{Expr, ExprKind, NamedConst, NodeId, Type, UnaryOp};

/// Runtime value. Arrays and records are immutable, so values are plain trees.
#[derive(Debug, Clone)]
pub enum Value {
    Int(i64),
    Float(f64),
    Bool(bool),
    Str(String),
    Array(Vec<Value>),
    Record(String, Vec<(String, Value)>),
    Null,
}

impl PartialEq for Value {
    /// MiniLang equality, except that NaN equals NaN so that snapshots
    /// compare reflexively.
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a == b,
            (Value::Float(a), Value::Float(b)) => a == b || (a.is_nan() && b.is_nan()),
            (Value::Bool(a), Value::Bool(b)) => a == b,
            (Value::Str(a), Value::Str(b)) => a == b,
            (Value::Array(a), Value::Array(b)) => a == b,
            (Value::Record(n, a), Value::Record(m, b)) => n == m && a == b,
            (Value::Null, Value::Null) => true,
            _ => false,
        }
    }
}

impl Value {
    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn type_name(&self) -> String {
        match self {
            Value::Int(_) => "int".into(),
            Value::Float(_) => "float".into(),
            Value::Bool(_) => "bool".into(),
            Value::Str(_) => "string".into(),
            Value::Array(_) => "array".into(),
            Value::Record(name, _) => name.clone(),
            Value::Null => "null".into(),
        }
    }

    /// Whether the value may be stored in a slot of type `ty`.
    pub fn fits(&self, ty: &Type) -> bool {
        match (self, ty) {
            (Value::Int(_), Type::Int) | (Value::Float(_), Type::Float) | (Value::Bool(_), Type::Bool) => true,
            (Value::Str(_), Type::Str) => true,
            (Value::Null, t) => t.is_reference(),
            (Value::Array(items), Type::Array(elem)) => items.iter().all(|v| v.fits(elem)),
            (Value::Record(n, _), Type::Record(m)) => n == m,
            _ => false,
        }
    }

    /// A literal expression denoting this value, shaped as the parser would
    /// produce it. Records have no literal form here and yield `None`, as do
    /// non-finite floats.
    pub fn to_expr(&self) -> Option<Expr> {
        let e = |kind| Expr::new(NodeId(0), kind);
        let neg = |inner: Expr| e(ExprKind::Unary(UnaryOp::Neg, Box::new(inner)));
        Some(match self {
            Value::Int(i64::MIN) => e(ExprKind::Named(NamedConst::MinInt)),
            Value::Int(i64::MAX) => e(ExprKind::Named(NamedConst::MaxInt)),
            Value::Int(v) if *v < 0 => neg(e(ExprKind::Int(-v))),
            Value::Int(v) => e(ExprKind::Int(*v)),
            Value::Float(v) if !v.is_finite() => return None,
            Value::Float(v) if v.is_sign_negative() => neg(e(ExprKind::Float(-v))),
            Value::Float(v) => e(ExprKind::Float(*v)),
            Value::Bool(b) => e(ExprKind::Bool(*b)),
            Value::Str(s) => e(ExprKind::Str(s.clone())),
            Value::Null => e(ExprKind::Null),
            Value::Array(items) if !items.is_empty() => {
                e(ExprKind::Array(items.iter().map(Value::to_expr).collect::<Option<Vec<_>>>()?))
            }
            Value::Array(_) | Value::Record(..) => return None,
        })
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i64::MIN) => f.write_str("MIN_INT"),
            Value::Int(i64::MAX) => f.write_str("MAX_INT"),
            Value::Int(v) => write!(f, "{v}"),
            Value::Float(v) => f.write_str(&format_float(*v)),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Str(s) => write!(f, "{s:?}"),
            Value::Null => f.write_str("null"),
            Value::Array(items) => {
                f.write_str("[")?;
                for (i, v) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{v}")?;
                }
                f.write_str("]")
            }
            Value::Record(name, fields) => {
                write!(f, "{name} {{ ")?;
                for (i, (n, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{n}: {v}")?;
                }
                f.write_str(" }")
            }
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Value::Int(v) => s.serialize_i64(*v),
            Value::Float(v) if v.is_finite() => s.serialize_f64(*v),
            Value::Float(v) => s.collect_str(v),
            Value::Bool(b) => s.serialize_bool(*b),
            Value::Str(v) => s.serialize_str(v),
            Value::Null => s.serialize_unit(),
            Value::Array(items) => items.serialize(s),
            Value::Record(name, fields) => {
                let mut map = s.serialize_map(Some(fields.len() + 1))?;
                map.serialize_entry("$record", name)?;
                for (n, v) in fields {
                    map.serialize_entry(n, v)?;
                }
                map.end()
            }
        }
    }
}
