use super::predicate::{Constant, PredForm, Predicate};
use crate::lang::*;

/// Folds an expression without variables or calls to a scalar constant.
pub fn fold_constant(e: &Expr) -> Option<Constant> {
    match &e.kind {
        ExprKind::Int(v) => Some(Constant::Int(*v)),
        ExprKind::Float(v) => Some(Constant::Float(*v)),
        ExprKind::Bool(b) => Some(Constant::Bool(*b)),
        ExprKind::Str(s) => Some(Constant::Str(s.clone())),
        ExprKind::Null => Some(Constant::Null),
        ExprKind::Named(c) => Some(Constant::Int(c.value())),
        ExprKind::Paren(inner) => fold_constant(inner),
        ExprKind::Unary(UnaryOp::Neg, inner) => match fold_constant(inner)? {
            Constant::Int(v) => Some(Constant::Int(v.wrapping_neg())),
            Constant::Float(v) => Some(Constant::Float(-v)),
            _ => None,
        },
        ExprKind::Unary(UnaryOp::Not, inner) => match fold_constant(inner)? {
            Constant::Bool(b) => Some(Constant::Bool(!b)),
            _ => None,
        },
        ExprKind::Binary(op, l, r) => {
            let (a, b) = (fold_constant(l)?, fold_constant(r)?);
            match (a, b) {
                (Constant::Int(x), Constant::Int(y)) => Some(Constant::Int(match op {
                    BinaryOp::Add => x.wrapping_add(y),
                    BinaryOp::Sub => x.wrapping_sub(y),
                    BinaryOp::Mul => x.wrapping_mul(y),
                    BinaryOp::Div if y != 0 => x.wrapping_div(y),
                    BinaryOp::Rem if y != 0 => x.wrapping_rem(y),
                    _ => return None,
                })),
                (Constant::Float(x), Constant::Float(y)) => Some(Constant::Float(match op {
                    BinaryOp::Add => x + y,
                    BinaryOp::Sub => x - y,
                    BinaryOp::Mul => x * y,
                    BinaryOp::Div => x / y,
                    BinaryOp::Rem => x % y,
                    _ => return None,
                })),
                _ => None,
            }
        }
        _ => None,
    }
}

fn is_var(e: &Expr, var: &str) -> bool {
    e.as_var() == Some(var)
}

/// Normalized single-variable predicates of `cond` for `var` of type `ty`,
/// one entry per occurrence.
pub fn pred_extract(cond: &Expr, var: &str, ty: &Type) -> Vec<Predicate> {
    let mut out = Vec::new();
    extract(cond, var, ty, &mut out);
    out
}

fn extract(e: &Expr, var: &str, ty: &Type, out: &mut Vec<Predicate>) {
    match &e.kind {
        ExprKind::Paren(inner) | ExprKind::Unary(UnaryOp::Not, inner) => extract(inner, var, ty, out),
        ExprKind::Binary(BinaryOp::And | BinaryOp::Or, l, r) => {
            extract(l, var, ty, out);
            extract(r, var, ty, out);
        }
        ExprKind::Binary(op, l, r) if op.is_comparison() => {
            let (op, other) = if is_var(l, var) {
                (*op, r)
            } else if is_var(r, var) {
                (op.mirrored(), l)
            } else {
                return;
            };
            let Some(v) = fold_constant(other) else { return };
            comparison(op, v, ty, out);
        }
        ExprKind::Call(name, args) if name == "equals" && args.len() == 2 => {
            let other = if is_var(&args[0], var) {
                &args[1]
            } else if is_var(&args[1], var) {
                &args[0]
            } else {
                return;
            };
            if let Some(v) = fold_constant(other) {
                out.push(Predicate::new(PredForm::EqualsConst, v, ty.clone()));
            }
        }
        ExprKind::Is(inner, t) if is_var(inner, var) => {
            out.push(Predicate::new(PredForm::TypeTest, Constant::Type(t.clone()), ty.clone()));
        }
        _ => {}
    }
}

fn comparison(op: BinaryOp, v: Constant, ty: &Type, out: &mut Vec<Predicate>) {
    let p = |form, c| Predicate::new(form, c, ty.clone());
    if let Constant::Float(f) = v {
        if !f.is_finite() {
            return;
        }
    }
    match (op, v) {
        (BinaryOp::Eq, v) => out.push(p(PredForm::EqConst, v)),
        (BinaryOp::Ne, _) => {}
        (BinaryOp::Le | BinaryOp::Gt, Constant::Int(v)) => {
            if let Some(next) = v.checked_add(1) {
                out.push(p(PredForm::Lt, Constant::Int(next)));
            }
            out.push(p(PredForm::Gt, Constant::Int(v)));
        }
        (BinaryOp::Lt | BinaryOp::Ge, Constant::Int(v)) => {
            out.push(p(PredForm::Lt, Constant::Int(v)));
            if let Some(prev) = v.checked_sub(1) {
                out.push(p(PredForm::Gt, Constant::Int(prev)));
            }
        }
        (BinaryOp::Le | BinaryOp::Gt, Constant::Float(v)) => {
            out.push(p(PredForm::Le, Constant::Float(v)));
            out.push(p(PredForm::Gt, Constant::Float(v)));
        }
        (BinaryOp::Lt | BinaryOp::Ge, Constant::Float(v)) => {
            out.push(p(PredForm::Lt, Constant::Float(v)));
            out.push(p(PredForm::Ge, Constant::Float(v)));
        }
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(cond: &str, var: &str, ty: Type) -> Vec<String> {
        pred_extract(&parse_expr(cond).unwrap(), var, &ty).iter().map(|p| p.to_string()).collect()
    }

    #[test]
    fn integer_le() {
        assert_eq!(texts("x <= 5", "x", Type::Int), ["Lt(6)", "Gt(5)"]);
    }

    #[test]
    fn integer_range() {
        assert_eq!(texts("x < 24 && x >= 0", "x", Type::Int), ["Lt(24)", "Gt(23)", "Lt(0)", "Gt(-1)"]);
    }

    #[test]
    fn negated_equals() {
        assert_eq!(texts("!(equals(s, \"a\"))", "s", Type::Str), ["EqualsConst(\"a\")"]);
    }

    #[test]
    fn symmetric_and_excluded_forms() {
        assert_eq!(texts("24 < hour", "hour", Type::Int), ["Lt(25)", "Gt(24)"]);
        assert!(texts("x != 1", "x", Type::Int).is_empty());
        assert_eq!(texts("x <= MAX_INT", "x", Type::Int), ["Gt(MAX_INT)"]);
        assert_eq!(texts("x < MIN_INT", "x", Type::Int), ["Lt(MIN_INT)"]);
        assert_eq!(texts("r > 1.0", "r", Type::Float), ["Le(1.0)", "Gt(1.0)"]);
        assert_eq!(texts("x == 2 * 3 - 1", "x", Type::Int), ["EqConst(5)"]);
        assert_eq!(texts("p is Circle", "p", Type::Record("Shape".into())), ["TypeTest(Circle)"]);
        assert!(texts("x < y", "x", Type::Int).is_empty());
        assert!(texts("x < 1 / 0", "x", Type::Int).is_empty());
    }
}
