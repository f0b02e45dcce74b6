//! Expression to affine-form lowering.

use num_bigint::BigInt;
use num_traits::Zero;

use super::ast::{BinOp, Expr, ExprKind};
use super::error::{FrontError, FrontErrorKind};
use super::print::expr_to_string;
use crate::affine::{AffineExpr, LinExpr};

/// What a bare identifier means where it is used.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Ident {
    Counter,
    /// A declared parameter, with its value when bound.
    Param(Option<BigInt>),
    Unknown,
}

/// Lowers `expr` to an affine form. `classify` resolves identifiers; arrays
/// inside the expression are rejected as indirection.
pub fn lower_affine(
    expr: &Expr,
    classify: &dyn Fn(&str) -> Ident,
) -> Result<AffineExpr, FrontError> {
    match &expr.kind {
        ExprKind::Int(v) => Ok(AffineExpr::constant(LinExpr::constant(v.clone()))),
        ExprKind::Var(name) => match classify(name) {
            Ident::Counter => Ok(AffineExpr::counter(name)),
            Ident::Param(Some(v)) => Ok(AffineExpr::constant(LinExpr::constant(v))),
            Ident::Param(None) => Ok(AffineExpr::constant(LinExpr::param(name))),
            Ident::Unknown => Err(FrontError::new(
                FrontErrorKind::UnknownIdentifier,
                expr.span,
                format!("unknown identifier `{name}` (not a loop counter in scope or a declared parameter)"),
            )),
        },
        ExprKind::Access(a) => Err(FrontError::new(
            FrontErrorKind::Indirect,
            a.span,
            format!(
                "array access `{}` inside an affine expression (indirection is outside the polytope model)",
                expr_to_string(expr)
            ),
        )),
        ExprKind::Neg(inner) => Ok(lower_affine(inner, classify)?.neg()),
        ExprKind::Binary(op, l, r) => {
            let a = lower_affine(l, classify)?;
            let b = lower_affine(r, classify)?;
            let non_affine = || {
                FrontError::new(
                    FrontErrorKind::NonAffine,
                    expr.span,
                    format!("`{}` is not affine", expr_to_string(expr)),
                )
            };
            match op {
                BinOp::Add => Ok(a.add(&b)),
                BinOp::Sub => Ok(a.sub(&b)),
                BinOp::Mul => a.mul(&b).ok_or_else(non_affine),
                BinOp::Div | BinOp::Rem => {
                    let plain = |e: &AffineExpr| {
                        if e.is_counter_free() {
                            e.constant_term().as_constant().cloned()
                        } else {
                            None
                        }
                    };
                    match (plain(&a), plain(&b)) {
                        (Some(x), Some(y)) if !y.is_zero() => {
                            // C semantics: truncating division.
                            let v = if *op == BinOp::Div { x / y } else { x % y };
                            Ok(AffineExpr::constant(LinExpr::constant(v)))
                        }
                        _ => Err(non_affine()),
                    }
                }
            }
        }
    }
}
