//! Pretty-printer for the loop-nest language. `parse(print(p))` gives back `p`
//! up to spans.

use std::fmt::Write;

use super::ast::{Access, Expr, ExprKind, LValue, Loop, Program, Stmt};

const INDENT: &str = "    ";

pub fn expr_to_string(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e, 0);
    s
}

pub fn access_to_string(a: &Access) -> String {
    let mut s = String::new();
    write_access(&mut s, a);
    s
}

fn write_access(out: &mut String, a: &Access) {
    out.push_str(&a.array);
    for sub in &a.subscripts {
        out.push('[');
        write_expr(out, sub, 0);
        out.push(']');
    }
}

/// `min_prec` is the loosest operator that may appear unparenthesized.
fn write_expr(out: &mut String, e: &Expr, min_prec: u8) {
    match &e.kind {
        ExprKind::Int(v) => write!(out, "{v}").unwrap(),
        ExprKind::Var(name) => out.push_str(name),
        ExprKind::Access(a) => write_access(out, a),
        ExprKind::Neg(inner) => {
            out.push('-');
            write_expr(out, inner, 3);
        }
        ExprKind::Binary(op, l, r) => {
            let prec = op.precedence();
            let paren = prec < min_prec;
            if paren {
                out.push('(');
            }
            write_expr(out, l, prec);
            write!(out, " {} ", op.symbol()).unwrap();
            write_expr(out, r, prec + 1);
            if paren {
                out.push(')');
            }
        }
    }
}

pub fn write_stmt(
    out: &mut String,
    stmt: &Stmt,
    depth: usize,
    rewrite: &dyn Fn(&Access) -> Option<String>,
) {
    let pad = INDENT.repeat(depth);
    match stmt {
        Stmt::For(l) => write_loop(out, l, depth, rewrite),
        Stmt::Assign {
            target, op, value, ..
        } => {
            out.push_str(&pad);
            match target {
                LValue::Scalar(name, _) => out.push_str(name),
                LValue::Array(a) => match rewrite(a) {
                    Some(s) => out.push_str(&s),
                    None => write_access(out, a),
                },
            }
            write!(out, " {} ", op.symbol()).unwrap();
            write_expr_rewritten(out, value, 0, rewrite);
            out.push_str(";\n");
        }
    }
}

fn write_expr_rewritten(
    out: &mut String,
    e: &Expr,
    min_prec: u8,
    rewrite: &dyn Fn(&Access) -> Option<String>,
) {
    match &e.kind {
        ExprKind::Access(a) => match rewrite(a) {
            Some(s) => out.push_str(&s),
            None => write_access(out, a),
        },
        ExprKind::Neg(inner) => {
            out.push('-');
            write_expr_rewritten(out, inner, 3, rewrite);
        }
        ExprKind::Binary(op, l, r) => {
            let prec = op.precedence();
            let paren = prec < min_prec;
            if paren {
                out.push('(');
            }
            write_expr_rewritten(out, l, prec, rewrite);
            write!(out, " {} ", op.symbol()).unwrap();
            write_expr_rewritten(out, r, prec + 1, rewrite);
            if paren {
                out.push(')');
            }
        }
        _ => write_expr(out, e, min_prec),
    }
}

fn write_loop(
    out: &mut String,
    l: &Loop,
    depth: usize,
    rewrite: &dyn Fn(&Access) -> Option<String>,
) {
    let pad = INDENT.repeat(depth);
    let c = &l.counter;
    write!(out, "{pad}for ({c} = ").unwrap();
    write_expr(out, &l.lower, 0);
    write!(out, "; {c} {} ", if l.inclusive { "<=" } else { "<" }).unwrap();
    write_expr(out, &l.upper, 0);
    writeln!(out, "; {c}++) {{").unwrap();
    for s in &l.body {
        write_stmt(out, s, depth + 1, rewrite);
    }
    writeln!(out, "{pad}}}").unwrap();
}

/// Everything before the function body: parameters, pragma, header.
pub fn write_prologue(out: &mut String, p: &Program) {
    if !p.params.is_empty() {
        writeln!(out, "param {};", p.params.join(", ")).unwrap();
    }
    if !p.repetition.is_empty() {
        writeln!(out, "@repetition({})", p.repetition.join(", ")).unwrap();
    }
    let decls: Vec<String> = p
        .arrays
        .iter()
        .map(|a| {
            format!(
                "{}{} : {}",
                a.name,
                "[]".repeat(a.rank),
                a.direction.keyword()
            )
        })
        .collect();
    writeln!(out, "func {}({}) {{", p.name, decls.join(", ")).unwrap();
}

pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    write_prologue(&mut out, p);
    for s in &p.body {
        write_stmt(&mut out, s, 1, &|_| None);
    }
    out.push_str("}\n");
    out
}
