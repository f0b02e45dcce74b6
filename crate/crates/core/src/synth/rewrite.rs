use std::collections::HashMap;
use std::fmt::Write;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{Channel, ChannelRef};
use crate::front::print::write_stmt;
use crate::front::{Direction, Program, Span};

/// `2*k - j + 3` from coefficients over `counters` and a constant.
fn affine_text(coeffs: &[BigInt], counters: &[String], constant: &BigInt) -> String {
    let mut out = String::new();
    for (c, name) in coeffs.iter().zip(counters) {
        if c.is_zero() {
            continue;
        }
        let mag = c.abs();
        let term = if mag.is_one() {
            name.clone()
        } else {
            format!("{mag}*{name}")
        };
        if out.is_empty() {
            if c.is_negative() {
                out.push('-');
            }
        } else {
            out.push_str(if c.is_negative() { " - " } else { " + " });
        }
        out.push_str(&term);
    }
    if out.is_empty() {
        return constant.to_string();
    }
    if constant.is_positive() {
        write!(out, " + {constant}").unwrap();
    } else if constant.is_negative() {
        write!(out, " - {}", constant.abs()).unwrap();
    }
    out
}

/// Pattern coordinates of a reference as source text, e.g. `[k + j]`.
pub fn phi_text(r: &ChannelRef) -> String {
    if r.phi_shift.is_empty() {
        return "[0]".into();
    }
    let counters = &r.reference.inner_counters;
    (0..r.phi_shift.len())
        .map(|i| {
            format!(
                "[{}]",
                affine_text(r.phi_matrix.row(i), counters, &r.phi_shift[i])
            )
        })
        .collect()
}

fn vec_text(v: &[BigInt]) -> String {
    let parts: Vec<String> = v.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(", "))
}

/// Source text with every array access replaced by its pattern access, and
/// the pattern arrays declared in the function header.
pub fn rewrite_program(p: &Program, channels: &[Channel]) -> String {
    let mut replacement: HashMap<(String, Span), String> = HashMap::new();
    for ch in channels {
        for r in &ch.refs {
            replacement.insert(
                (r.reference.array.name.clone(), r.reference.span),
                format!("{}{}", ch.name(), phi_text(r)),
            );
        }
    }

    let mut out = String::new();
    if !p.params.is_empty() {
        writeln!(out, "param {};", p.params.join(", ")).unwrap();
    }
    for ch in channels {
        let refs: Vec<String> = ch.refs.iter().map(|r| r.reference.label()).collect();
        let sizes: Vec<String> = ch.pattern_sizes.iter().map(ToString::to_string).collect();
        writeln!(
            out,
            "// {}: {} via {}, {}",
            ch.name(),
            refs.join(" "),
            ch.strategy,
            if ch.has_write() { "out" } else { "in" }
        )
        .unwrap();
        writeln!(out, "//   paving {}", ch.paving).unwrap();
        writeln!(out, "//   origin {}", vec_text(&ch.paving_origin)).unwrap();
        if ch.pattern_dim() == 0 {
            writeln!(out, "//   fitting none, single-cell pattern").unwrap();
        } else {
            writeln!(out, "//   fitting {}", ch.fitting).unwrap();
            writeln!(out, "//   pattern [{}]", sizes.join(", ")).unwrap();
        }
    }
    if !p.repetition.is_empty() {
        writeln!(out, "@repetition({})", p.repetition.join(", ")).unwrap();
    }
    let decls: Vec<String> = channels
        .iter()
        .map(|ch| {
            let dir = if ch.has_write() {
                Direction::Output
            } else {
                Direction::Input
            };
            format!(
                "{}{} : {}",
                ch.name(),
                "[]".repeat(ch.pattern_dim().max(1)),
                dir.keyword()
            )
        })
        .collect();
    writeln!(out, "func {}({}) {{", p.name, decls.join(", ")).unwrap();
    let lookup =
        |a: &crate::front::ast::Access| replacement.get(&(a.array.clone(), a.span)).cloned();
    for s in &p.body {
        write_stmt(&mut out, s, 1, &lookup);
    }
    out.push_str("}\n");
    out
}
