use std::fmt::Write;

use areole_core::exact_math::IntMatrix;
use areole_core::pipeline::Analysis;
use areole_core::synth::{phi_text, OverlapKind, OverlapStatus};
use num_bigint::BigInt;

const KEY_WIDTH: usize = 18;

fn matrix_lines(m: &IntMatrix) -> Vec<String> {
    if m.rows() == 0 || m.cols() == 0 {
        return vec![format!("({}x{} empty)", m.rows(), m.cols())];
    }
    let width = m
        .entries()
        .iter()
        .map(|x| x.to_string().len())
        .max()
        .unwrap_or(1);
    (0..m.rows())
        .map(|i| {
            let cells: Vec<String> = m.row(i).iter().map(|x| format!("{x:>width$}")).collect();
            format!("[{}]", cells.join(" "))
        })
        .collect()
}

fn tuple(v: &[BigInt]) -> String {
    let parts: Vec<String> = v.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(", "))
}

fn row(out: &mut String, key: &str, lines: &[String]) {
    for (i, line) in lines.iter().enumerate() {
        let k = if i == 0 { key } else { "" };
        writeln!(out, "  {k:<KEY_WIDTH$}{line}").unwrap();
    }
}

/// Fixed-width per-channel tables.
pub fn render_report(a: &Analysis, source: &str) -> String {
    let mut out = String::new();
    writeln!(out, "areole {}", env!("CARGO_PKG_VERSION")).unwrap();
    writeln!(out, "{:<12}{} ({source})", "kernel", a.program.name).unwrap();
    let params: Vec<String> = a.bindings.iter().map(|(k, v)| format!("{k}={v}")).collect();
    writeln!(
        out,
        "{:<12}{}",
        "parameters",
        if params.is_empty() {
            "(none)".into()
        } else {
            params.join(" ")
        }
    )
    .unwrap();
    for (c, (lo, hi)) in a.repetition.counters.iter().zip(&a.repetition.bounds) {
        writeln!(out, "{:<12}{c} in [{lo}, {hi}]", "repetition").unwrap();
    }
    writeln!(out, "{:<12}{}", "channels", a.channels.len()).unwrap();

    for rep in &a.channels {
        let ch = &rep.channel;
        let d = &rep.diagnostics;
        writeln!(out).unwrap();
        writeln!(out, "channel {}", ch.name()).unwrap();
        let mode = if ch.has_write() { "write" } else { "read" };
        row(&mut out, "array", &[format!("{} ({mode})", ch.array.name)]);
        row(&mut out, "strategy", &[ch.strategy.to_string()]);
        let refs: Vec<String> = ch
            .refs
            .iter()
            .map(|r| format!("{} {}", r.reference.label(), r.reference.text))
            .collect();
        row(&mut out, "references", &refs);
        row(&mut out, "paving", &matrix_lines(&ch.paving));
        row(&mut out, "paving origin", &[tuple(&ch.paving_origin)]);
        row(&mut out, "fitting", &matrix_lines(&ch.fitting));
        let sizes: Vec<String> = ch.pattern_sizes.iter().map(ToString::to_string).collect();
        row(&mut out, "pattern", &[format!("[{}]", sizes.join(" x "))]);
        let phis: Vec<String> = ch
            .refs
            .iter()
            .map(|r| format!("{} -> {}{}", r.reference.label(), ch.name(), phi_text(r)))
            .collect();
        row(&mut out, "access", &phis);
        let overlap = match &d.overlap {
            OverlapStatus::NotChecked => "not checked".to_string(),
            OverlapStatus::Disjoint => "none".to_string(),
            OverlapStatus::Overlap(w) => format!(
                "{} at cell {} for repetitions {} and {}",
                match w.kind {
                    OverlapKind::Input => "input",
                    OverlapKind::Output => "output",
                },
                tuple(&w.cell),
                tuple(&w.first),
                tuple(&w.second)
            ),
        };
        row(&mut out, "overlap", &[overlap]);
        let ratio = d
            .overhead_ratio
            .as_ref()
            .map_or("over budget".to_string(), ToString::to_string);
        row(&mut out, "useful ratio", &[ratio]);
        if let Some(asym) = &d.overhead_asymptotic {
            row(&mut out, "asymptotic", &[asym.to_string()]);
        }
        row(
            &mut out,
            "paving shape",
            &[if d.paving_shape_ok {
                "ok"
            } else {
                "not a permuted diagonal"
            }
            .to_string()],
        );
    }
    out
}
