//! Command-line driver: parse a kernel, bind parameters, synthesize channels
//! and write the spec, report and rewritten source.

mod report;

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use areole_core::affine::Bindings;
use areole_core::geometry::IntRanges;
use areole_core::pipeline::{self, Analysis};
use areole_core::synth::{OverlapKind, OverlapStatus, Strategy, SynthOptions};
use clap::Parser;
use num_bigint::BigInt;

pub use report::render_report;

pub const EXIT_OK: i32 = 0;
pub const EXIT_REJECTED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Parser)]
#[command(
    name = "areole",
    version,
    about = "Synthesize Array-OL channels (paving, pattern, fitting) from a loop nest"
)]
pub struct Cli {
    /// Kernel source file.
    pub input: PathBuf,

    /// Bind a parameter, e.g. `--param N=16`. Repeatable.
    #[arg(long = "param", value_name = "NAME=VALUE", value_parser = parse_binding)]
    pub params: Vec<(String, BigInt)>,

    /// Pattern construction for every channel.
    #[arg(long, value_name = "general|footprint-box|domain-iso", value_parser = Strategy::from_str)]
    pub strategy: Option<Strategy>,

    /// Treat output overlap as an error. Implies --check-overlap.
    #[arg(long)]
    pub strict: bool,

    /// Enumerate repetitions to detect overlapping footprints.
    #[arg(long)]
    pub check_overlap: bool,

    /// Write the JSON spec (default `<out-dir>/<stem>.spec.json`, `-` for stdout).
    #[arg(long, value_name = "PATH", num_args = 0..=1)]
    pub emit_spec: Option<Option<PathBuf>>,

    /// Write the text report (default `<out-dir>/<stem>.report.txt`).
    #[arg(long, value_name = "PATH", num_args = 0..=1)]
    pub emit_report: Option<Option<PathBuf>>,

    /// Write the rewritten kernel (default `<out-dir>/<stem>.rewrite.aol`).
    #[arg(long, value_name = "PATH", num_args = 0..=1)]
    pub emit_rewrite: Option<Option<PathBuf>>,

    /// Replace a reference's iteration domain by an inclusive box,
    /// e.g. `--user-box in#2=0..10,0..99`. Repeatable.
    #[arg(long = "user-box", value_name = "REF=LO..HI,...", value_parser = parse_user_box)]
    pub user_boxes: Vec<(String, IntRanges)>,

    /// Directory for artifacts written without an explicit path.
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out_dir: PathBuf,
}

fn parse_binding(s: &str) -> Result<(String, BigInt), String> {
    let (name, value) = s
        .split_once('=')
        .ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
    let name = name.trim();
    if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        return Err(format!("`{name}` is not a parameter name"));
    }
    let v = BigInt::from_str(value.trim()).map_err(|_| format!("`{value}` is not an integer"))?;
    Ok((name.to_string(), v))
}

fn parse_user_box(s: &str) -> Result<(String, IntRanges), String> {
    let (label, ranges) = s
        .split_once('=')
        .ok_or_else(|| format!("expected REF=LO..HI,..., got `{s}`"))?;
    let mut out = Vec::new();
    for part in ranges.split(',') {
        let (lo, hi) = part
            .split_once("..")
            .ok_or_else(|| format!("expected LO..HI, got `{part}`"))?;
        let lo = BigInt::from_str(lo.trim()).map_err(|_| format!("`{lo}` is not an integer"))?;
        let hi = BigInt::from_str(hi.trim()).map_err(|_| format!("`{hi}` is not an integer"))?;
        out.push((lo, hi));
    }
    Ok((label.trim().to_string(), out))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strictness {
    Warn,
    Strict,
}

/// Where an artifact goes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sink {
    Stdout,
    File(PathBuf),
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub input_path: PathBuf,
    pub bindings: Bindings,
    pub strategy: Option<Strategy>,
    pub strictness: Strictness,
    pub check_overlap: bool,
    pub emit_spec: Option<Sink>,
    pub emit_report: Option<Sink>,
    pub emit_rewrite: Option<Sink>,
    pub user_boxes: BTreeMap<String, IntRanges>,
}

impl RunConfig {
    pub fn from_cli(cli: Cli) -> Result<Self, String> {
        let stem = cli
            .input
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "out".into());
        let sink = |flag: Option<Option<PathBuf>>, ext: &str| {
            flag.map(|p| match p {
                Some(p) if p.as_os_str() == "-" => Sink::Stdout,
                Some(p) => Sink::File(p),
                None => Sink::File(cli.out_dir.join(format!("{stem}.{ext}"))),
            })
        };
        let mut bindings = Bindings::new();
        for (k, v) in &cli.params {
            if bindings.insert(k.clone(), v.clone()).is_some() {
                return Err(format!("parameter `{k}` bound twice"));
            }
        }
        let mut user_boxes = BTreeMap::new();
        for (k, v) in &cli.user_boxes {
            if user_boxes.insert(k.clone(), v.clone()).is_some() {
                return Err(format!("user box for `{k}` given twice"));
            }
        }
        Ok(RunConfig {
            emit_spec: sink(cli.emit_spec.clone(), "spec.json"),
            emit_report: sink(cli.emit_report.clone(), "report.txt"),
            emit_rewrite: sink(cli.emit_rewrite.clone(), "rewrite.aol"),
            input_path: cli.input,
            bindings,
            strategy: cli.strategy,
            strictness: if cli.strict {
                Strictness::Strict
            } else {
                Strictness::Warn
            },
            check_overlap: cli.check_overlap || cli.strict,
            user_boxes,
        })
    }
}

/// Parses `args` (including the program name) and runs. Help and version go
/// to `stdout` with exit 0; usage errors exit 2.
pub fn run_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            };
        }
    };
    match RunConfig::from_cli(cli) {
        Ok(config) => run(&config, stdout, stderr),
        Err(msg) => {
            let _ = writeln!(stderr, "areole: error: E_USAGE: {msg}");
            EXIT_USAGE
        }
    }
}

fn diag(
    stderr: &mut dyn Write,
    file: &Path,
    line: u32,
    col: u32,
    severity: &str,
    code: &str,
    msg: &str,
) {
    let _ = writeln!(
        stderr,
        "{}:{line}:{col}: {severity}: {code}: {msg}",
        file.display()
    );
}

fn join(v: &[BigInt]) -> String {
    let parts: Vec<String> = v.iter().map(ToString::to_string).collect();
    format!("({})", parts.join(", "))
}

fn hint(code: &str) -> &'static str {
    match code {
        "E_UNBOUNDED" => "; supply a box with --user-box REF=LO..HI,...",
        _ => "",
    }
}

type Render<'a> = dyn Fn(&Analysis) -> String + 'a;

pub fn run(config: &RunConfig, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let file = &config.input_path;
    let src = match fs::read_to_string(file) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(
                stderr,
                "{}: error: E_IO: cannot read input: {e}",
                file.display()
            );
            return EXIT_USAGE;
        }
    };
    let options = SynthOptions {
        strategy: config.strategy,
        check_overlap: config.check_overlap,
        budget: None,
        user_boxes: config.user_boxes.clone(),
    };
    let analysis = match pipeline::run(&src, &config.bindings, &options) {
        Ok(a) => a,
        Err(e) => {
            let s = e.span();
            let msg = format!("{}{}", e.message(), hint(e.code()));
            diag(stderr, file, s.line, s.col, "error", e.code(), &msg);
            return EXIT_REJECTED;
        }
    };

    let mut status = EXIT_OK;
    for rep in &analysis.channels {
        let ch = &rep.channel;
        let span = ch.refs[0].reference.span;
        if let OverlapStatus::Overlap(w) = &rep.diagnostics.overlap {
            let fatal = w.kind == OverlapKind::Output && config.strictness == Strictness::Strict;
            let msg = format!(
                "{}: repetitions {} and {} both touch cell {}",
                ch.name(),
                join(&w.first),
                join(&w.second),
                join(&w.cell)
            );
            diag(
                stderr,
                file,
                span.line,
                span.col,
                if fatal { "error" } else { "warning" },
                w.kind.code(),
                &msg,
            );
            if fatal {
                status = EXIT_REJECTED;
            }
        }
        if !rep.diagnostics.paving_shape_ok {
            let msg = format!(
                "{}: paving matrix {} is not a permuted diagonal",
                ch.name(),
                ch.paving
            );
            diag(
                stderr,
                file,
                span.line,
                span.col,
                "warning",
                "W_PAVING_SHAPE",
                &msg,
            );
        }
    }
    if status != EXIT_OK {
        return status;
    }

    let nothing_requested =
        config.emit_spec.is_none() && config.emit_report.is_none() && config.emit_rewrite.is_none();
    let report_sink = if nothing_requested {
        Some(Sink::Stdout)
    } else {
        config.emit_report.clone()
    };
    let artifacts: [(Option<&Sink>, &Render<'_>); 3] = [
        (config.emit_spec.as_ref(), &|a| a.spec().to_json()),
        (report_sink.as_ref(), &|a| {
            render_report(a, &file.display().to_string())
        }),
        (config.emit_rewrite.as_ref(), &|a| a.rewrite()),
    ];
    for (sink, render) in artifacts {
        let Some(sink) = sink else { continue };
        let text = render(&analysis);
        let written = match sink {
            Sink::Stdout => stdout.write_all(text.as_bytes()),
            Sink::File(p) => write_file(p, &text),
        };
        if let Err(e) = written {
            let target = match sink {
                Sink::Stdout => "standard output".to_string(),
                Sink::File(p) => p.display().to_string(),
            };
            let _ = writeln!(stderr, "{target}: error: E_IO: cannot write: {e}");
            return EXIT_USAGE;
        }
    }
    EXIT_OK
}

fn write_file(path: &Path, text: &str) -> std::io::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)
}
