//! The machine-readable specification document (JSON, `spec_version` 1).
//!
//! Integers are written as decimal strings so that values beyond 64 bits
//! survive consumers that parse JSON numbers as doubles.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::affine::Bindings;
use crate::exact_math::IntMatrix;
use crate::front::{AccessKind, Direction, Program, RepetitionSpace};
use crate::synth::{Channel, ChannelReport, Diagnostics, OverlapKind, OverlapStatus, Strategy};

pub const SPEC_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("malformed spec document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported spec_version {0} (expected {SPEC_VERSION})")]
    Version(u32),
    #[error("{0}")]
    Shape(String),
}

/// Arbitrary-precision integer serialized as a decimal string.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct DecInt(pub BigInt);

impl TryFrom<String> for DecInt {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        BigInt::from_str(&s)
            .map(DecInt)
            .map_err(|_| format!("`{s}` is not a decimal integer"))
    }
}

impl From<DecInt> for String {
    fn from(d: DecInt) -> String {
        d.0.to_string()
    }
}

impl From<&BigInt> for DecInt {
    fn from(v: &BigInt) -> Self {
        DecInt(v.clone())
    }
}

/// Exact rational serialized as `"n/d"` (or `"n"` when integral).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct DecRatio(pub BigRational);

impl TryFrom<String> for DecRatio {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        let bad = || format!("`{s}` is not a rational of the form n/d");
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n, d),
            None => (s.as_str(), "1"),
        };
        let n = BigInt::from_str(n).map_err(|_| bad())?;
        let d = BigInt::from_str(d).map_err(|_| bad())?;
        if d == BigInt::from(0) {
            return Err(bad());
        }
        Ok(DecRatio(BigRational::new(n, d)))
    }
}

impl From<DecRatio> for String {
    fn from(r: DecRatio) -> String {
        r.0.to_string()
    }
}

fn dec_vec(v: &[BigInt]) -> Vec<DecInt> {
    v.iter().map(DecInt::from).collect()
}

fn big_vec(v: &[DecInt]) -> Vec<BigInt> {
    v.iter().map(|d| d.0.clone()).collect()
}

/// Row-major integer matrix with its shape.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixSpec {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<DecInt>,
}

impl From<&IntMatrix> for MatrixSpec {
    fn from(m: &IntMatrix) -> Self {
        MatrixSpec {
            rows: m.rows(),
            cols: m.cols(),
            data: dec_vec(m.entries()),
        }
    }
}

impl MatrixSpec {
    pub fn to_matrix(&self) -> Result<IntMatrix, SpecError> {
        if self.data.len() != self.rows * self.cols {
            return Err(SpecError::Shape(format!(
                "{}x{} matrix with {} entries",
                self.rows,
                self.cols,
                self.data.len()
            )));
        }
        Ok(IntMatrix::from_vec(
            self.rows,
            self.cols,
            big_vec(&self.data),
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArraySpec {
    pub name: String,
    pub rank: usize,
    pub direction: Direction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RepetitionSpec {
    pub counters: Vec<String>,
    /// Inclusive `[lower, upper]` per counter, as source expressions.
    pub bounds: Vec<[String; 2]>,
}

impl From<&RepetitionSpace> for RepetitionSpec {
    fn from(r: &RepetitionSpace) -> Self {
        RepetitionSpec {
            counters: r.counters.clone(),
            bounds: r
                .bounds
                .iter()
                .map(|(lo, hi)| [lo.to_string(), hi.to_string()])
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhiSpec {
    pub matrix: MatrixSpec,
    pub shift: Vec<DecInt>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RefSpec {
    pub label: String,
    pub occurrence: usize,
    pub access: AccessKind,
    pub text: String,
    pub inner_counters: Vec<String>,
    pub local: MatrixSpec,
    pub origin: Vec<DecInt>,
    pub phi: PhiSpec,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum OverlapSpec {
    NotChecked,
    None,
    InputOverlap {
        first: Vec<DecInt>,
        second: Vec<DecInt>,
        cell: Vec<DecInt>,
    },
    OutputOverlap {
        first: Vec<DecInt>,
        second: Vec<DecInt>,
        cell: Vec<DecInt>,
    },
}

impl From<&OverlapStatus> for OverlapSpec {
    fn from(s: &OverlapStatus) -> Self {
        match s {
            OverlapStatus::NotChecked => OverlapSpec::NotChecked,
            OverlapStatus::Disjoint => OverlapSpec::None,
            OverlapStatus::Overlap(w) => {
                let (first, second, cell) =
                    (dec_vec(&w.first), dec_vec(&w.second), dec_vec(&w.cell));
                match w.kind {
                    OverlapKind::Input => OverlapSpec::InputOverlap {
                        first,
                        second,
                        cell,
                    },
                    OverlapKind::Output => OverlapSpec::OutputOverlap {
                        first,
                        second,
                        cell,
                    },
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagnosticsSpec {
    pub overlap: OverlapSpec,
    pub overhead_ratio: Option<DecRatio>,
    pub overhead_asymptotic: Option<DecRatio>,
    pub paving_shape_ok: bool,
}

impl From<&Diagnostics> for DiagnosticsSpec {
    fn from(d: &Diagnostics) -> Self {
        DiagnosticsSpec {
            overlap: OverlapSpec::from(&d.overlap),
            overhead_ratio: d.overhead_ratio.clone().map(DecRatio),
            overhead_asymptotic: d.overhead_asymptotic.clone().map(DecRatio),
            paving_shape_ok: d.paving_shape_ok,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub name: String,
    pub array: String,
    pub strategy: Strategy,
    pub paving: MatrixSpec,
    pub paving_origin: Vec<DecInt>,
    pub pattern_sizes: Vec<DecInt>,
    pub pattern_shift: Vec<DecInt>,
    pub fitting: MatrixSpec,
    pub refs: Vec<RefSpec>,
    pub diagnostics: DiagnosticsSpec,
}

impl ChannelSpec {
    pub fn new(ch: &Channel, diagnostics: &Diagnostics) -> Self {
        ChannelSpec {
            name: ch.name(),
            array: ch.array.name.clone(),
            strategy: ch.strategy,
            paving: MatrixSpec::from(&ch.paving),
            paving_origin: dec_vec(&ch.paving_origin),
            pattern_sizes: dec_vec(&ch.pattern_sizes),
            pattern_shift: dec_vec(&ch.pattern_shift),
            fitting: MatrixSpec::from(&ch.fitting),
            refs: ch
                .refs
                .iter()
                .map(|r| RefSpec {
                    label: r.reference.label(),
                    occurrence: r.reference.occurrence,
                    access: r.reference.access,
                    text: r.reference.text.clone(),
                    inner_counters: r.reference.inner_counters.clone(),
                    local: MatrixSpec::from(&r.local),
                    origin: dec_vec(&r.origin),
                    phi: PhiSpec {
                        matrix: MatrixSpec::from(&r.phi_matrix),
                        shift: dec_vec(&r.phi_shift),
                    },
                })
                .collect(),
            diagnostics: DiagnosticsSpec::from(diagnostics),
        }
    }

    /// True when the loaded numbers agree with a synthesized channel.
    pub fn describes(&self, ch: &Channel) -> bool {
        let loaded = (|| -> Result<bool, SpecError> {
            let same_refs = self.refs.len() == ch.refs.len()
                && self.refs.iter().zip(&ch.refs).all(|(s, r)| {
                    s.local.to_matrix().ok().as_ref() == Some(&r.local)
                        && big_vec(&s.origin) == r.origin
                        && s.phi.matrix.to_matrix().ok().as_ref() == Some(&r.phi_matrix)
                        && big_vec(&s.phi.shift) == r.phi_shift
                        && s.occurrence == r.reference.occurrence
                        && s.access == r.reference.access
                });
            Ok(self.name == ch.name()
                && self.strategy == ch.strategy
                && self.paving.to_matrix()? == ch.paving
                && self.fitting.to_matrix()? == ch.fitting
                && big_vec(&self.paving_origin) == ch.paving_origin
                && big_vec(&self.pattern_sizes) == ch.pattern_sizes
                && big_vec(&self.pattern_shift) == ch.pattern_shift
                && same_refs)
        })();
        loaded.unwrap_or(false)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpecDocument {
    pub spec_version: u32,
    pub program: String,
    pub parameters: BTreeMap<String, DecInt>,
    pub arrays: Vec<ArraySpec>,
    pub repetition: RepetitionSpec,
    pub channels: Vec<ChannelSpec>,
}

impl SpecDocument {
    pub fn new(
        program: &Program,
        repetition: &RepetitionSpace,
        bindings: &Bindings,
        reports: &[ChannelReport],
    ) -> Self {
        SpecDocument {
            spec_version: SPEC_VERSION,
            program: program.name.clone(),
            parameters: bindings
                .iter()
                .map(|(k, v)| (k.clone(), DecInt::from(v)))
                .collect(),
            arrays: program
                .arrays
                .iter()
                .map(|a| ArraySpec {
                    name: a.name.clone(),
                    rank: a.rank,
                    direction: a.direction,
                })
                .collect(),
            repetition: RepetitionSpec::from(repetition),
            channels: reports
                .iter()
                .map(|r| ChannelSpec::new(&r.channel, &r.diagnostics))
                .collect(),
        }
    }

    /// Pretty-printed JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("spec documents always serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, SpecError> {
        let doc: SpecDocument = serde_json::from_str(text)?;
        if doc.spec_version != SPEC_VERSION {
            return Err(SpecError::Version(doc.spec_version));
        }
        for ch in &doc.channels {
            ch.paving.to_matrix()?;
            ch.fitting.to_matrix()?;
            for r in &ch.refs {
                r.local.to_matrix()?;
                r.phi.matrix.to_matrix()?;
            }
        }
        Ok(doc)
    }
}

impl fmt::Display for SpecDocument {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_json())
    }
}
