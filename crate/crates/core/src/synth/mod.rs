//! Channel synthesis: grouping references by paving matrix and building a
//! pattern, fitting matrix and pattern-relative access for each group.
//!
//! Every channel satisfies, for each of its references `k` and every
//! iteration `j` of the reference's inner domain,
//!
//! ```text
//! paving_origin + F * phi_k(j) = b_k + B_k * j,   phi_k(j) in [0, size)
//! ```
//!
//! so the cell touched at repetition `r` is `P r + paving_origin + F phi_k(j)`.

mod diagnostics;
mod rewrite;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::affine::{Bindings, LinExpr, SymMatrix};
use crate::echelon::{echelon_2x2_symbolic, row_echelon, EchelonDecomposition, SymInt};
use crate::exact_math::{IntMatrix, RatVector};
use crate::front::{AccessKind, ArrayDecl, ArrayReference, RepetitionSpace, Span};
use crate::geometry::{
    bounding_box, combine_lattices, footprint, vertices, GeomError, IntLattice, IntRanges,
    IterationDomain,
};

pub use diagnostics::{
    check_overlap, lint_paving, overhead, Diagnostics, Overhead, OverlapKind, OverlapStatus,
    OverlapWitness, ENUMERATION_BUDGET,
};
pub use rewrite::{phi_text, rewrite_program};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Echelon decomposition of the combined reference lattice.
    General,
    /// Bounding box of the footprints with identity fitting.
    FootprintBox,
    /// The iteration box itself, with the subscript matrix as fitting.
    DomainIso,
}

impl Strategy {
    pub fn name(self) -> &'static str {
        match self {
            Strategy::General => "general",
            Strategy::FootprintBox => "footprint-box",
            Strategy::DomainIso => "domain-iso",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "general" => Ok(Strategy::General),
            "footprint-box" => Ok(Strategy::FootprintBox),
            "domain-iso" => Ok(Strategy::DomainIso),
            _ => Err(format!(
                "unknown strategy `{s}` (expected general, footprint-box or domain-iso)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthError {
    #[error("{0}")]
    Parametric(String),
    #[error("{label}: {source}")]
    Geometry {
        label: String,
        #[source]
        source: GeomError,
    },
    #[error("{0}")]
    Strategy(String),
    #[error("enumeration of {0} cells exceeds the budget of {1}")]
    BudgetExceeded(u128, u128),
    #[error("{0}: every reference of the channel has an empty iteration domain")]
    EmptyChannel(String),
}

impl SynthError {
    /// Stable machine-greppable code.
    pub fn code(&self) -> &'static str {
        match self {
            SynthError::Parametric(_) => "E_PARAMETRIC",
            SynthError::Geometry { source, .. } => match source {
                GeomError::Unbounded => "E_UNBOUNDED",
                GeomError::UnboundParameter(_) => "E_PARAMETRIC",
                GeomError::BudgetExceeded(..) => "E_BUDGET",
                _ => "E_GEOMETRY",
            },
            SynthError::Strategy(_) => "E_STRATEGY",
            SynthError::BudgetExceeded(..) => "E_BUDGET",
            SynthError::EmptyChannel(_) => "E_EMPTY",
        }
    }
}

/// References of one array sharing one paving matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceGroup {
    pub array: ArrayDecl,
    /// 1-based channel number within the array.
    pub index: usize,
    pub refs: Vec<ArrayReference>,
}

impl ReferenceGroup {
    pub fn name(&self) -> String {
        format!("{}_ch{}", self.array.name, self.index)
    }
}

/// Groups keyed by array and exact paving matrix, in order of first
/// appearance; references keep source order inside a group.
pub fn partition_by_paving(refs: &[ArrayReference]) -> Vec<ReferenceGroup> {
    let mut groups: Vec<ReferenceGroup> = Vec::new();
    for r in refs {
        match groups
            .iter_mut()
            .find(|g| g.array.name == r.array.name && g.refs[0].paving == r.paving)
        {
            Some(g) => g.refs.push(r.clone()),
            None => {
                let index = groups
                    .iter()
                    .filter(|g| g.array.name == r.array.name)
                    .count()
                    + 1;
                groups.push(ReferenceGroup {
                    array: r.array.clone(),
                    index,
                    refs: vec![r.clone()],
                });
            }
        }
    }
    groups
}

/// `x -> m x + shift`
type AffineMap = (IntMatrix, Vec<BigInt>);

/// One reference inside a channel, with its numeric subscript parts and its
/// pattern-relative access `phi(j) = matrix * j + shift`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRef {
    pub reference: ArrayReference,
    pub local: IntMatrix,
    pub origin: Vec<BigInt>,
    pub phi_matrix: IntMatrix,
    pub phi_shift: Vec<BigInt>,
}

impl ChannelRef {
    pub fn phi(&self, j: &[BigInt]) -> Vec<BigInt> {
        let mut v = self.phi_matrix.apply(j).expect("phi matches the domain");
        for (x, s) in v.iter_mut().zip(&self.phi_shift) {
            *x += s;
        }
        v
    }

    pub fn phi_rat(&self, j: &RatVector) -> RatVector {
        self.phi_matrix
            .apply_rat(j)
            .expect("phi matches the domain")
            .add_ints(&self.phi_shift)
    }

    pub fn is_write(&self) -> bool {
        self.reference.access == AccessKind::Write
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    pub array: ArrayDecl,
    pub index: usize,
    pub strategy: Strategy,
    pub refs: Vec<ChannelRef>,
    /// `|A| x |r|`
    pub paving: IntMatrix,
    pub paving_origin: Vec<BigInt>,
    pub repetition: RepetitionSpace,
    pub repetition_ranges: IntRanges,
    pub pattern_sizes: Vec<BigInt>,
    /// `|A| x pattern_dim`
    pub fitting: IntMatrix,
    /// Translation that brought the raw pattern coordinates to start at 0.
    pub pattern_shift: Vec<BigInt>,
    /// Combined reference lattice generators.
    pub combined: IntMatrix,
    pub echelon: EchelonDecomposition,
    pub bindings: Bindings,
}

impl Channel {
    pub fn name(&self) -> String {
        format!("{}_ch{}", self.array.name, self.index)
    }

    pub fn pattern_dim(&self) -> usize {
        self.pattern_sizes.len()
    }

    pub fn has_write(&self) -> bool {
        self.refs.iter().any(ChannelRef::is_write)
    }

    pub fn pattern_cells(&self) -> BigInt {
        self.pattern_sizes.iter().product()
    }

    pub fn in_pattern(&self, coords: &[BigInt]) -> bool {
        coords.len() == self.pattern_sizes.len()
            && coords
                .iter()
                .zip(&self.pattern_sizes)
                .all(|(c, s)| !c.is_negative() && c < s)
    }

    /// Array cell (relative to `P r`) reached through the pattern.
    pub fn cell_of(&self, pattern_coords: &[BigInt]) -> Vec<BigInt> {
        let mut v = self.fitting.apply(pattern_coords).expect("fitting shape");
        for (x, o) in v.iter_mut().zip(&self.paving_origin) {
            *x += o;
        }
        v
    }

    /// `1 / |det H|` when the combined lattice matrix is square and of full
    /// rank: the asymptotic fraction of useful cells in the footprint box.
    pub fn asymptotic_density(&self) -> Option<BigRational> {
        let m = &self.combined;
        (m.is_square() && m.rows() > 0 && self.echelon.rank == m.rows())
            .then(|| BigRational::new(BigInt::one(), self.echelon.h_determinant()))
    }
}

fn numeric(
    m: &SymMatrix,
    what: &str,
    label: &str,
    bindings: &Bindings,
) -> Result<IntMatrix, SynthError> {
    m.eval(bindings).map_err(|p| {
        SynthError::Parametric(format!(
            "{label}: {what} {m} depends on parameter `{p}`; bind it with --param {p}=<value>{}",
            symbolic_hint(m)
        ))
    })
}

fn sym_entry(e: &LinExpr) -> SymInt {
    match e.as_constant() {
        Some(c) => SymInt::Num(c.clone()),
        None => SymInt::Sym(format!("({e})")),
    }
}

/// Closed-form echelon shape for 1x1 and 2x2 symbolic matrices.
pub fn symbolic_echelon_text(m: &SymMatrix) -> Option<String> {
    match (m.rows(), m.cols()) {
        (1, 1) => Some(format!("[[|{}|]]", m.get(0, 0))),
        (2, 2) => {
            let e = |i, j| sym_entry(m.get(i, j));
            echelon_2x2_symbolic(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
                .ok()
                .map(|s| s.to_string())
        }
        _ => None,
    }
}

fn symbolic_hint(m: &SymMatrix) -> String {
    match symbolic_echelon_text(m) {
        Some(t) => {
            format!(" (its echelon form is {t}; a numeric pattern still needs bound parameters)")
        }
        None => String::new(),
    }
}

fn geom(label: &str) -> impl Fn(GeomError) -> SynthError + '_ {
    move |source| SynthError::Geometry {
        label: label.to_string(),
        source,
    }
}

fn sub(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Builds the channel for `group` with the requested strategy.
pub fn synthesize(
    group: &ReferenceGroup,
    strategy: Strategy,
    repetition: &RepetitionSpace,
    bindings: &Bindings,
) -> Result<Channel, SynthError> {
    let name = group.name();
    let first = &group.refs[0];
    let paving = numeric(&first.paving, "paving matrix", &first.label(), bindings)?;
    let repetition_ranges = repetition.instantiate(bindings).map_err(|p| {
        SynthError::Parametric(format!(
            "{name}: repetition bound depends on parameter `{p}`; bind it with --param {p}=<value>"
        ))
    })?;

    let mut locals = Vec::new();
    let mut origins = Vec::new();
    for r in &group.refs {
        locals.push(numeric(&r.local, "subscript matrix", &r.label(), bindings)?);
        let o = r
            .origin
            .iter()
            .map(|e| e.eval(bindings))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|p| {
                SynthError::Parametric(format!(
                    "{}: subscript origin depends on parameter `{p}`; bind it with --param {p}=<value>",
                    r.label()
                ))
            })?;
        origins.push(o);
    }

    let lattices = locals
        .iter()
        .zip(&origins)
        .map(|(b, o)| IntLattice::new(b.clone(), o.clone()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(geom(&name))?;
    let combined = combine_lattices(&lattices).map_err(geom(&name))?.gens;
    let echelon = row_echelon(&combined);

    let verts = group
        .refs
        .iter()
        .map(|r| vertices(&r.domain, bindings).map_err(geom(&r.label())))
        .collect::<Result<Vec<_>, _>>()?;
    if verts.iter().all(Vec::is_empty) {
        return Err(SynthError::EmptyChannel(name));
    }

    let b1 = &origins[0];
    let rank = b1.len();
    let (fitting, phis, raw_images): (IntMatrix, Vec<AffineMap>, Vec<RatVector>) = match strategy {
        Strategy::General => {
            let fitting = echelon.fitting();
            let u_prime = echelon.u_prime();
            let total_depth: usize = locals.iter().map(IntMatrix::cols).sum();
            let mut offset = 0;
            let mut phis = Vec::new();
            for (k, b) in locals.iter().enumerate() {
                let m = u_prime.col_block(offset..offset + b.cols());
                offset += b.cols();
                let shift = if k == 0 {
                    vec![BigInt::zero(); echelon.rank]
                } else {
                    u_prime.column(total_depth + k - 1)
                };
                phis.push((m, shift));
            }
            let images = image_points(&phis, &verts);
            (fitting, phis, images)
        }
        Strategy::FootprintBox => {
            let mut phis = Vec::new();
            for (k, (b, o)) in locals.iter().zip(&origins).enumerate() {
                if !verts[k].is_empty() {
                    // Same images as the footprint of B_k with origin b_k - b_1.
                    footprint(b, &sub(o, b1), &group.refs[k].domain, bindings)
                        .map_err(geom(&group.refs[k].label()))?;
                }
                phis.push((b.clone(), sub(o, b1)));
            }
            let images = image_points(&phis, &verts);
            (IntMatrix::identity(rank), phis, images)
        }
        Strategy::DomainIso => {
            if group.refs.len() != 1 {
                return Err(SynthError::Strategy(format!(
                    "{name}: domain-iso needs a single-reference channel, this one has {}",
                    group.refs.len()
                )));
            }
            let Some(ranges) = first
                .domain
                .box_ranges(bindings)
                .map_err(geom(&first.label()))?
            else {
                return Err(SynthError::Strategy(format!(
                    "{name}: domain-iso needs a rectangular iteration domain"
                )));
            };
            let d = ranges.len();
            let lower: Vec<BigInt> = ranges.iter().map(|(l, _)| l.clone()).collect();
            let phis = vec![(IntMatrix::identity(d), vec![BigInt::zero(); d])];
            let images = vec![
                RatVector::from_ints(&lower),
                RatVector::from_ints(&ranges.iter().map(|(_, h)| h.clone()).collect::<Vec<_>>()),
            ];
            (locals[0].clone(), phis, images)
        }
    };

    let bbox = bounding_box(&raw_images).map_err(geom(&name))?;
    let pattern_shift: Vec<BigInt> = bbox.iter().map(|(lo, _)| -lo).collect();
    let pattern_sizes: Vec<BigInt> = bbox.iter().map(|(lo, hi)| hi - lo + 1).collect();
    let folded = fitting.apply(&pattern_shift).expect("fitting shape");
    let paving_origin = sub(b1, &folded);

    let refs = group
        .refs
        .iter()
        .zip(locals)
        .zip(origins)
        .zip(phis)
        .map(
            |(((reference, local), origin), (phi_matrix, shift))| ChannelRef {
                reference: reference.clone(),
                local,
                origin,
                phi_matrix,
                phi_shift: shift
                    .iter()
                    .zip(&pattern_shift)
                    .map(|(a, b)| a + b)
                    .collect(),
            },
        )
        .collect();

    Ok(Channel {
        array: group.array.clone(),
        index: group.index,
        strategy,
        refs,
        paving,
        paving_origin,
        repetition: repetition.clone(),
        repetition_ranges,
        pattern_sizes,
        fitting,
        pattern_shift,
        combined,
        echelon,
        bindings: bindings.clone(),
    })
}

/// Images of every reference's domain vertices under its raw affine map.
fn image_points(phis: &[AffineMap], verts: &[Vec<RatVector>]) -> Vec<RatVector> {
    phis.iter()
        .zip(verts)
        .flat_map(|((m, shift), vs)| {
            vs.iter().map(move |v| {
                m.apply_rat(v)
                    .expect("phi matches the domain")
                    .add_ints(shift)
            })
        })
        .collect()
}

/// Options for [`synthesize_all`].
#[derive(Debug, Clone, Default)]
pub struct SynthOptions {
    /// Strategy for every channel; `None` picks the default.
    pub strategy: Option<Strategy>,
    pub check_overlap: bool,
    pub budget: Option<u128>,
    /// Replacement iteration boxes keyed by reference label (`in#2`).
    pub user_boxes: BTreeMap<String, IntRanges>,
}

/// A synthesized channel with its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelReport {
    pub channel: Channel,
    pub diagnostics: Diagnostics,
}

/// Default strategy: the general construction. It needs the same numeric
/// inputs as the footprint box, so there is nothing to fall back to when it
/// fails on parameters.
pub fn default_strategy() -> Strategy {
    Strategy::General
}

/// Partitions `refs`, synthesizes every channel in group order and runs the
/// diagnostics.
pub fn synthesize_all(
    refs: &[ArrayReference],
    repetition: &RepetitionSpace,
    bindings: &Bindings,
    options: &SynthOptions,
) -> Result<Vec<ChannelReport>, (Span, SynthError)> {
    let budget = options.budget.unwrap_or(ENUMERATION_BUDGET);
    let strategy = options.strategy.unwrap_or_else(default_strategy);
    let mut refs = refs.to_vec();
    for r in &mut refs {
        if let Some(bounds) = options.user_boxes.get(&r.label()) {
            if bounds.len() != r.depth() {
                return Err((
                    r.span,
                    SynthError::Strategy(format!(
                        "{}: user box has {} ranges but the reference has {} inner loops",
                        r.label(),
                        bounds.len(),
                        r.depth()
                    )),
                ));
            }
            r.domain = IterationDomain::UserBox {
                bounds: bounds.clone(),
            };
        }
    }
    let mut out = Vec::new();
    for group in partition_by_paving(&refs) {
        let span = group.refs[0].span;
        let channel = synthesize(&group, strategy, repetition, bindings).map_err(|e| (span, e))?;
        let overlap = if options.check_overlap {
            check_overlap(&channel, budget).map_err(|e| (span, e))?
        } else {
            OverlapStatus::NotChecked
        };
        let overhead = overhead(&channel, budget).ok();
        let diagnostics = Diagnostics {
            overlap,
            overhead_ratio: overhead.as_ref().map(|o| o.ratio.clone()),
            overhead_asymptotic: channel.asymptotic_density(),
            paving_shape_ok: lint_paving(&channel.paving),
        };
        out.push(ChannelReport {
            channel,
            diagnostics,
        });
    }
    Ok(out)
}
