use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::{Channel, SynthError};
use crate::exact_math::IntMatrix;
use crate::geometry::{integer_points, range_cells, ranges_iter};

/// Default cap on enumerated cells for overlap and overhead checks.
pub const ENUMERATION_BUDGET: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OverlapKind {
    /// Two repetitions read the same cell; legal but redundant.
    Input,
    /// Two repetitions touch the same cell of a channel that writes.
    Output,
}

impl OverlapKind {
    pub fn code(self) -> &'static str {
        match self {
            OverlapKind::Input => "W_OVERLAP_IN",
            OverlapKind::Output => "E_OVERLAP_OUT",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OverlapWitness {
    pub kind: OverlapKind,
    pub first: Vec<BigInt>,
    pub second: Vec<BigInt>,
    pub cell: Vec<BigInt>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OverlapStatus {
    NotChecked,
    Disjoint,
    Overlap(OverlapWitness),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Overhead {
    pub useful: BigInt,
    pub total: BigInt,
    /// `useful / total`, in `(0, 1]`.
    pub ratio: BigRational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub overlap: OverlapStatus,
    /// `None` when enumeration was over budget.
    pub overhead_ratio: Option<BigRational>,
    pub overhead_asymptotic: Option<BigRational>,
    pub paving_shape_ok: bool,
}

/// Pattern cells actually reached by some reference, sorted.
fn useful_cells(ch: &Channel, budget: u128) -> Result<BTreeSet<Vec<BigInt>>, SynthError> {
    let mut out = BTreeSet::new();
    let mut spent: u128 = 0;
    for r in &ch.refs {
        let pts = integer_points(
            &r.reference.domain,
            &ch.bindings,
            budget.saturating_sub(spent),
        )
        .map_err(|e| match e {
            crate::geometry::GeomError::BudgetExceeded(n, _) => {
                SynthError::BudgetExceeded(n.saturating_add(spent), budget)
            }
            source => SynthError::Geometry {
                label: r.reference.label(),
                source,
            },
        })?;
        spent += pts.len() as u128;
        out.extend(pts.iter().map(|j| r.phi(j)));
    }
    Ok(out)
}

/// Fraction of the pattern box that some reference touches.
pub fn overhead(ch: &Channel, budget: u128) -> Result<Overhead, SynthError> {
    let total = ch.pattern_cells();
    let useful = BigInt::from(useful_cells(ch, budget)?.len());
    if total.is_zero() {
        return Err(SynthError::EmptyChannel(ch.name()));
    }
    Ok(Overhead {
        ratio: BigRational::new(useful.clone(), total.clone()),
        useful,
        total,
    })
}

/// Looks for two distinct repetitions touching the same array cell. The
/// witness is the first collision in row-major repetition order.
pub fn check_overlap(ch: &Channel, budget: u128) -> Result<OverlapStatus, SynthError> {
    let cells: Vec<Vec<BigInt>> = useful_cells(ch, budget)?
        .iter()
        .map(|c| ch.cell_of(c))
        .collect();
    let reps = range_cells(&ch.repetition_ranges);
    let work = reps.saturating_mul(cells.len() as u128);
    if work > budget {
        return Err(SynthError::BudgetExceeded(work, budget));
    }
    let kind = if ch.has_write() {
        OverlapKind::Output
    } else {
        OverlapKind::Input
    };
    let mut owner: HashMap<Vec<BigInt>, Vec<BigInt>> = HashMap::new();
    for r in ranges_iter(&ch.repetition_ranges) {
        let base = ch.paving.apply(&r).expect("paving shape");
        for c in &cells {
            let abs: Vec<BigInt> = base.iter().zip(c).map(|(a, b)| a + b).collect();
            match owner.get(&abs) {
                Some(prev) if *prev != r => {
                    return Ok(OverlapStatus::Overlap(OverlapWitness {
                        kind,
                        first: prev.clone(),
                        second: r,
                        cell: abs,
                    }));
                }
                Some(_) => {}
                None => {
                    owner.insert(abs, r.clone());
                }
            }
        }
    }
    Ok(OverlapStatus::Disjoint)
}

/// True when each row and each column of the paving matrix has at most one
/// nonzero entry.
pub fn lint_paving(p: &IntMatrix) -> bool {
    let rows_ok = (0..p.rows()).all(|i| p.row(i).iter().filter(|x| !x.is_zero()).count() <= 1);
    let cols_ok = (0..p.cols()).all(|j| p.column(j).iter().filter(|x| !x.is_zero()).count() <= 1);
    rows_ok && cols_ok
}
