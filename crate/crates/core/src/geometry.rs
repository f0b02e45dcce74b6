//! Iteration domains, vertices, footprints and integer lattices.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::affine::{Bindings, LinExpr};
use crate::echelon::row_echelon;
use crate::exact_math::{rational_solve, IntMatrix, MathError, RatVector};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeomError {
    #[error("parameter `{0}` must be bound to a value")]
    UnboundParameter(String),
    #[error("iteration domain is unbounded (or not provably bounded); supply a user box")]
    Unbounded,
    #[error("iteration domain is empty")]
    EmptyDomain,
    #[error("bounding box of an empty point set")]
    EmptyPointSet,
    #[error("enumeration of {0} points exceeds the budget of {1}")]
    BudgetExceeded(u128, u128),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

impl From<MathError> for GeomError {
    fn from(e: MathError) -> Self {
        GeomError::DimensionMismatch(e.to_string())
    }
}

/// `coeffs . j + constant >= 0`
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Inequality {
    pub coeffs: Vec<BigInt>,
    pub constant: LinExpr,
}

/// Inclusive integer range per dimension.
pub type IntRanges = Vec<(BigInt, BigInt)>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum IterationDomain {
    /// Independent inclusive bounds per counter; parameters allowed.
    Box { bounds: Vec<(LinExpr, LinExpr)> },
    /// General polyhedron given by inequalities over the counters.
    HPoly {
        dim: usize,
        constraints: Vec<Inequality>,
    },
    /// Explicit numeric bounds supplied by the user.
    UserBox { bounds: IntRanges },
}

impl IterationDomain {
    pub fn dim(&self) -> usize {
        match self {
            IterationDomain::Box { bounds } => bounds.len(),
            IterationDomain::HPoly { dim, .. } => *dim,
            IterationDomain::UserBox { bounds } => bounds.len(),
        }
    }

    /// Numeric per-dimension ranges for the box variants; `None` for `HPoly`.
    pub fn box_ranges(&self, bindings: &Bindings) -> Result<Option<IntRanges>, GeomError> {
        match self {
            IterationDomain::Box { bounds } => bounds
                .iter()
                .map(|(lo, hi)| Ok((eval(lo, bindings)?, eval(hi, bindings)?)))
                .collect::<Result<Vec<_>, _>>()
                .map(Some),
            IterationDomain::UserBox { bounds } => Ok(Some(bounds.clone())),
            IterationDomain::HPoly { .. } => Ok(None),
        }
    }

    /// Parameters the domain needs bound.
    pub fn params(&self) -> Vec<String> {
        let mut out = BTreeSet::new();
        match self {
            IterationDomain::Box { bounds } => {
                for (lo, hi) in bounds {
                    out.extend(lo.params().map(str::to_string));
                    out.extend(hi.params().map(str::to_string));
                }
            }
            IterationDomain::HPoly { constraints, .. } => {
                for c in constraints {
                    out.extend(c.constant.params().map(str::to_string));
                }
            }
            IterationDomain::UserBox { .. } => {}
        }
        out.into_iter().collect()
    }
}

impl fmt::Display for IterationDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IterationDomain::Box { bounds } => {
                let parts: Vec<String> =
                    bounds.iter().map(|(l, h)| format!("[{l}, {h}]")).collect();
                write!(f, "box {}", parts.join(" x "))
            }
            IterationDomain::UserBox { bounds } => {
                let parts: Vec<String> =
                    bounds.iter().map(|(l, h)| format!("[{l}, {h}]")).collect();
                write!(f, "user box {}", parts.join(" x "))
            }
            IterationDomain::HPoly { dim, constraints } => {
                write!(
                    f,
                    "polyhedron in {dim} dims with {} constraints",
                    constraints.len()
                )
            }
        }
    }
}

fn eval(e: &LinExpr, bindings: &Bindings) -> Result<BigInt, GeomError> {
    e.eval(bindings).map_err(GeomError::UnboundParameter)
}

fn box_corners(ranges: &[(BigInt, BigInt)]) -> Vec<RatVector> {
    if ranges.iter().any(|(lo, hi)| lo > hi) {
        return Vec::new();
    }
    let mut corners: Vec<Vec<BigInt>> = vec![Vec::new()];
    for (lo, hi) in ranges {
        let mut next = Vec::with_capacity(corners.len() * 2);
        for c in &corners {
            for v in [lo, hi] {
                let mut c = c.clone();
                c.push(v.clone());
                if !next.contains(&c) {
                    next.push(c);
                }
            }
        }
        corners = next;
    }
    corners.iter().map(|c| RatVector::from_ints(c)).collect()
}

/// Index subsets of `0..n` with exactly `k` elements, in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Is `target` a nonnegative combination of `gens`? By Caratheodory it is iff
/// it is one of a linearly independent subset, so try every subset of size
/// at most the dimension.
fn in_cone(gens: &[Vec<BigInt>], target: &[BigInt]) -> bool {
    let dim = target.len();
    if target.iter().all(Zero::is_zero) {
        return true;
    }
    let rhs = RatVector::from_ints(target);
    for k in 1..=dim.min(gens.len()) {
        for subset in combinations(gens.len(), k) {
            let mut m = IntMatrix::zeros(dim, k);
            for (col, &g) in subset.iter().enumerate() {
                for row in 0..dim {
                    m[(row, col)] = gens[g][row].clone();
                }
            }
            if let Ok(Some(lambda)) = rational_solve(&m, &rhs) {
                if lambda.coords().iter().all(|c| !c.is_negative()) {
                    return true;
                }
            }
        }
    }
    false
}

/// `{x : A x >= 0}` is trivial iff the constraint normals positively span
/// every signed axis direction.
fn is_bounded(dim: usize, normals: &[Vec<BigInt>]) -> bool {
    (0..dim).all(|axis| {
        [BigInt::one(), -BigInt::one()].iter().all(|s| {
            let mut t = vec![BigInt::zero(); dim];
            t[axis] = s.clone();
            in_cone(normals, &t)
        })
    })
}

fn hpoly_vertices(
    dim: usize,
    constraints: &[Inequality],
    bindings: &Bindings,
) -> Result<Vec<RatVector>, GeomError> {
    let rows: Vec<(Vec<BigInt>, BigInt)> = constraints
        .iter()
        .map(|c| {
            if c.coeffs.len() != dim {
                return Err(GeomError::DimensionMismatch(format!(
                    "constraint over {} counters in a {dim}-dimensional domain",
                    c.coeffs.len()
                )));
            }
            Ok((c.coeffs.clone(), eval(&c.constant, bindings)?))
        })
        .collect::<Result<_, _>>()?;
    let feasible = |x: &RatVector| {
        rows.iter().all(|(a, c)| {
            let lhs = a
                .iter()
                .zip(x.coords())
                .map(|(ai, xi)| BigRational::from_integer(ai.clone()) * xi)
                .fold(BigRational::from_integer(c.clone()), |acc, t| acc + t);
            !lhs.is_negative()
        })
    };
    if dim == 0 {
        let origin = RatVector::new(Vec::new());
        return Ok(if feasible(&origin) {
            vec![origin]
        } else {
            Vec::new()
        });
    }
    let normals: Vec<Vec<BigInt>> = rows.iter().map(|(a, _)| a.clone()).collect();
    if !is_bounded(dim, &normals) {
        return Err(GeomError::Unbounded);
    }
    let mut found = BTreeSet::new();
    for subset in combinations(rows.len(), dim) {
        let mut m = IntMatrix::zeros(dim, dim);
        let mut rhs = Vec::with_capacity(dim);
        for (r, &idx) in subset.iter().enumerate() {
            for c in 0..dim {
                m[(r, c)] = rows[idx].0[c].clone();
            }
            rhs.push(-rows[idx].1.clone());
        }
        if let Ok(Some(x)) = rational_solve(&m, &RatVector::from_ints(&rhs)) {
            if feasible(&x) {
                found.insert(x.coords().to_vec());
            }
        }
    }
    Ok(found.into_iter().map(RatVector::new).collect())
}

/// Vertices of the domain. Boxes give their corners (first dimension
/// slowest); polyhedra give every feasible basic point, sorted.
pub fn vertices(d: &IterationDomain, bindings: &Bindings) -> Result<Vec<RatVector>, GeomError> {
    match d {
        IterationDomain::HPoly { dim, constraints } => hpoly_vertices(*dim, constraints, bindings),
        _ => Ok(box_corners(&d.box_ranges(bindings)?.expect("box variant"))),
    }
}

/// Integer points of the domain, refusing to enumerate more than `budget`.
pub fn integer_points(
    d: &IterationDomain,
    bindings: &Bindings,
    budget: u128,
) -> Result<Vec<Vec<BigInt>>, GeomError> {
    let (ranges, filter) = match d {
        IterationDomain::HPoly { constraints, .. } => {
            let verts = vertices(d, bindings)?;
            if verts.is_empty() {
                return Ok(Vec::new());
            }
            let rows: Vec<(Vec<BigInt>, BigInt)> = constraints
                .iter()
                .map(|c| Ok((c.coeffs.clone(), eval(&c.constant, bindings)?)))
                .collect::<Result<_, GeomError>>()?;
            (bounding_box(&verts)?, Some(rows))
        }
        _ => (d.box_ranges(bindings)?.expect("box variant"), None),
    };
    let count = range_cells(&ranges);
    if count > budget {
        return Err(GeomError::BudgetExceeded(count, budget));
    }
    let mut out = Vec::new();
    for p in ranges_iter(&ranges) {
        let keep = filter.as_ref().is_none_or(|rows| {
            rows.iter().all(|(a, c)| {
                let v: BigInt = a.iter().zip(&p).map(|(x, y)| x * y).sum::<BigInt>() + c;
                !v.is_negative()
            })
        });
        if keep {
            out.push(p);
        }
    }
    Ok(out)
}

/// Number of integer points in a box; 0 if any range is empty.
pub fn range_cells(ranges: &[(BigInt, BigInt)]) -> u128 {
    let mut total: u128 = 1;
    for (lo, hi) in ranges {
        if lo > hi {
            return 0;
        }
        let n = (hi - lo + BigInt::one()).to_u128().unwrap_or(u128::MAX);
        total = total.saturating_mul(n);
    }
    total
}

/// Row-major iteration over the integer points of a box.
pub fn ranges_iter(ranges: &[(BigInt, BigInt)]) -> impl Iterator<Item = Vec<BigInt>> + '_ {
    let empty = ranges.iter().any(|(lo, hi)| lo > hi);
    let mut cur: Option<Vec<BigInt>> = if empty {
        None
    } else {
        Some(ranges.iter().map(|(lo, _)| lo.clone()).collect())
    };
    std::iter::from_fn(move || {
        let out = cur.clone()?;
        let mut next = out.clone();
        let mut k = ranges.len();
        loop {
            if k == 0 {
                cur = None;
                break;
            }
            k -= 1;
            if next[k] < ranges[k].1 {
                next[k] += 1;
                cur = Some(next);
                break;
            }
            next[k] = ranges[k].0.clone();
        }
        Some(out)
    })
}

/// Images of the domain vertices under `j -> b j + origin`, with their
/// integer bounding box.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Footprint {
    pub vertex_images: Vec<RatVector>,
    pub bbox: IntRanges,
}

pub fn footprint(
    b: &IntMatrix,
    origin: &[BigInt],
    d: &IterationDomain,
    bindings: &Bindings,
) -> Result<Footprint, GeomError> {
    if b.cols() != d.dim() || b.rows() != origin.len() {
        return Err(GeomError::DimensionMismatch(format!(
            "{}x{} subscript matrix, origin of length {}, {}-dimensional domain",
            b.rows(),
            b.cols(),
            origin.len(),
            d.dim()
        )));
    }
    let verts = vertices(d, bindings)?;
    if verts.is_empty() {
        return Err(GeomError::EmptyDomain);
    }
    let vertex_images = verts
        .iter()
        .map(|v| Ok(b.apply_rat(v)?.add_ints(origin)))
        .collect::<Result<Vec<_>, GeomError>>()?;
    let bbox = bounding_box(&vertex_images)?;
    Ok(Footprint {
        vertex_images,
        bbox,
    })
}

/// Per-dimension `[floor(min), ceil(max)]`.
pub fn bounding_box(points: &[RatVector]) -> Result<IntRanges, GeomError> {
    let first = points.first().ok_or(GeomError::EmptyPointSet)?;
    let dim = first.dim();
    let mut out = Vec::with_capacity(dim);
    for k in 0..dim {
        let mut lo = first.coords()[k].clone();
        let mut hi = lo.clone();
        for p in points {
            if p.dim() != dim {
                return Err(GeomError::DimensionMismatch(
                    "points of mixed dimension".into(),
                ));
            }
            let v = &p.coords()[k];
            if v < &lo {
                lo = v.clone();
            }
            if v > &hi {
                hi = v.clone();
            }
        }
        out.push((lo.floor().to_integer(), hi.ceil().to_integer()));
    }
    Ok(out)
}

/// The set `{ gens * x + origin }`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntLattice {
    pub gens: IntMatrix,
    pub origin: Vec<BigInt>,
}

impl IntLattice {
    pub fn new(gens: IntMatrix, origin: Vec<BigInt>) -> Result<Self, GeomError> {
        if gens.rows() != origin.len() {
            return Err(GeomError::DimensionMismatch(format!(
                "{} generator rows with an origin of length {}",
                gens.rows(),
                origin.len()
            )));
        }
        Ok(IntLattice { gens, origin })
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }
}

/// `[B1 .. BN (b2 - b1) .. (bN - b1)]` with origin `b1`: a lattice containing
/// every input lattice.
pub fn combine_lattices(lats: &[IntLattice]) -> Result<IntLattice, GeomError> {
    let first = lats
        .first()
        .ok_or_else(|| GeomError::DimensionMismatch("no lattices to combine".into()))?;
    let dim = first.dim();
    if let Some(bad) = lats.iter().find(|l| l.dim() != dim) {
        return Err(GeomError::DimensionMismatch(format!(
            "lattices in {} and {} dimensions",
            dim,
            bad.dim()
        )));
    }
    let mut gens = IntMatrix::zeros(dim, 0);
    for l in lats {
        gens = gens.hcat(&l.gens)?;
    }
    for l in &lats[1..] {
        let diff: Vec<BigInt> = l
            .origin
            .iter()
            .zip(&first.origin)
            .map(|(a, b)| a - b)
            .collect();
        gens = gens.hcat(&IntMatrix::column_vector(&diff))?;
    }
    Ok(IntLattice {
        gens,
        origin: first.origin.clone(),
    })
}

/// Is `p` of the form `gens * x + origin` for some integer `x`?
///
/// Uses `gens = P [[H, 0], [C, 0]] U`: with `y = U x` (integral iff `x` is),
/// solve `[H; C] y' = P^T (p - origin)` by forward substitution on `H` and
/// check the `C` rows.
pub fn lattice_member(l: &IntLattice, p: &[BigInt]) -> bool {
    if p.len() != l.dim() {
        return false;
    }
    let target: Vec<BigInt> = p.iter().zip(&l.origin).map(|(a, b)| a - b).collect();
    let dec = row_echelon(&l.gens);
    let q = dec
        .p_mat
        .transpose()
        .apply(&target)
        .expect("P is square over the lattice dimension");
    let r = dec.rank;
    let mut y: Vec<BigInt> = Vec::with_capacity(r);
    for (i, qi) in q.iter().enumerate().take(r) {
        let mut acc = qi.clone();
        for (j, yj) in y.iter().enumerate() {
            acc -= &dec.h_mat[(i, j)] * yj;
        }
        let (quot, rem) = acc.div_rem(&dec.h_mat[(i, i)]);
        if !rem.is_zero() {
            return false;
        }
        y.push(quot);
    }
    (0..dec.c_mat.rows()).all(|i| {
        let v: BigInt = (0..r).map(|j| &dec.c_mat[(i, j)] * &y[j]).sum();
        v == q[r + i]
    })
}
