//! Row echelon decomposition `B = P * [[H, 0], [C, 0]] * U`.
//!
//! `P` is a permutation, `U` is unimodular and `H` is lower triangular with a
//! positive diagonal. The construction keeps the invariant `B = P * B' * U`
//! while applying elementary unimodular transforms to the working matrix `B'`:
//! row swaps (accumulated into `P`), column sign flips, column swaps and
//! column reductions (accumulated into `U`).

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::exact_math::{gcd_bezout, IntMatrix};

/// Hard cap on elementary steps. The Euclidean reduction shrinks the pivot at
/// every pass, so reaching this means a bug, not a large input.
pub const STEP_LIMIT: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EchelonError {
    #[error("degenerate 2x2 form: first row is zero, gcd(a, b) = 0")]
    Degenerate,
    #[error("symbolic echelon form is only available for 1x1 and 2x2 matrices, got {0}x{1}")]
    UnsupportedShape(usize, usize),
    #[error("lattice oracle refused: {0} candidate points exceed the budget")]
    BudgetExceeded(u128),
    #[error("lattice oracle: {0}")]
    Invalid(String),
}

/// Whether to reduce the entries left of each pivot once the appendix-style
/// elimination is done.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reduction {
    /// Stop as soon as the working matrix is in echelon shape.
    None,
    /// Additionally bring every entry left of a pivot into `[0, pivot)`.
    /// Unimodular inputs then decompose with `H = I`.
    #[default]
    OffDiagonal,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EchelonDecomposition {
    pub p_mat: IntMatrix,
    pub h_mat: IntMatrix,
    pub c_mat: IntMatrix,
    pub u_mat: IntMatrix,
    pub rank: usize,
    /// Elementary transforms applied.
    pub steps: usize,
}

impl EchelonDecomposition {
    /// First `rank` rows of `U`.
    pub fn u_prime(&self) -> IntMatrix {
        self.u_mat.row_block(0..self.rank)
    }

    /// Remaining rows of `U`.
    pub fn u_dprime(&self) -> IntMatrix {
        self.u_mat.row_block(self.rank..self.u_mat.rows())
    }

    /// `[H; C]`, the nonzero columns of the middle factor.
    pub fn hc(&self) -> IntMatrix {
        self.h_mat
            .vcat(&self.c_mat)
            .expect("H and C share their column count")
    }

    /// `P * [H; C]`: maps `U' x` back to `B x`.
    pub fn fitting(&self) -> IntMatrix {
        self.p_mat
            .mul(&self.hc())
            .expect("P is square over the rows of B")
    }

    /// The full middle factor `[[H, 0], [C, 0]]` padded to the shape of `B`.
    pub fn middle(&self) -> IntMatrix {
        let rows = self.p_mat.rows();
        let cols = self.u_mat.rows();
        let hc = self.hc();
        let mut m = IntMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..self.rank {
                m[(i, j)] = hc[(i, j)].clone();
            }
        }
        m
    }

    /// `P * [[H, 0], [C, 0]] * U`.
    pub fn reconstruct(&self) -> IntMatrix {
        self.p_mat
            .mul(&self.middle())
            .and_then(|m| m.mul(&self.u_mat))
            .expect("factor shapes are consistent")
    }

    /// Product of the diagonal of `H`.
    pub fn h_determinant(&self) -> BigInt {
        (0..self.rank).map(|i| self.h_mat[(i, i)].clone()).product()
    }
}

struct Workspace {
    p: IntMatrix,
    b: IntMatrix,
    u: IntMatrix,
    steps: usize,
}

impl Workspace {
    fn tick(&mut self) {
        self.steps += 1;
        assert!(
            self.steps <= STEP_LIMIT,
            "echelon reduction exceeded {STEP_LIMIT} elementary steps"
        );
    }

    /// Permute rows `i` and `j` of `B'`; `P` absorbs the same permutation on
    /// its columns.
    fn swap_rows(&mut self, i: usize, j: usize) {
        self.b.swap_rows(i, j);
        self.p.swap_cols(i, j);
        self.tick();
    }

    /// Flip the sign of column `k` of `B'` and row `k` of `U`.
    fn flip_sign(&mut self, k: usize) {
        self.b.negate_col(k);
        self.u.negate_row(k);
        self.tick();
    }

    /// Interchange columns `i` and `l` of `B'` and rows `i` and `l` of `U`.
    fn swap_cols(&mut self, i: usize, l: usize) {
        self.b.swap_cols(i, l);
        self.u.swap_rows(i, l);
        self.tick();
    }

    /// Column `m` of `B'` loses `alpha` times column `i`; row `i` of `U` gains
    /// `alpha` times row `m`.
    fn reduce_col(&mut self, m: usize, i: usize, alpha: &BigInt) {
        self.b.add_col_multiple(m, i, &-alpha);
        self.u.add_row_multiple(i, m, alpha);
        self.tick();
    }
}

pub fn row_echelon(b: &IntMatrix) -> EchelonDecomposition {
    row_echelon_with(b, Reduction::default())
}

pub fn row_echelon_with(b: &IntMatrix, reduction: Reduction) -> EchelonDecomposition {
    let (rows, cols) = b.shape();
    let mut ws = Workspace {
        p: IntMatrix::identity(rows),
        b: b.clone(),
        u: IntMatrix::identity(cols),
        steps: 0,
    };

    let mut i = 0;
    while i < rows && i < cols {
        // D = B'[i.., i..]; stop when it is null.
        let Some(nonzero_row) = (i..rows).find(|&r| (i..cols).any(|c| !ws.b[(r, c)].is_zero()))
        else {
            break;
        };
        if nonzero_row != i {
            ws.swap_rows(i, nonzero_row);
        }

        loop {
            for k in i..cols {
                if ws.b[(i, k)].is_negative() {
                    ws.flip_sign(k);
                }
            }
            // Smallest positive entry of the pivot row, lowest index on ties.
            let mut smallest = None::<usize>;
            for k in i..cols {
                let v = &ws.b[(i, k)];
                if v.is_positive() && smallest.is_none_or(|s| v < &ws.b[(i, s)]) {
                    smallest = Some(k);
                }
            }
            let l = smallest.expect("pivot row of a non-null D has a nonzero entry");
            if l != i {
                ws.swap_cols(i, l);
            }
            let mut reduced = false;
            for m in i + 1..cols {
                if ws.b[(i, m)].is_zero() {
                    continue;
                }
                let alpha = ws.b[(i, m)].div_floor(&ws.b[(i, i)]);
                if !alpha.is_zero() {
                    ws.reduce_col(m, i, &alpha);
                }
                reduced = true;
            }
            if !reduced {
                break;
            }
            // Remainders may leave other nonzeros in the row; go around again
            // with the smaller pivot.
            if (i + 1..cols).all(|m| ws.b[(i, m)].is_zero()) {
                break;
            }
        }
        i += 1;
    }
    let rank = i;

    if reduction == Reduction::OffDiagonal {
        for row in 1..rank {
            for col in 0..row {
                let q = ws.b[(row, col)].div_floor(&ws.b[(row, row)]);
                if !q.is_zero() {
                    ws.reduce_col(col, row, &q);
                }
            }
        }
    }

    let h_mat = ws.b.row_block(0..rank).col_block(0..rank);
    let c_mat = ws.b.row_block(rank..rows).col_block(0..rank);
    debug_assert!(ws.b.col_block(rank..cols).is_zero());
    EchelonDecomposition {
        p_mat: ws.p,
        h_mat,
        c_mat,
        u_mat: ws.u,
        rank,
        steps: ws.steps,
    }
}

/// A matrix entry for the closed-form small cases: either a known integer or
/// an opaque symbol such as a program parameter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SymInt {
    Num(BigInt),
    Sym(String),
}

impl SymInt {
    fn is_literal_zero(&self) -> bool {
        matches!(self, SymInt::Num(n) if n.is_zero())
    }
}

impl From<i64> for SymInt {
    fn from(v: i64) -> Self {
        SymInt::Num(BigInt::from(v))
    }
}

impl From<&str> for SymInt {
    fn from(s: &str) -> Self {
        SymInt::Sym(s.to_string())
    }
}

impl fmt::Display for SymInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymInt::Num(n) => write!(f, "{n}"),
            SymInt::Sym(s) => write!(f, "{s}"),
        }
    }
}

/// Closed-form echelon of `[[a, b], [c, d]]`:
///
/// ```text
/// [[ gcd(a,b)   , 0                       ],
///  [ c*u + d*v  , |a*d - b*c| / gcd(a,b)  ]]
/// ```
///
/// with `a*u + b*v = gcd(a,b)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolicEchelon2x2 {
    pub a: SymInt,
    pub b: SymInt,
    pub c: SymInt,
    pub d: SymInt,
}

impl SymbolicEchelon2x2 {
    /// Human-readable entries, row-major.
    pub fn entries(&self) -> [String; 4] {
        let (a, b, c, d) = (&self.a, &self.b, &self.c, &self.d);
        [
            format!("gcd({a}, {b})"),
            "0".to_string(),
            format!("{c}*u + {d}*v"),
            format!("|{a}*{d} - {b}*{c}| / gcd({a}, {b})"),
        ]
    }

    /// Evaluates the closed form, binding every symbol through `lookup`.
    pub fn instantiate(
        &self,
        lookup: impl Fn(&str) -> Option<BigInt>,
    ) -> Result<IntMatrix, EchelonError> {
        let val = |s: &SymInt| match s {
            SymInt::Num(n) => Ok(n.clone()),
            SymInt::Sym(name) => {
                lookup(name).ok_or_else(|| EchelonError::Invalid(format!("unbound symbol {name}")))
            }
        };
        let (a, b, c, d) = (val(&self.a)?, val(&self.b)?, val(&self.c)?, val(&self.d)?);
        echelon_2x2_numeric(&a, &b, &c, &d)
    }
}

impl fmt::Display for SymbolicEchelon2x2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [e00, e01, e10, e11] = self.entries();
        write!(
            f,
            "[[{e00}, {e01}], [{e10}, {e11}]] where a*u + b*v = gcd(a, b)"
        )
    }
}

pub fn echelon_2x2_symbolic(
    a: SymInt,
    b: SymInt,
    c: SymInt,
    d: SymInt,
) -> Result<SymbolicEchelon2x2, EchelonError> {
    if a.is_literal_zero() && b.is_literal_zero() {
        return Err(EchelonError::Degenerate);
    }
    Ok(SymbolicEchelon2x2 { a, b, c, d })
}

/// The closed form evaluated at integers.
pub fn echelon_2x2_numeric(
    a: &BigInt,
    b: &BigInt,
    c: &BigInt,
    d: &BigInt,
) -> Result<IntMatrix, EchelonError> {
    let (g, u, v) = gcd_bezout(a, b);
    if g.is_zero() {
        return Err(EchelonError::Degenerate);
    }
    let lower = c * &u + d * &v;
    let det = (a * d - b * c).abs() / &g;
    Ok(IntMatrix::from_vec(
        2,
        2,
        vec![g, BigInt::zero(), lower, det],
    ))
}

/// The 1x1 case: `[a]` is its own normal form up to sign.
pub fn echelon_1x1(a: &BigInt) -> IntMatrix {
    IntMatrix::from_vec(1, 1, vec![a.abs()])
}

/// Per-dimension inclusive bounds.
pub type IntBox = [(i64, i64)];

/// Largest number of cells the brute-force lattice oracle will scan.
pub const ORACLE_BUDGET: u128 = 1_000_000;

/// Do the integer column spans of `b1` and `b2` hit the same points of `bx`?
///
/// Brute force: flood-fill each lattice from the origin with moves `±g` over
/// its generators, confined to `bx` grown by `rows * max|entry|` per side.
/// That margin is the Steinitz bound, so every lattice point inside `bx` is
/// reached by some path that stays in the grown box.
pub fn lattice_equal_oracle(
    b1: &IntMatrix,
    b2: &IntMatrix,
    bx: &IntBox,
) -> Result<bool, EchelonError> {
    if b1.rows() != b2.rows() || b1.rows() != bx.len() {
        return Err(EchelonError::Invalid(format!(
            "row counts {} and {} against a {}-dimensional box",
            b1.rows(),
            b2.rows(),
            bx.len()
        )));
    }
    Ok(lattice_points_in_box(b1, bx)? == lattice_points_in_box(b2, bx)?)
}

/// Sorted lattice points (integer span of the columns of `gens`) inside `bx`.
pub fn lattice_points_in_box(gens: &IntMatrix, bx: &IntBox) -> Result<Vec<Vec<i64>>, EchelonError> {
    let dim = gens.rows();
    let to_i64 = |v: &BigInt| {
        i64::try_from(v)
            .map_err(|_| EchelonError::Invalid(format!("generator entry {v} too large")))
    };
    let mut moves: Vec<Vec<i64>> = Vec::new();
    for j in 0..gens.cols() {
        let col = gens
            .column(j)
            .iter()
            .map(to_i64)
            .collect::<Result<Vec<_>, _>>()?;
        if col.iter().all(|&v| v == 0) {
            continue;
        }
        moves.push(col.iter().map(|v| -v).collect());
        moves.push(col);
    }
    let max_entry = moves.iter().flatten().map(|v| v.abs()).max().unwrap_or(0);
    let margin = max_entry * dim as i64;
    let lo: Vec<i64> = bx.iter().map(|&(l, _)| l.min(0) - margin).collect();
    let hi: Vec<i64> = bx.iter().map(|&(_, h)| h.max(0) + margin).collect();
    let extents: Vec<u128> = lo
        .iter()
        .zip(&hi)
        .map(|(l, h)| (h - l + 1) as u128)
        .collect();
    let cells: u128 = extents.iter().product();
    if cells > ORACLE_BUDGET {
        return Err(EchelonError::BudgetExceeded(cells));
    }

    let index = |p: &[i64]| -> usize {
        let mut idx = 0usize;
        for k in 0..dim {
            idx = idx * extents[k] as usize + (p[k] - lo[k]) as usize;
        }
        idx
    };
    let mut seen = vec![false; cells as usize];
    let origin = vec![0i64; dim];
    seen[index(&origin)] = true;
    let mut stack = vec![origin];
    let mut found = Vec::new();
    while let Some(p) = stack.pop() {
        if p.iter().zip(bx).all(|(v, &(l, h))| l <= *v && *v <= h) {
            found.push(p.clone());
        }
        for mv in &moves {
            let q: Vec<i64> = p.iter().zip(mv).map(|(a, b)| a + b).collect();
            if q.iter()
                .enumerate()
                .all(|(k, v)| lo[k] <= *v && *v <= hi[k])
            {
                let idx = index(&q);
                if !seen[idx] {
                    seen[idx] = true;
                    stack.push(q);
                }
            }
        }
    }
    found.sort();
    Ok(found)
}
