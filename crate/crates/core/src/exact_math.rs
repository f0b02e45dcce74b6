//! Exact integer and rational linear algebra.
//!
//! Every matrix in the pipeline is small (a handful of rows and columns), so
//! storage is dense and row-major and all arithmetic goes through
//! arbitrary-precision integers.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MathError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("system is underdetermined (nontrivial kernel)")]
    Underdetermined,
}

/// Dense integer matrix, row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    /// Builds a matrix from row-major entries. Panics if the length is wrong.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<BigInt>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count must be rows * cols");
        IntMatrix { rows, cols, data }
    }

    /// Convenience constructor from small integer rows. All rows must have the
    /// same length; an empty slice gives a 0x0 matrix.
    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend(r.iter().map(|&v| BigInt::from(v)));
        }
        IntMatrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    /// A single column built from the given entries.
    pub fn column_vector(entries: &[BigInt]) -> Self {
        IntMatrix::from_vec(entries.len(), 1, entries.to_vec())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix, MathError> {
        mat_mul(self, other)
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[BigInt]) -> Result<Vec<BigInt>, MathError> {
        if v.len() != self.cols {
            return Err(MathError::DimensionMismatch(format!(
                "{}x{} matrix applied to vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Matrix applied to a rational vector.
    pub fn apply_rat(&self, v: &RatVector) -> Result<RatVector, MathError> {
        if v.dim() != self.cols {
            return Err(MathError::DimensionMismatch(format!(
                "{}x{} matrix applied to vector of length {}",
                self.rows,
                self.cols,
                v.dim()
            )));
        }
        Ok(RatVector::new(
            (0..self.rows)
                .map(|i| {
                    self.row(i)
                        .iter()
                        .zip(v.coords())
                        .map(|(a, b)| BigRational::from_integer(a.clone()) * b)
                        .fold(BigRational::zero(), |acc, x| acc + x)
                })
                .collect(),
        ))
    }

    /// Horizontal concatenation `[self other]`.
    pub fn hcat(&self, other: &IntMatrix) -> Result<IntMatrix, MathError> {
        if self.rows != other.rows {
            return Err(MathError::DimensionMismatch(format!(
                "hcat of {} rows with {} rows",
                self.rows, other.rows
            )));
        }
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for i in 0..self.rows {
            data.extend_from_slice(self.row(i));
            data.extend_from_slice(other.row(i));
        }
        Ok(IntMatrix::from_vec(self.rows, cols, data))
    }

    /// Vertical concatenation `[self; other]`.
    pub fn vcat(&self, other: &IntMatrix) -> Result<IntMatrix, MathError> {
        if self.cols != other.cols {
            return Err(MathError::DimensionMismatch(format!(
                "vcat of {} cols with {} cols",
                self.cols, other.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(IntMatrix::from_vec(self.rows + other.rows, self.cols, data))
    }

    /// Rows `range` as a new matrix.
    pub fn row_block(&self, range: std::ops::Range<usize>) -> IntMatrix {
        let data = self.data[range.start * self.cols..range.end * self.cols].to_vec();
        IntMatrix::from_vec(range.len(), self.cols, data)
    }

    /// Columns `range` as a new matrix.
    pub fn col_block(&self, range: std::ops::Range<usize>) -> IntMatrix {
        let mut data = Vec::with_capacity(self.rows * range.len());
        for i in 0..self.rows {
            data.extend_from_slice(&self.row(i)[range.clone()]);
        }
        IntMatrix::from_vec(self.rows, range.len(), data)
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    pub fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = &mut self.data[i * self.cols + j];
            *v = -std::mem::take(v);
        }
    }

    pub fn negate_col(&mut self, j: usize) {
        for i in 0..self.rows {
            let v = &mut self.data[i * self.cols + j];
            *v = -std::mem::take(v);
        }
    }

    /// `row[dst] += factor * row[src]`
    pub fn add_row_multiple(&mut self, dst: usize, src: usize, factor: &BigInt) {
        for j in 0..self.cols {
            let delta = &self.data[src * self.cols + j] * factor;
            self.data[dst * self.cols + j] += delta;
        }
    }

    /// `col[dst] += factor * col[src]`
    pub fn add_col_multiple(&mut self, dst: usize, src: usize, factor: &BigInt) {
        for i in 0..self.rows {
            let delta = &self.data[i * self.cols + src] * factor;
            self.data[i * self.cols + dst] += delta;
        }
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> Result<BigInt, MathError> {
        if !self.is_square() {
            return Err(MathError::DimensionMismatch(format!(
                "determinant of non-square {}x{} matrix",
                self.rows, self.cols
            )));
        }
        let n = self.rows;
        if n == 0 {
            return Ok(BigInt::one());
        }
        let mut m = self.clone();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if m[(k, k)].is_zero() {
                match (k + 1..n).find(|&i| !m[(i, k)].is_zero()) {
                    Some(i) => {
                        m.swap_rows(i, k);
                        sign = -sign;
                    }
                    None => return Ok(BigInt::zero()),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &m[(i, j)] * &m[(k, k)] - &m[(i, k)] * &m[(k, j)];
                    m[(i, j)] = num / &prev;
                }
            }
            prev = m[(k, k)].clone();
        }
        Ok(sign * &m[(n - 1, n - 1)])
    }

    /// True iff the matrix is square with determinant +1 or -1.
    pub fn is_unimodular(&self) -> bool {
        self.determinant()
            .map(|d| d.abs().is_one())
            .unwrap_or(false)
    }

    /// True iff the matrix is a permutation matrix.
    pub fn is_permutation(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        let n = self.rows;
        let mut col_seen = vec![false; n];
        for i in 0..n {
            let mut ones = 0;
            for j in 0..n {
                let v = &self[(i, j)];
                if v.is_one() {
                    if col_seen[j] {
                        return false;
                    }
                    col_seen[j] = true;
                    ones += 1;
                } else if !v.is_zero() {
                    return false;
                }
            }
            if ones != 1 {
                return false;
            }
        }
        true
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "IntMatrix{}x{}{}", self.rows, self.cols, self)
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for (j, v) in self.row(i).iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{v}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// Vector of exact rationals. `BigRational` keeps every coordinate reduced
/// with a positive denominator.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RatVector {
    coords: Vec<BigRational>,
}

impl RatVector {
    pub fn new(coords: Vec<BigRational>) -> Self {
        RatVector { coords }
    }

    pub fn from_ints(v: &[BigInt]) -> Self {
        RatVector::new(v.iter().cloned().map(BigRational::from_integer).collect())
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[BigRational] {
        &self.coords
    }

    pub fn is_integral(&self) -> bool {
        self.coords.iter().all(|c| c.is_integer())
    }

    /// Integer coordinates, if every coordinate is integral.
    pub fn to_ints(&self) -> Option<Vec<BigInt>> {
        self.is_integral()
            .then(|| self.coords.iter().map(|c| c.to_integer()).collect())
    }

    pub fn add_ints(&self, offset: &[BigInt]) -> RatVector {
        RatVector::new(
            self.coords
                .iter()
                .zip(offset)
                .map(|(c, o)| c + BigRational::from_integer(o.clone()))
                .collect(),
        )
    }
}

impl fmt::Display for RatVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Extended Euclid. Returns `(g, u, v)` with `a*u + b*v = g` and `g >= 0`.
pub fn gcd_bezout(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    let (mut old_r, mut r) = (a.clone(), b.clone());
    let (mut old_s, mut s) = (BigInt::one(), BigInt::zero());
    let (mut old_t, mut t) = (BigInt::zero(), BigInt::one());
    while !r.is_zero() {
        let q = old_r.div_floor(&r);
        let next_r = &old_r - &q * &r;
        old_r = std::mem::replace(&mut r, next_r);
        let next_s = &old_s - &q * &s;
        old_s = std::mem::replace(&mut s, next_s);
        let next_t = &old_t - &q * &t;
        old_t = std::mem::replace(&mut t, next_t);
    }
    if a.is_zero() && b.is_zero() {
        return (BigInt::zero(), BigInt::zero(), BigInt::zero());
    }
    if old_r.is_negative() {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

pub fn mat_mul(a: &IntMatrix, b: &IntMatrix) -> Result<IntMatrix, MathError> {
    if a.cols != b.rows {
        return Err(MathError::DimensionMismatch(format!(
            "{}x{} times {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = IntMatrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        for k in 0..a.cols {
            let aik = &a[(i, k)];
            if aik.is_zero() {
                continue;
            }
            for j in 0..b.cols {
                out[(i, j)] += aik * &b[(k, j)];
            }
        }
    }
    Ok(out)
}

fn to_rational_rows(a: &IntMatrix) -> Vec<Vec<BigRational>> {
    (0..a.rows())
        .map(|i| {
            a.row(i)
                .iter()
                .cloned()
                .map(BigRational::from_integer)
                .collect()
        })
        .collect()
}

/// Gauss-Jordan elimination in place; returns the pivot columns.
fn reduce(rows: &mut [Vec<BigRational>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for v in rows[r].iter_mut() {
            *v = &*v * &inv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for j in 0..rows[i].len() {
                    let d = &f * &rows[r][j];
                    rows[i][j] -= d;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Solves `a * x = b` over the rationals.
///
/// `Ok(None)` means the system is inconsistent; `Err(Underdetermined)` means it
/// is consistent but `a` has a nontrivial kernel, so no unique solution exists.
pub fn rational_solve(a: &IntMatrix, b: &RatVector) -> Result<Option<RatVector>, MathError> {
    if a.rows() != b.dim() {
        return Err(MathError::DimensionMismatch(format!(
            "{}x{} system with right-hand side of length {}",
            a.rows(),
            a.cols(),
            b.dim()
        )));
    }
    let n = a.cols();
    let mut rows = to_rational_rows(a);
    for (row, rhs) in rows.iter_mut().zip(b.coords()) {
        row.push(rhs.clone());
    }
    let pivots = reduce(&mut rows, n);
    // A pivot in the augmented column would have been picked up as column n,
    // which `reduce` never scans, so check leftover rows explicitly.
    for row in rows.iter().skip(pivots.len()) {
        if !row[n].is_zero() {
            return Ok(None);
        }
    }
    if pivots.len() < n {
        return Err(MathError::Underdetermined);
    }
    let mut x = vec![BigRational::zero(); n];
    for (r, &c) in pivots.iter().enumerate() {
        x[c] = rows[r][n].clone();
    }
    Ok(Some(RatVector::new(x)))
}

/// Row rank by rational Gaussian elimination. Kept independent of the
/// echelon module so it can referee it in tests.
pub fn rank_oracle(a: &IntMatrix) -> usize {
    let mut rows = to_rational_rows(a);
    reduce(&mut rows, a.cols()).len()
}
