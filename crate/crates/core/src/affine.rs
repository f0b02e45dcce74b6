//! Affine forms over loop counters whose coefficients are linear forms over
//! symbolic program parameters.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::exact_math::IntMatrix;

/// Parameter name to value.
pub type Bindings = BTreeMap<String, BigInt>;

/// `constant + sum(coeff * param)`; zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct LinExpr {
    terms: BTreeMap<String, BigInt>,
    constant: BigInt,
}

impl LinExpr {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        LinExpr {
            terms: BTreeMap::new(),
            constant: c.into(),
        }
    }

    pub fn param(name: &str) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(name.to_string(), BigInt::one());
        LinExpr {
            terms,
            constant: BigInt::zero(),
        }
    }

    pub fn terms(&self) -> &BTreeMap<String, BigInt> {
        &self.terms
    }

    pub fn constant_term(&self) -> &BigInt {
        &self.constant
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty() && self.constant.is_zero()
    }

    /// The value, if no parameter appears.
    pub fn as_constant(&self) -> Option<&BigInt> {
        self.terms.is_empty().then_some(&self.constant)
    }

    pub fn params(&self) -> impl Iterator<Item = &str> {
        self.terms.keys().map(String::as_str)
    }

    pub fn add(&self, other: &LinExpr) -> LinExpr {
        let mut out = self.clone();
        for (k, v) in &other.terms {
            let e = out.terms.entry(k.clone()).or_default();
            *e += v;
            if e.is_zero() {
                out.terms.remove(k);
            }
        }
        out.constant += &other.constant;
        out
    }

    pub fn neg(&self) -> LinExpr {
        self.scale(&-BigInt::one())
    }

    pub fn sub(&self, other: &LinExpr) -> LinExpr {
        self.add(&other.neg())
    }

    pub fn scale(&self, f: &BigInt) -> LinExpr {
        if f.is_zero() {
            return LinExpr::zero();
        }
        LinExpr {
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * f)).collect(),
            constant: &self.constant * f,
        }
    }

    /// Replaces bound parameters by their values; unbound ones stay symbolic.
    pub fn substitute(&self, bindings: &Bindings) -> LinExpr {
        let mut out = LinExpr::constant(self.constant.clone());
        for (k, v) in &self.terms {
            match bindings.get(k) {
                Some(val) => out.constant += v * val,
                None => {
                    out.terms.insert(k.clone(), v.clone());
                }
            }
        }
        out
    }

    /// Full evaluation; the error names the first unbound parameter.
    pub fn eval(&self, bindings: &Bindings) -> Result<BigInt, String> {
        let mut acc = self.constant.clone();
        for (k, v) in &self.terms {
            let val = bindings.get(k).ok_or_else(|| k.clone())?;
            acc += v * val;
        }
        Ok(acc)
    }
}

impl From<i64> for LinExpr {
    fn from(v: i64) -> Self {
        LinExpr::constant(v)
    }
}

impl From<BigInt> for LinExpr {
    fn from(v: BigInt) -> Self {
        LinExpr::constant(v)
    }
}

fn write_terms<'a>(
    f: &mut fmt::Formatter<'_>,
    terms: impl Iterator<Item = (String, &'a BigInt)>,
    constant: Option<&BigInt>,
) -> fmt::Result {
    let mut first = true;
    for (name, c) in terms {
        let mag = c.abs();
        if first {
            if c.is_negative() {
                write!(f, "-")?;
            }
        } else if c.is_negative() {
            write!(f, " - ")?;
        } else {
            write!(f, " + ")?;
        }
        if mag.is_one() {
            write!(f, "{name}")?;
        } else {
            write!(f, "{mag}*{name}")?;
        }
        first = false;
    }
    match constant {
        Some(c) if !c.is_zero() || first => {
            if first {
                write!(f, "{c}")
            } else if c.is_negative() {
                write!(f, " - {}", c.abs())
            } else {
                write!(f, " + {c}")
            }
        }
        _ => Ok(()),
    }
}

impl fmt::Display for LinExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(
            f,
            self.terms.iter().map(|(k, v)| (k.clone(), v)),
            Some(&self.constant),
        )
    }
}

/// `constant + sum(coeff * counter)` with parameter-linear coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct AffineExpr {
    coeffs: BTreeMap<String, LinExpr>,
    constant: LinExpr,
}

impl AffineExpr {
    pub fn constant(c: LinExpr) -> Self {
        AffineExpr {
            coeffs: BTreeMap::new(),
            constant: c,
        }
    }

    pub fn counter(name: &str) -> Self {
        let mut coeffs = BTreeMap::new();
        coeffs.insert(name.to_string(), LinExpr::constant(1));
        AffineExpr {
            coeffs,
            constant: LinExpr::zero(),
        }
    }

    pub fn from_parts(coeffs: BTreeMap<String, LinExpr>, constant: LinExpr) -> Self {
        let coeffs = coeffs.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        AffineExpr { coeffs, constant }
    }

    /// Coefficient of `counter`, zero when absent.
    pub fn coeff(&self, counter: &str) -> LinExpr {
        self.coeffs.get(counter).cloned().unwrap_or_default()
    }

    pub fn coeffs(&self) -> &BTreeMap<String, LinExpr> {
        &self.coeffs
    }

    pub fn constant_term(&self) -> &LinExpr {
        &self.constant
    }

    pub fn counters(&self) -> impl Iterator<Item = &str> {
        self.coeffs.keys().map(String::as_str)
    }

    pub fn is_counter_free(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// True when every coefficient and the constant are plain integers.
    pub fn is_numeric(&self) -> bool {
        self.constant.as_constant().is_some()
            && self.coeffs.values().all(|c| c.as_constant().is_some())
    }

    pub fn add(&self, other: &AffineExpr) -> AffineExpr {
        let mut coeffs = self.coeffs.clone();
        for (k, v) in &other.coeffs {
            let sum = coeffs.get(k).map_or_else(|| v.clone(), |c| c.add(v));
            coeffs.insert(k.clone(), sum);
        }
        AffineExpr::from_parts(coeffs, self.constant.add(&other.constant))
    }

    pub fn neg(&self) -> AffineExpr {
        self.scale(&-BigInt::one())
    }

    pub fn sub(&self, other: &AffineExpr) -> AffineExpr {
        self.add(&other.neg())
    }

    pub fn scale(&self, f: &BigInt) -> AffineExpr {
        AffineExpr::from_parts(
            self.coeffs
                .iter()
                .map(|(k, v)| (k.clone(), v.scale(f)))
                .collect(),
            self.constant.scale(f),
        )
    }

    /// Product of two affine forms, or `None` when the result would not be
    /// affine with parameter-linear coefficients.
    pub fn mul(&self, other: &AffineExpr) -> Option<AffineExpr> {
        fn plain(e: &AffineExpr) -> Option<&BigInt> {
            if e.is_counter_free() {
                e.constant.as_constant()
            } else {
                None
            }
        }
        fn param_times(lin: &LinExpr, e: &AffineExpr) -> Option<AffineExpr> {
            if !e.is_numeric() {
                return None;
            }
            let by = |c: &LinExpr| lin.scale(c.as_constant().expect("numeric"));
            Some(AffineExpr::from_parts(
                e.coeffs.iter().map(|(k, v)| (k.clone(), by(v))).collect(),
                by(&e.constant),
            ))
        }
        if let Some(c) = plain(self) {
            return Some(other.scale(c));
        }
        if let Some(c) = plain(other) {
            return Some(self.scale(c));
        }
        if self.is_counter_free() {
            return param_times(&self.constant, other);
        }
        if other.is_counter_free() {
            return param_times(&other.constant, self);
        }
        None
    }

    pub fn substitute(&self, bindings: &Bindings) -> AffineExpr {
        AffineExpr::from_parts(
            self.coeffs
                .iter()
                .map(|(k, v)| (k.clone(), v.substitute(bindings)))
                .collect(),
            self.constant.substitute(bindings),
        )
    }

    /// Evaluates at integer counter values; counters missing from `point`
    /// count as zero. Parameters must be bound.
    pub fn eval(
        &self,
        point: &BTreeMap<String, BigInt>,
        bindings: &Bindings,
    ) -> Result<BigInt, String> {
        let mut acc = self.constant.eval(bindings)?;
        for (k, v) in &self.coeffs {
            if let Some(x) = point.get(k) {
                acc += v.eval(bindings)? * x;
            }
        }
        Ok(acc)
    }
}

impl fmt::Display for AffineExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Integer coefficients print inline; parametric ones get parentheses.
        let mut rendered: Vec<(String, BigInt)> = Vec::new();
        for (k, v) in &self.coeffs {
            match v.as_constant() {
                Some(c) => rendered.push((k.clone(), c.clone())),
                None => rendered.push((format!("({v})*{k}"), BigInt::one())),
            }
        }
        let const_sym = self.constant.as_constant().is_none();
        let constant = self.constant.as_constant();
        write_terms(f, rendered.iter().map(|(k, v)| (k.clone(), v)), constant)?;
        if const_sym {
            if rendered.is_empty() {
                write!(f, "{}", self.constant)?;
            } else {
                write!(f, " + ({})", self.constant)?;
            }
        }
        Ok(())
    }
}

/// Dense matrix of parameter-linear entries.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SymMatrix {
    rows: usize,
    cols: usize,
    data: Vec<LinExpr>,
}

impl SymMatrix {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<LinExpr>) -> Self {
        assert_eq!(data.len(), rows * cols);
        SymMatrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &LinExpr {
        &self.data[i * self.cols + j]
    }

    /// Numeric matrix, if no entry mentions a parameter.
    pub fn as_numeric(&self) -> Option<IntMatrix> {
        let data = self
            .data
            .iter()
            .map(|e| e.as_constant().cloned())
            .collect::<Option<Vec<_>>>()?;
        Some(IntMatrix::from_vec(self.rows, self.cols, data))
    }

    pub fn eval(&self, bindings: &Bindings) -> Result<IntMatrix, String> {
        let data = self
            .data
            .iter()
            .map(|e| e.eval(bindings))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(IntMatrix::from_vec(self.rows, self.cols, data))
    }

    /// Parameters mentioned anywhere in the matrix, sorted and deduplicated.
    pub fn params(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .data
            .iter()
            .flat_map(|e| e.params().map(str::to_string))
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

impl From<&IntMatrix> for SymMatrix {
    fn from(m: &IntMatrix) -> Self {
        SymMatrix::from_vec(
            m.rows(),
            m.cols(),
            m.entries().iter().cloned().map(LinExpr::constant).collect(),
        )
    }
}

impl fmt::Display for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}
