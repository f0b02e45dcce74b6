//! Reference extraction, Jacobians and the repetition space.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::ast::{Access, ArrayDecl, Expr, ExprKind, LValue, Loop, Program, Span, Stmt};
use super::error::{FrontError, FrontErrorKind};
use super::lower::{lower_affine, Ident};
use super::print::access_to_string;
use crate::affine::{AffineExpr, Bindings, LinExpr, SymMatrix};
use crate::geometry::{Inequality, IterationDomain};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AccessKind {
    Read,
    /// Plain or compound assignment target.
    Write,
}

/// One textual array occurrence before its subscripts are analysed.
#[derive(Debug, Clone, PartialEq)]
pub struct RawReference {
    pub array: ArrayDecl,
    /// 1-based, per array, in source order.
    pub occurrence: usize,
    pub access: AccessKind,
    pub subscripts: Vec<Expr>,
    pub span: Span,
    /// Non-repetition loops enclosing the access, outermost first.
    pub loops: Vec<LoopBounds>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopBounds {
    pub counter: String,
    pub lower: AffineExpr,
    pub upper: AffineExpr,
}

/// A fully analysed reference `e(r, j) = P r + B j + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayReference {
    pub array: ArrayDecl,
    pub occurrence: usize,
    pub access: AccessKind,
    pub span: Span,
    /// Source text of the access.
    pub text: String,
    pub subscripts: Vec<AffineExpr>,
    pub inner_counters: Vec<String>,
    pub domain: IterationDomain,
    /// `|A| x |r|`
    pub paving: SymMatrix,
    /// `|A| x d`
    pub local: SymMatrix,
    pub origin: Vec<LinExpr>,
}

impl ArrayReference {
    /// `array#occurrence`, e.g. `in#2`.
    pub fn label(&self) -> String {
        format!("{}#{}", self.array.name, self.occurrence)
    }

    pub fn depth(&self) -> usize {
        self.inner_counters.len()
    }
}

/// Inclusive bounds of the repetition counters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepetitionSpace {
    pub counters: Vec<String>,
    pub bounds: Vec<(LinExpr, LinExpr)>,
}

impl RepetitionSpace {
    pub fn instantiate(&self, bindings: &Bindings) -> Result<Vec<(BigInt, BigInt)>, String> {
        self.bounds
            .iter()
            .map(|(lo, hi)| Ok((lo.eval(bindings)?, hi.eval(bindings)?)))
            .collect()
    }
}

pub fn extract_references(p: &Program) -> Result<Vec<RawReference>, FrontError> {
    let mut out = Vec::new();
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut loops = Vec::new();
    walk(p, &p.body, &mut loops, &mut counts, &mut out)?;
    Ok(out)
}

fn walk(
    p: &Program,
    body: &[Stmt],
    loops: &mut Vec<LoopBounds>,
    counts: &mut BTreeMap<String, usize>,
    out: &mut Vec<RawReference>,
) -> Result<(), FrontError> {
    for s in body {
        match s {
            Stmt::For(l) => {
                let is_rep = p.repetition.contains(&l.counter);
                if !is_rep {
                    loops.push(bounds_of(l));
                }
                walk(p, &l.body, loops, counts, out)?;
                if !is_rep {
                    loops.pop();
                }
            }
            Stmt::Assign { target, value, .. } => {
                // Right-hand side first: `out[i] = in[i]` reads before it writes.
                collect_reads(p, value, loops, counts, out)?;
                if let LValue::Array(a) = target {
                    for sub in &a.subscripts {
                        collect_reads(p, sub, loops, counts, out)?;
                    }
                    push_ref(p, a, AccessKind::Write, loops, counts, out)?;
                }
            }
        }
    }
    Ok(())
}

fn bounds_of(l: &Loop) -> LoopBounds {
    LoopBounds {
        counter: l.counter.clone(),
        lower: l.lower_aff.clone(),
        upper: l.upper_aff.clone(),
    }
}

fn collect_reads(
    p: &Program,
    e: &Expr,
    loops: &[LoopBounds],
    counts: &mut BTreeMap<String, usize>,
    out: &mut Vec<RawReference>,
) -> Result<(), FrontError> {
    match &e.kind {
        ExprKind::Access(a) => {
            for sub in &a.subscripts {
                collect_reads(p, sub, loops, counts, out)?;
            }
            push_ref(p, a, AccessKind::Read, loops, counts, out)
        }
        ExprKind::Neg(x) => collect_reads(p, x, loops, counts, out),
        ExprKind::Binary(_, l, r) => {
            collect_reads(p, l, loops, counts, out)?;
            collect_reads(p, r, loops, counts, out)
        }
        ExprKind::Int(_) | ExprKind::Var(_) => Ok(()),
    }
}

fn push_ref(
    p: &Program,
    a: &Access,
    access: AccessKind,
    loops: &[LoopBounds],
    counts: &mut BTreeMap<String, usize>,
    out: &mut Vec<RawReference>,
) -> Result<(), FrontError> {
    let decl = p.array(&a.array).ok_or_else(|| {
        FrontError::new(
            FrontErrorKind::UndeclaredArray,
            a.span,
            format!("access to undeclared array `{}`", a.array),
        )
    })?;
    let n = counts.entry(a.array.clone()).or_insert(0);
    *n += 1;
    out.push(RawReference {
        array: decl.clone(),
        occurrence: *n,
        access,
        subscripts: a.subscripts.clone(),
        span: a.span,
        loops: loops.to_vec(),
    });
    Ok(())
}

/// Lowers the subscripts under `bindings` and splits them into paving
/// (repetition counters), local (inner counters) and origin parts.
pub fn jacobians(
    raw: &RawReference,
    p: &Program,
    bindings: &Bindings,
) -> Result<ArrayReference, FrontError> {
    let inner: Vec<String> = raw.loops.iter().map(|l| l.counter.clone()).collect();
    let classify = |name: &str| {
        if p.repetition.iter().any(|c| c == name) || inner.iter().any(|c| c == name) {
            Ident::Counter
        } else if p.is_param(name) {
            Ident::Param(bindings.get(name).cloned())
        } else {
            Ident::Unknown
        }
    };
    let text = access_to_string(&Access {
        array: raw.array.name.clone(),
        subscripts: raw.subscripts.clone(),
        span: raw.span,
    });
    let mut subscripts = Vec::with_capacity(raw.subscripts.len());
    for sub in &raw.subscripts {
        let aff = lower_affine(sub, &classify).map_err(|mut e| {
            if e.kind == FrontErrorKind::NonAffine {
                e.message = format!("subscript of `{text}`: {}", e.message);
            }
            e
        })?;
        subscripts.push(aff);
    }

    let rank = subscripts.len();
    let jac = |counters: &[String]| {
        let mut data = Vec::with_capacity(rank * counters.len());
        for e in &subscripts {
            for c in counters {
                data.push(e.coeff(c));
            }
        }
        SymMatrix::from_vec(rank, counters.len(), data)
    };
    let paving = jac(&p.repetition);
    let local = jac(&inner);
    let origin: Vec<LinExpr> = subscripts
        .iter()
        .map(|e| e.constant_term().clone())
        .collect();

    // e(r, j) = P r + B j + e(0, 0), coefficient by coefficient.
    for (row, e) in subscripts.iter().enumerate() {
        let mut coeffs = BTreeMap::new();
        for (col, c) in p.repetition.iter().enumerate() {
            coeffs.insert(c.clone(), paving.get(row, col).clone());
        }
        for (col, c) in inner.iter().enumerate() {
            coeffs.insert(c.clone(), local.get(row, col).clone());
        }
        let rebuilt = AffineExpr::from_parts(coeffs, origin[row].clone());
        if &rebuilt != e {
            return Err(FrontError::new(
                FrontErrorKind::NonAffine,
                raw.span,
                format!(
                    "subscript {} of `{text}` is not affine in the enclosing counters",
                    row + 1
                ),
            ));
        }
    }

    let domain = domain_of(raw, p, bindings)?;
    Ok(ArrayReference {
        array: raw.array.clone(),
        occurrence: raw.occurrence,
        access: raw.access,
        span: raw.span,
        text,
        subscripts,
        inner_counters: inner,
        domain,
        paving,
        local,
        origin,
    })
}

/// Box when every inner bound is counter-free, otherwise the polyhedron of
/// the loop inequalities. Bounds must not mention repetition counters.
fn domain_of(
    raw: &RawReference,
    p: &Program,
    bindings: &Bindings,
) -> Result<IterationDomain, FrontError> {
    let loops: Vec<LoopBounds> = raw
        .loops
        .iter()
        .map(|l| LoopBounds {
            counter: l.counter.clone(),
            lower: l.lower.substitute(bindings),
            upper: l.upper.substitute(bindings),
        })
        .collect();
    for l in &loops {
        for b in [&l.lower, &l.upper] {
            if let Some(c) = b.counters().find(|c| p.repetition.iter().any(|r| r == c)) {
                return Err(FrontError::new(
                    FrontErrorKind::RepetitionDependentBound,
                    raw.span,
                    format!(
                        "bound of inner loop `{}` depends on repetition counter `{c}`; the footprint would change between repetitions",
                        l.counter
                    ),
                ));
            }
        }
    }
    if loops
        .iter()
        .all(|l| l.lower.is_counter_free() && l.upper.is_counter_free())
    {
        return Ok(IterationDomain::Box {
            bounds: loops
                .iter()
                .map(|l| {
                    (
                        l.lower.constant_term().clone(),
                        l.upper.constant_term().clone(),
                    )
                })
                .collect(),
        });
    }
    let index: BTreeMap<&str, usize> = loops
        .iter()
        .enumerate()
        .map(|(i, l)| (l.counter.as_str(), i))
        .collect();
    let dim = loops.len();
    let row = |e: &AffineExpr, sign: i64| -> Result<Inequality, FrontError> {
        let mut coeffs = vec![BigInt::zero(); dim];
        for (c, v) in e.coeffs() {
            let Some(v) = v.as_constant() else {
                return Err(FrontError::new(
                    FrontErrorKind::Parametric,
                    raw.span,
                    format!(
                        "loop bound coefficient `{v}` of `{c}` is symbolic; bind its parameters"
                    ),
                ));
            };
            coeffs[index[c.as_str()]] = v * sign;
        }
        Ok(Inequality {
            coeffs,
            constant: e.constant_term().scale(&BigInt::from(sign)),
        })
    };
    let mut constraints = Vec::new();
    for l in &loops {
        let me = AffineExpr::counter(&l.counter);
        // j - lower >= 0 and upper - j >= 0
        constraints.push(row(&me.sub(&l.lower), 1)?);
        constraints.push(row(&l.upper.sub(&me), 1)?);
    }
    Ok(IterationDomain::HPoly { dim, constraints })
}

pub fn repetition_space(p: &Program) -> Result<RepetitionSpace, FrontError> {
    let loops = p.repetition_loops();
    let mut bounds = Vec::with_capacity(loops.len());
    for l in &loops {
        for b in [&l.lower_aff, &l.upper_aff] {
            if let Some(c) = b.counters().next() {
                return Err(FrontError::new(
                    FrontErrorKind::NonSquare,
                    l.span,
                    format!(
                        "repetition loop `{}` has a bound depending on counter `{c}`; repetition loops must be rectangular",
                        l.counter
                    ),
                ));
            }
        }
        bounds.push((
            l.lower_aff.constant_term().clone(),
            l.upper_aff.constant_term().clone(),
        ));
    }
    Ok(RepetitionSpace {
        counters: loops.iter().map(|l| l.counter.clone()).collect(),
        bounds,
    })
}

/// Parses, checks the repetition space and analyses every reference.
pub fn analyze(
    p: &Program,
    bindings: &Bindings,
) -> Result<(RepetitionSpace, Vec<ArrayReference>), FrontError> {
    let rep = repetition_space(p)?;
    let refs = extract_references(p)?
        .iter()
        .map(|r| jacobians(r, p, bindings))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((rep, refs))
}

/// Parameters used anywhere in the analysed references or repetition bounds.
pub fn free_params(rep: &RepetitionSpace, refs: &[ArrayReference]) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for (lo, hi) in &rep.bounds {
        out.extend(lo.params().map(str::to_string));
        out.extend(hi.params().map(str::to_string));
    }
    for r in refs {
        out.extend(r.paving.params());
        out.extend(r.local.params());
        for o in &r.origin {
            out.extend(o.params().map(str::to_string));
        }
        out.extend(r.domain.params());
    }
    out
}
