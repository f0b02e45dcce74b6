use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::affine::AffineExpr;

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "in")]
    Input,
    #[serde(rename = "out")]
    Output,
}

impl Direction {
    pub fn keyword(self) -> &'static str {
        match self {
            Direction::Input => "in",
            Direction::Output => "out",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ArrayDecl {
    pub name: String,
    pub rank: usize,
    pub direction: Direction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Rem => "%",
        }
    }

    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div | BinOp::Rem => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Access {
    pub array: String,
    pub subscripts: Vec<Expr>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Int(BigInt),
    Var(String),
    Access(Access),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssignOp {
    Set,
    Add,
    Sub,
    Mul,
}

impl AssignOp {
    pub fn symbol(self) -> &'static str {
        match self {
            AssignOp::Set => "=",
            AssignOp::Add => "+=",
            AssignOp::Sub => "-=",
            AssignOp::Mul => "*=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LValue {
    Scalar(String, Span),
    Array(Access),
}

/// `for (counter = lower; counter < upper; counter++)`, or `<=` when
/// `inclusive`. `lower_aff` and `upper_aff` are the lowered bounds, the latter
/// already made inclusive.
#[derive(Debug, Clone, PartialEq)]
pub struct Loop {
    pub counter: String,
    pub lower: Expr,
    pub upper: Expr,
    pub inclusive: bool,
    pub lower_aff: AffineExpr,
    pub upper_aff: AffineExpr,
    pub body: Vec<Stmt>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum Stmt {
    For(Loop),
    Assign {
        target: LValue,
        op: AssignOp,
        value: Expr,
        span: Span,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub name: String,
    pub params: Vec<String>,
    pub arrays: Vec<ArrayDecl>,
    pub repetition: Vec<String>,
    pub body: Vec<Stmt>,
}

impl Program {
    pub fn array(&self, name: &str) -> Option<&ArrayDecl> {
        self.arrays.iter().find(|a| a.name == name)
    }

    pub fn is_param(&self, name: &str) -> bool {
        self.params.iter().any(|p| p == name)
    }

    /// The chain of repetition loops, outermost first.
    pub fn repetition_loops(&self) -> Vec<&Loop> {
        let mut out = Vec::new();
        let mut body = &self.body;
        for counter in &self.repetition {
            match body.as_slice() {
                [Stmt::For(l)] if &l.counter == counter => {
                    out.push(l);
                    body = &l.body;
                }
                _ => break,
            }
        }
        out
    }

    /// Copy with every span reset, for structural comparison.
    pub fn without_spans(&self) -> Program {
        let mut p = self.clone();
        p.body.iter_mut().for_each(clear_stmt);
        p
    }
}

fn clear_expr(e: &mut Expr) {
    e.span = Span::default();
    match &mut e.kind {
        ExprKind::Int(_) | ExprKind::Var(_) => {}
        ExprKind::Access(a) => clear_access(a),
        ExprKind::Neg(x) => clear_expr(x),
        ExprKind::Binary(_, l, r) => {
            clear_expr(l);
            clear_expr(r);
        }
    }
}

fn clear_access(a: &mut Access) {
    a.span = Span::default();
    a.subscripts.iter_mut().for_each(clear_expr);
}

fn clear_stmt(s: &mut Stmt) {
    match s {
        Stmt::For(l) => {
            l.span = Span::default();
            clear_expr(&mut l.lower);
            clear_expr(&mut l.upper);
            l.body.iter_mut().for_each(clear_stmt);
        }
        Stmt::Assign {
            target,
            value,
            span,
            ..
        } => {
            *span = Span::default();
            match target {
                LValue::Scalar(_, sp) => *sp = Span::default(),
                LValue::Array(a) => clear_access(a),
            }
            clear_expr(value);
        }
    }
}
