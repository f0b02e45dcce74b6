//! Lexer and recursive-descent parser for the loop-nest language.
//!
//! ```text
//! file       = { param_decl | pragma } func ;
//! param_decl = "param" ident { "," ident } ";" ;
//! pragma     = "@" "repetition" "(" ident { "," ident } ")" ;
//! func       = "func" ident "(" [ array_decl { "," array_decl } ] ")" block ;
//! array_decl = ident "[" "]" { "[" "]" } ":" ( "in" | "out" ) ;
//! block      = "{" { stmt } "}" ;
//! stmt       = for_stmt | assign ";" ;
//! for_stmt   = "for" "(" ident "=" expr ";" ident ( "<" | "<=" ) expr ";"
//!              ident "++" ")" ( block | stmt ) ;
//! assign     = lvalue ( "=" | "+=" | "-=" | "*=" ) expr ;
//! lvalue     = ident { "[" expr "]" } ;
//! expr       = term { ( "+" | "-" ) term } ;
//! term       = unary { ( "*" | "/" | "%" ) unary } ;
//! unary      = "-" unary | primary ;
//! primary    = integer | ident { "[" expr "]" } | "(" expr ")" ;
//! ```

use std::collections::HashSet;

use num_bigint::BigInt;

use super::ast::*;
use super::error::{FrontError, FrontErrorKind};
use super::lower::{lower_affine, Ident};
use crate::affine::{AffineExpr, LinExpr};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Punct(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    span: Span,
}

const PUNCTS: &[&str] = &[
    "++", "+=", "-=", "*=", "<=", "(", ")", "[", "]", "{", "}", ";", ",", ":", "=", "<", "+", "-",
    "*", "/", "%", "@",
];

fn syntax(span: Span, msg: impl Into<String>) -> FrontError {
    FrontError::new(FrontErrorKind::Syntax, span, msg)
}

fn lex(src: &str) -> Result<Vec<Token>, FrontError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    let advance = |i: &mut usize, line: &mut u32, col: &mut u32, n: usize| {
        for _ in 0..n {
            if chars[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        }
    };
    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, col };
        if c.is_whitespace() {
            advance(&mut i, &mut line, &mut col, 1);
        } else if c == '/' && chars.get(i + 1) == Some(&'/') {
            while i < chars.len() && chars[i] != '\n' {
                advance(&mut i, &mut line, &mut col, 1);
            }
        } else if c == '/' && chars.get(i + 1) == Some(&'*') {
            advance(&mut i, &mut line, &mut col, 2);
            loop {
                if i >= chars.len() {
                    return Err(syntax(span, "unterminated block comment"));
                }
                if chars[i] == '*' && chars.get(i + 1) == Some(&'/') {
                    advance(&mut i, &mut line, &mut col, 2);
                    break;
                }
                advance(&mut i, &mut line, &mut col, 1);
            }
        } else if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                advance(&mut i, &mut line, &mut col, 1);
            }
            let text: String = chars[start..i].iter().collect();
            let v: BigInt = text.parse().expect("digits");
            out.push(Token {
                tok: Tok::Int(v),
                span,
            });
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                advance(&mut i, &mut line, &mut col, 1);
            }
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                span,
            });
        } else {
            let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
            let Some(p) = PUNCTS.iter().find(|p| rest.starts_with(**p)) else {
                return Err(syntax(span, format!("unexpected character `{c}`")));
            };
            advance(&mut i, &mut line, &mut col, p.len());
            out.push(Token {
                tok: Tok::Punct(p),
                span,
            });
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span { line, col },
    });
    Ok(out)
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Int(v) => format!("`{v}`"),
        Tok::Punct(p) => format!("`{p}`"),
        Tok::Eof => "end of input".to_string(),
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn at_punct(&self, p: &str) -> bool {
        matches!(&self.peek().tok, Tok::Punct(q) if *q == p)
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.at_punct(p) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<Span, FrontError> {
        let t = self.next();
        match t.tok {
            Tok::Punct(q) if q == p => Ok(t.span),
            other => Err(syntax(
                t.span,
                format!("expected `{p}`, found {}", describe(&other)),
            )),
        }
    }

    fn expect_ident(&mut self) -> Result<(String, Span), FrontError> {
        let t = self.next();
        match t.tok {
            Tok::Ident(s) => Ok((s, t.span)),
            other => Err(syntax(
                t.span,
                format!("expected identifier, found {}", describe(&other)),
            )),
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<Span, FrontError> {
        let (s, span) = self.expect_ident()?;
        if s == kw {
            Ok(span)
        } else {
            Err(syntax(span, format!("expected `{kw}`, found `{s}`")))
        }
    }

    fn expr(&mut self) -> Result<Expr, FrontError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.at_punct("+") {
                BinOp::Add
            } else if self.at_punct("-") {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let span = self.next().span;
            let rhs = self.term()?;
            lhs = Expr {
                span: lhs.span.min(span),
                kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)),
            };
        }
    }

    fn term(&mut self) -> Result<Expr, FrontError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.at_punct("*") {
                BinOp::Mul
            } else if self.at_punct("/") {
                BinOp::Div
            } else if self.at_punct("%") {
                BinOp::Rem
            } else {
                return Ok(lhs);
            };
            self.next();
            let rhs = self.unary()?;
            lhs = Expr {
                span: lhs.span,
                kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)),
            };
        }
    }

    fn unary(&mut self) -> Result<Expr, FrontError> {
        if self.at_punct("-") {
            let span = self.next().span;
            let inner = self.unary()?;
            return Ok(Expr {
                kind: ExprKind::Neg(Box::new(inner)),
                span,
            });
        }
        self.primary()
    }

    fn subscripts(&mut self) -> Result<Vec<Expr>, FrontError> {
        let mut subs = Vec::new();
        while self.eat_punct("[") {
            subs.push(self.expr()?);
            self.expect_punct("]")?;
        }
        Ok(subs)
    }

    fn primary(&mut self) -> Result<Expr, FrontError> {
        let t = self.next();
        match t.tok {
            Tok::Int(v) => Ok(Expr {
                kind: ExprKind::Int(v),
                span: t.span,
            }),
            Tok::Ident(name) => {
                let subscripts = self.subscripts()?;
                let kind = if subscripts.is_empty() {
                    ExprKind::Var(name)
                } else {
                    ExprKind::Access(Access {
                        array: name,
                        subscripts,
                        span: t.span,
                    })
                };
                Ok(Expr { kind, span: t.span })
            }
            Tok::Punct("(") => {
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            other => Err(syntax(
                t.span,
                format!("expected expression, found {}", describe(&other)),
            )),
        }
    }

    fn stmt(&mut self) -> Result<Stmt, FrontError> {
        if self.at_keyword("for") {
            return self.for_stmt();
        }
        let (name, span) = self.expect_ident()?;
        let subscripts = self.subscripts()?;
        let target = if subscripts.is_empty() {
            LValue::Scalar(name, span)
        } else {
            LValue::Array(Access {
                array: name,
                subscripts,
                span,
            })
        };
        let t = self.next();
        let op = match t.tok {
            Tok::Punct("=") => AssignOp::Set,
            Tok::Punct("+=") => AssignOp::Add,
            Tok::Punct("-=") => AssignOp::Sub,
            Tok::Punct("*=") => AssignOp::Mul,
            other => {
                return Err(syntax(
                    t.span,
                    format!("expected assignment operator, found {}", describe(&other)),
                ))
            }
        };
        let value = self.expr()?;
        self.expect_punct(";")?;
        Ok(Stmt::Assign {
            target,
            op,
            value,
            span,
        })
    }

    fn for_stmt(&mut self) -> Result<Stmt, FrontError> {
        let span = self.expect_keyword("for")?;
        self.expect_punct("(")?;
        let (counter, _) = self.expect_ident()?;
        self.expect_punct("=")?;
        let lower = self.expr()?;
        self.expect_punct(";")?;
        let (c2, s2) = self.expect_ident()?;
        if c2 != counter {
            return Err(syntax(
                s2,
                format!("loop condition must test `{counter}`, found `{c2}`"),
            ));
        }
        let inclusive = if self.eat_punct("<=") {
            true
        } else {
            self.expect_punct("<")?;
            false
        };
        let upper = self.expr()?;
        self.expect_punct(";")?;
        let (c3, s3) = self.expect_ident()?;
        if c3 != counter {
            return Err(syntax(
                s3,
                format!("loop increment must be `{counter}++`, found `{c3}`"),
            ));
        }
        self.expect_punct("++")?;
        self.expect_punct(")")?;
        let body = if self.at_punct("{") {
            self.block()?
        } else {
            vec![self.stmt()?]
        };
        Ok(Stmt::For(Loop {
            counter,
            lower,
            upper,
            inclusive,
            lower_aff: AffineExpr::default(),
            upper_aff: AffineExpr::default(),
            body,
            span,
        }))
    }

    fn block(&mut self) -> Result<Vec<Stmt>, FrontError> {
        self.expect_punct("{")?;
        let mut body = Vec::new();
        while !self.at_punct("}") {
            if self.peek().tok == Tok::Eof {
                return Err(syntax(
                    self.peek().span,
                    "unexpected end of input, expected `}`",
                ));
            }
            body.push(self.stmt()?);
        }
        self.next();
        Ok(body)
    }

    fn file(&mut self) -> Result<(Program, Vec<(String, Span)>), FrontError> {
        let mut params = Vec::new();
        let mut pragma: Option<(Vec<(String, Span)>, Span)> = None;
        loop {
            if self.at_keyword("param") {
                self.next();
                loop {
                    let (name, span) = self.expect_ident()?;
                    if params.contains(&name) {
                        return Err(FrontError::new(
                            FrontErrorKind::Duplicate,
                            span,
                            format!("parameter `{name}` declared twice"),
                        ));
                    }
                    params.push(name);
                    if !self.eat_punct(",") {
                        break;
                    }
                }
                self.expect_punct(";")?;
            } else if self.at_punct("@") {
                let at = self.next().span;
                let (kw, kspan) = self.expect_ident()?;
                if kw != "repetition" {
                    return Err(FrontError::new(
                        FrontErrorKind::Pragma,
                        kspan,
                        format!("unknown annotation `@{kw}`"),
                    ));
                }
                if pragma.is_some() {
                    return Err(FrontError::new(
                        FrontErrorKind::Pragma,
                        at,
                        "more than one @repetition annotation",
                    ));
                }
                self.expect_punct("(")?;
                let mut names = vec![self.expect_ident()?];
                while self.eat_punct(",") {
                    names.push(self.expect_ident()?);
                }
                self.expect_punct(")")?;
                pragma = Some((names, at));
            } else {
                break;
            }
        }
        self.expect_keyword("func")?;
        let (name, _) = self.expect_ident()?;
        self.expect_punct("(")?;
        let mut arrays: Vec<ArrayDecl> = Vec::new();
        if !self.at_punct(")") {
            loop {
                let (aname, aspan) = self.expect_ident()?;
                let mut rank = 0;
                while self.eat_punct("[") {
                    self.expect_punct("]")?;
                    rank += 1;
                }
                if rank == 0 {
                    return Err(syntax(
                        aspan,
                        format!("array `{aname}` needs at least one `[]`"),
                    ));
                }
                self.expect_punct(":")?;
                let (dir, dspan) = self.expect_ident()?;
                let direction = match dir.as_str() {
                    "in" => Direction::Input,
                    "out" => Direction::Output,
                    _ => {
                        return Err(syntax(
                            dspan,
                            format!("expected `in` or `out`, found `{dir}`"),
                        ))
                    }
                };
                if arrays.iter().any(|a| a.name == aname) || params.contains(&aname) {
                    return Err(FrontError::new(
                        FrontErrorKind::Duplicate,
                        aspan,
                        format!("`{aname}` declared twice"),
                    ));
                }
                arrays.push(ArrayDecl {
                    name: aname,
                    rank,
                    direction,
                });
                if !self.eat_punct(",") {
                    break;
                }
            }
        }
        self.expect_punct(")")?;
        let body = self.block()?;
        if self.peek().tok != Tok::Eof {
            let t = self.peek();
            return Err(syntax(
                t.span,
                format!("unexpected {} after function body", describe(&t.tok)),
            ));
        }
        let rep = pragma.map(|(names, _)| names).unwrap_or_default();
        let program = Program {
            name,
            params,
            arrays,
            repetition: rep.iter().map(|(n, _)| n.clone()).collect(),
            body,
        };
        Ok((program, rep))
    }
}

/// Parses and checks a source file.
pub fn parse(src: &str) -> Result<Program, FrontError> {
    let mut parser = Parser {
        toks: lex(src)?,
        pos: 0,
    };
    let (mut program, rep) = parser.file()?;
    check_repetition(&program, &rep)?;
    let mut resolver = Resolver {
        program_params: program.params.clone(),
        arrays: program
            .arrays
            .iter()
            .map(|a| (a.name.clone(), a.rank))
            .collect(),
        scope: Vec::new(),
        seen_counters: HashSet::new(),
    };
    let mut body = std::mem::take(&mut program.body);
    for s in &mut body {
        resolver.stmt(s)?;
    }
    program.body = body;
    Ok(program)
}

fn check_repetition(p: &Program, rep: &[(String, Span)]) -> Result<(), FrontError> {
    let mut seen = HashSet::new();
    for (name, span) in rep {
        if !seen.insert(name) {
            return Err(FrontError::new(
                FrontErrorKind::Pragma,
                *span,
                format!("repetition counter `{name}` listed twice"),
            ));
        }
        if count_loops(&p.body, name) == 0 {
            return Err(FrontError::new(
                FrontErrorKind::Pragma,
                *span,
                format!("@repetition names `{name}`, but no loop has that counter"),
            ));
        }
    }
    let chain = p.repetition_loops();
    if chain.len() != rep.len() {
        let (name, span) = &rep[chain.len()];
        return Err(FrontError::new(
            FrontErrorKind::Pragma,
            *span,
            format!(
                "repetition loop `{name}` must be the only statement at its level, directly nested in {}",
                if chain.is_empty() {
                    "the function body".to_string()
                } else {
                    format!("loop `{}`", chain[chain.len() - 1].counter)
                }
            ),
        ));
    }
    Ok(())
}

fn count_loops(body: &[Stmt], name: &str) -> usize {
    body.iter()
        .map(|s| match s {
            Stmt::For(l) => usize::from(l.counter == name) + count_loops(&l.body, name),
            Stmt::Assign { .. } => 0,
        })
        .sum()
}

struct Resolver {
    program_params: Vec<String>,
    arrays: Vec<(String, usize)>,
    scope: Vec<String>,
    seen_counters: HashSet<String>,
}

impl Resolver {
    fn classify(&self, name: &str) -> Ident {
        if self.scope.iter().any(|c| c == name) {
            Ident::Counter
        } else if self.program_params.iter().any(|p| p == name) {
            Ident::Param(None)
        } else {
            Ident::Unknown
        }
    }

    fn affine(&self, e: &Expr) -> Result<AffineExpr, FrontError> {
        lower_affine(e, &|n| self.classify(n))
    }

    fn access(&self, a: &Access) -> Result<(), FrontError> {
        if let Some((_, rank)) = self.arrays.iter().find(|(n, _)| *n == a.array) {
            if *rank != a.subscripts.len() {
                return Err(FrontError::new(
                    FrontErrorKind::RankMismatch,
                    a.span,
                    format!(
                        "`{}` has rank {rank} but is accessed with {} subscripts",
                        a.array,
                        a.subscripts.len()
                    ),
                ));
            }
        }
        a.subscripts.iter().try_for_each(|sub| self.idents(sub))
    }

    /// Identifier resolution only; affinity of subscripts is checked when
    /// the Jacobians are taken.
    fn idents(&self, e: &Expr) -> Result<(), FrontError> {
        match &e.kind {
            ExprKind::Var(name) if self.classify(name) == Ident::Unknown => Err(FrontError::new(
                FrontErrorKind::UnknownIdentifier,
                e.span,
                format!("unknown identifier `{name}` (not a loop counter in scope or a declared parameter)"),
            )),
            ExprKind::Access(a) => self.access(a),
            ExprKind::Neg(x) => self.idents(x),
            ExprKind::Binary(_, l, r) => {
                self.idents(l)?;
                self.idents(r)
            }
            _ => Ok(()),
        }
    }

    fn value(&self, e: &Expr) -> Result<(), FrontError> {
        match &e.kind {
            ExprKind::Access(a) => self.access(a),
            ExprKind::Neg(x) => self.value(x),
            ExprKind::Binary(_, l, r) => {
                self.value(l)?;
                self.value(r)
            }
            ExprKind::Int(_) | ExprKind::Var(_) => Ok(()),
        }
    }

    fn stmt(&mut self, s: &mut Stmt) -> Result<(), FrontError> {
        match s {
            Stmt::For(l) => {
                if self.program_params.contains(&l.counter)
                    || self.arrays.iter().any(|(n, _)| *n == l.counter)
                {
                    return Err(FrontError::new(
                        FrontErrorKind::Duplicate,
                        l.span,
                        format!("loop counter `{}` shadows a declaration", l.counter),
                    ));
                }
                if !self.seen_counters.insert(l.counter.clone()) {
                    return Err(FrontError::new(
                        FrontErrorKind::Duplicate,
                        l.span,
                        format!("loop counter `{}` is used by more than one loop", l.counter),
                    ));
                }
                l.lower_aff = self.affine(&l.lower)?;
                let upper = self.affine(&l.upper)?;
                l.upper_aff = if l.inclusive {
                    upper
                } else {
                    upper.sub(&AffineExpr::constant(LinExpr::constant(1)))
                };
                self.scope.push(l.counter.clone());
                for b in &mut l.body {
                    self.stmt(b)?;
                }
                self.scope.pop();
                Ok(())
            }
            Stmt::Assign { target, value, .. } => {
                if let LValue::Array(a) = target {
                    self.access(a)?;
                }
                self.value(value)
            }
        }
    }
}
