use areole_core::affine::LinExpr;
use areole_core::front::ast::{ArrayDecl, Direction, Span, Stmt};
use areole_core::front::parser::*;
use areole_core::front::print::print_program;
use areole_core::front::FrontErrorKind;

const MYTE: &str = "\
// translated kernel
@repetition(i)
func myTE(in[][] : in, out[][] : out) {
    for (i = 0; i < 7; i++)  // boucle TE
    {
        for (k = 0; k < 11; k++)
        {
            S = 0;
            for (j = 0; j < 100; j++)
            {
                S += in[0][j+11] * in[i+1][k+j];
            }
            out[i][k] = S;
        }
    }
}
";

fn counters(body: &[Stmt], out: &mut Vec<String>) {
    for s in body {
        if let Stmt::For(l) = s {
            out.push(l.counter.clone());
            counters(&l.body, out);
        }
    }
}

#[test]
fn parses_translated_kernel() {
    let p = parse(MYTE).unwrap();
    assert_eq!(p.name, "myTE");
    assert_eq!(
        p.arrays,
        vec![
            ArrayDecl {
                name: "in".into(),
                rank: 2,
                direction: Direction::Input
            },
            ArrayDecl {
                name: "out".into(),
                rank: 2,
                direction: Direction::Output
            },
        ]
    );
    assert_eq!(p.repetition, vec!["i"]);
    let mut cs = Vec::new();
    counters(&p.body, &mut cs);
    assert_eq!(cs, vec!["i", "k", "j"]);
    let Stmt::For(i) = &p.body[0] else { panic!() };
    assert_eq!(i.upper_aff.constant_term(), &LinExpr::constant(6));
}

#[test]
fn empty_body() {
    let p = parse("func f(a[] : in) { }").unwrap();
    assert!(p.body.is_empty());
    assert!(p.repetition.is_empty());
}

#[test]
fn print_parse_fixed_point() {
    let p1 = parse(MYTE).unwrap();
    let text = print_program(&p1);
    let p2 = parse(&text).unwrap();
    assert_eq!(p1.without_spans(), p2.without_spans());
    assert_eq!(print_program(&p2), text);

    let src = "param N, M;\n@repetition(r)\nfunc g(a[] : in, b[][] : out) {\n  for (r = 0; r <= N - 1; r++)\n    for (t = 0; t < M; t++) b[r][t] -= -a[2*(t - 1) + N] * (3 - (t - r));\n}";
    let p1 = parse(src).unwrap();
    let p2 = parse(&print_program(&p1)).unwrap();
    assert_eq!(p1.without_spans(), p2.without_spans());
}

#[test]
fn syntax_errors_carry_positions() {
    let err = parse("func f(a[] : in) {\n  x = ;\n}").unwrap_err();
    assert_eq!(err.kind, FrontErrorKind::Syntax);
    assert_eq!(err.span, Span { line: 2, col: 7 });

    let err = parse("func f(a[] : sideways) { }").unwrap_err();
    assert_eq!(err.kind, FrontErrorKind::Syntax);
    assert!(parse("func f(a[] : in) { /* open").is_err());
    assert!(parse("func f(a[] : in) { } trailing").is_err());
    assert!(parse("func f(a[] : in) { for (i = 0; j < 3; i++) x = 1; }").is_err());
}

#[test]
fn unknown_identifier_in_subscript_or_bound() {
    let err = parse("func f(a[] : in) { for (i = 0; i < 4; i++) x = a[q]; }").unwrap_err();
    assert_eq!(err.kind, FrontErrorKind::UnknownIdentifier);
    let err = parse("func f(a[] : in) { for (i = 0; i < Z; i++) x = a[i]; }").unwrap_err();
    assert_eq!(err.kind, FrontErrorKind::UnknownIdentifier);
    // Scalars on right-hand sides are fine.
    parse("func f(a[] : in) { for (i = 0; i < 4; i++) x = a[i] + y; }").unwrap();
}

#[test]
fn repetition_pragma_errors() {
    let err = parse("@repetition(z)\nfunc f(a[] : in) { for (i = 0; i < 4; i++) x = a[i]; }")
        .unwrap_err();
    assert_eq!(err.kind, FrontErrorKind::Pragma);
    let err = parse(
        "@repetition(j)\nfunc f(a[] : in) { for (i = 0; i < 4; i++) for (j = 0; j < 4; j++) x = a[i]; }",
    )
    .unwrap_err();
    assert_eq!(err.kind, FrontErrorKind::Pragma);
    let err =
        parse("@repetition(i)\nfunc f(a[] : in) { x = 0; for (i = 0; i < 4; i++) x = a[i]; }")
            .unwrap_err();
    assert_eq!(err.kind, FrontErrorKind::Pragma);
    let ok = parse(
        "@repetition(i, k)\nfunc f(a[][] : in) { for (i = 0; i < 4; i++) for (k = 0; k < 4; k++) x = a[i][k]; }",
    )
    .unwrap();
    assert_eq!(ok.repetition_loops().len(), 2);
}

#[test]
fn rank_and_duplicate_checks() {
    let err = parse("func f(a[][] : in) { x = a[0]; }").unwrap_err();
    assert_eq!(err.kind, FrontErrorKind::RankMismatch);
    let err = parse("func f(a[] : in, a[] : out) { }").unwrap_err();
    assert_eq!(err.kind, FrontErrorKind::Duplicate);
    let err = parse("func f(a[] : in) { for (i = 0; i < 2; i++) for (i = 0; i < 2; i++) x = 1; }")
        .unwrap_err();
    assert_eq!(err.kind, FrontErrorKind::Duplicate);
}

#[test]
fn nonaffine_bounds_are_rejected_at_parse() {
    let err =
        parse("func f(a[] : in) { for (i = 0; i < 4; i++) for (j = 0; j < i*i; j++) x = a[j]; }")
            .unwrap_err();
    assert_eq!(err.kind, FrontErrorKind::NonAffine);
    assert!(err.message.contains("i * i"));
    // Subscript affinity is the Jacobian step's business.
    parse("func f(a[] : in) { for (i = 0; i < 4; i++) for (j = 0; j < 4; j++) x = a[i*j]; }")
        .unwrap();
}
