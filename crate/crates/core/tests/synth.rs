use areole_core::exact_math::IntMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use std::collections::BTreeMap;

use areole_core::affine::Bindings;
use areole_core::front::{analyze, parse};
use areole_core::geometry::integer_points;
use areole_core::synth::*;

const MYTE: &str = "\
@repetition(i)
func myTE(in[][] : in, out[][] : out) {
    for (i = 0; i < 7; i++) {
        for (k = 0; k < 11; k++) {
            S = 0;
            for (j = 0; j < 100; j++) {
                S += in[0][j+11] * in[i+1][k+j];
            }
            out[i][k] = S;
        }
    }
}
";

fn strided(hi: i64) -> String {
    format!(
        "@repetition(i)
func f(in[] : in, out[] : out) {{
    for (i = 0; i < 1; i++) {{
        for (j = 0; j <= {hi}; j++) {{
            out[j] = in[2*j];
        }}
    }}
}}
"
    )
}

fn build(src: &str, strategy: Strategy) -> Vec<Channel> {
    let p = parse(src).unwrap();
    let b = Bindings::new();
    let (rep, refs) = analyze(&p, &b).unwrap();
    partition_by_paving(&refs)
        .iter()
        .map(|g| synthesize(g, strategy, &rep, &b).unwrap())
        .collect()
}

fn ints(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// The contract every channel must satisfy, checked over whole domains.
fn assert_contract(ch: &Channel) {
    let b1 = &ch.refs[0].origin;
    for r in &ch.refs {
        for j in integer_points(&r.reference.domain, &ch.bindings, 100_000).unwrap() {
            let phi = r.phi(&j);
            assert!(
                ch.in_pattern(&phi),
                "{} phi({j:?}) = {phi:?}",
                r.reference.label()
            );
            let mut rhs = r.local.apply(&j).unwrap();
            for ((x, o), b) in rhs.iter_mut().zip(&r.origin).zip(b1) {
                *x += o - b;
            }
            let rel: Vec<BigInt> = ch
                .cell_of(&phi)
                .iter()
                .zip(b1)
                .map(|(c, b)| c - b)
                .collect();
            assert_eq!(rel, rhs, "{}", r.reference.label());
        }
    }
}

#[test]
fn myte_partition() {
    let p = parse(MYTE).unwrap();
    let (_, refs) = analyze(&p, &Bindings::new()).unwrap();
    let groups = partition_by_paving(&refs);
    let names: Vec<String> = groups.iter().map(ReferenceGroup::name).collect();
    assert_eq!(names, ["in_ch1", "in_ch2", "out_ch1"]);
    assert!(groups.iter().all(|g| g.refs.len() == 1));
}

#[test]
fn identical_refs_share_a_group_and_arrays_split() {
    let src = "@repetition(i)
func f(a[] : in, b[] : in, o[] : out) {
    for (i = 0; i < 4; i++) {
        o[i] = a[i] + a[i] + b[i];
    }
}
";
    let p = parse(src).unwrap();
    let (_, refs) = analyze(&p, &Bindings::new()).unwrap();
    let groups = partition_by_paving(&refs);
    let sizes: Vec<(String, usize)> = groups.iter().map(|g| (g.name(), g.refs.len())).collect();
    assert_eq!(
        sizes,
        [
            ("a_ch1".to_string(), 2),
            ("b_ch1".into(), 1),
            ("o_ch1".into(), 1)
        ]
    );
    assert_eq!(groups[0].refs[0].occurrence, 1);
    assert_eq!(groups[0].refs[1].occurrence, 2);
}

#[test]
fn myte_general_channels() {
    let chans = build(MYTE, Strategy::General);
    let in1 = &chans[0];
    assert_eq!(in1.paving, IntMatrix::from_rows(&[[0], [0]]));
    assert_eq!(in1.pattern_sizes, ints(&[100]));
    assert_eq!(in1.fitting, IntMatrix::from_rows(&[[0], [1]]));
    assert_eq!(in1.paving_origin, ints(&[0, 11]));
    let in2 = &chans[1];
    assert_eq!(in2.paving, IntMatrix::from_rows(&[[1], [0]]));
    assert_eq!(in2.pattern_dim(), 1);
    assert_eq!(in2.pattern_sizes, ints(&[110]));
    let out = &chans[2];
    assert_eq!(out.paving, IntMatrix::from_rows(&[[1], [0]]));
    assert!(out.has_write());
    for ch in &chans {
        assert_contract(ch);
        assert_eq!(ch.pattern_dim(), ch.echelon.rank);
    }
}

#[test]
fn strided_general_compresses() {
    let chans = build(&strided(9), Strategy::General);
    let ch = &chans[0];
    assert_eq!(ch.fitting, IntMatrix::from_rows(&[[2]]));
    assert_eq!(ch.pattern_sizes, ints(&[10]));
    assert_eq!(ch.refs[0].phi(&ints(&[3])), ints(&[3]));
    assert_eq!(ch.asymptotic_density(), Some(rat(1, 2)));
    assert_eq!(overhead(ch, ENUMERATION_BUDGET).unwrap().ratio, rat(1, 1));
    assert_contract(ch);
}

#[test]
fn strided_footprint_box_overhead() {
    let ch = &build(&strided(9), Strategy::FootprintBox)[0];
    assert_eq!(ch.fitting, IntMatrix::identity(1));
    assert_eq!(ch.pattern_sizes, ints(&[19]));
    assert_eq!(overhead(ch, ENUMERATION_BUDGET).unwrap().ratio, rat(10, 19));
    assert_eq!(ch.asymptotic_density(), Some(rat(1, 2)));
    let big = &build(&strided(99), Strategy::FootprintBox)[0];
    assert_eq!(
        overhead(big, ENUMERATION_BUDGET).unwrap().ratio,
        rat(100, 199)
    );
    assert_contract(ch);
}

#[test]
fn identity_subscript_gives_identity_fitting() {
    let src = "@repetition(i)
func f(in[][] : in, out[] : out) {
    for (i = 0; i < 3; i++) {
        for (a = 2; a < 5; a++) {
            for (b = 0; b < 4; b++) {
                out[i] = in[a][b];
            }
        }
    }
}
";
    let ch = &build(src, Strategy::General)[0];
    assert_eq!(ch.fitting, IntMatrix::identity(2));
    assert_eq!(ch.pattern_sizes, ints(&[3, 4]));
    assert_eq!(ch.paving_origin, ints(&[2, 0]));
    assert_eq!(overhead(ch, ENUMERATION_BUDGET).unwrap().ratio, rat(1, 1));
    assert_contract(ch);
}

#[test]
fn zero_depth_pattern_is_a_point() {
    let src = "@repetition(i, k)
func copy(in[][] : in, out[][] : out) {
    for (i = 0; i < 4; i++) {
        for (k = 0; k < 5; k++) {
            out[i][k] = in[i][k];
        }
    }
}
";
    for strategy in [Strategy::General, Strategy::FootprintBox] {
        let chans = build(src, strategy);
        assert_eq!(chans.len(), 2);
        let ch = &chans[0];
        assert_eq!(ch.paving, IntMatrix::identity(2));
        assert_eq!(ch.pattern_cells(), BigInt::from(1));
        assert_contract(ch);
        assert_eq!(
            check_overlap(ch, ENUMERATION_BUDGET).unwrap(),
            OverlapStatus::Disjoint
        );
    }
    let general = build(src, Strategy::General);
    assert_eq!(general[0].fitting.shape(), (2, 0));
    assert_eq!(phi_text(&general[0].refs[0]), "[0]");
}

#[test]
fn disjoint_lattices_share_a_pattern() {
    let src = "@repetition(i)
func f(in[] : in, out[] : out) {
    for (i = 0; i < 2; i++) {
        for (j = 0; j < 5; j++) {
            out[j] = in[4*j] + in[4*j + 1];
        }
    }
}
";
    let chans = build(src, Strategy::General);
    let ch = &chans[0];
    assert_eq!(ch.refs.len(), 2);
    assert_eq!(ch.fitting, IntMatrix::from_rows(&[[1]]));
    assert_eq!(ch.pattern_sizes, ints(&[18]));
    assert_eq!(overhead(ch, ENUMERATION_BUDGET).unwrap().ratio, rat(10, 18));
    assert_eq!(ch.asymptotic_density(), None);
    assert_contract(ch);
}

#[test]
fn domain_iso_uses_subscript_matrix() {
    let ch = &build(&strided(9), Strategy::DomainIso)[0];
    assert_eq!(ch.fitting, IntMatrix::from_rows(&[[2]]));
    assert_eq!(ch.refs[0].phi_matrix, IntMatrix::identity(1));
    assert_eq!(ch.pattern_sizes, ints(&[10]));
    assert_contract(ch);

    let p = parse(
        "@repetition(i)
func f(in[] : in, out[] : out) {
    for (i = 0; i < 2; i++) {
        for (j = 0; j < 5; j++) {
            out[j] = in[j] + in[j + 1];
        }
    }
}
",
    )
    .unwrap();
    let (rep, refs) = analyze(&p, &Bindings::new()).unwrap();
    let g = &partition_by_paving(&refs)[0];
    let err = synthesize(g, Strategy::DomainIso, &rep, &Bindings::new()).unwrap_err();
    assert_eq!(err.code(), "E_STRATEGY");
}

#[test]
fn parametric_needs_bindings() {
    let src = "param N;
@repetition(i)
func f(in[][] : in, out[] : out) {
    for (i = 0; i < 4; i++) {
        for (j = 0; j < 5; j++) {
            for (k = 0; k < 5; k++) {
                out[i] = in[N*j][k];
            }
        }
    }
}
";
    let p = parse(src).unwrap();
    let (rep, refs) = analyze(&p, &Bindings::new()).unwrap();
    let g = &partition_by_paving(&refs)[0];
    let err = synthesize(g, Strategy::General, &rep, &Bindings::new()).unwrap_err();
    assert_eq!(err.code(), "E_PARAMETRIC");
    let msg = err.to_string();
    assert!(msg.contains("--param N="), "{msg}");
    assert!(msg.contains("gcd"), "{msg}");

    let mut b = Bindings::new();
    b.insert("N".into(), BigInt::from(3));
    let (rep, refs) = analyze(&p, &b).unwrap();
    let g = &partition_by_paving(&refs)[0];
    let ch = synthesize(g, Strategy::General, &rep, &b).unwrap();
    assert_eq!(ch.fitting, IntMatrix::from_rows(&[[3, 0], [0, 1]]));
    assert_contract(&ch);
}

#[test]
fn unbounded_domain_reports_and_user_box_rescues() {
    let src = "@repetition(i)
func f(in[] : in, out[] : out) {
    for (i = 0; i < 2; i++) {
        for (j = 0; j < 5; j++) {
            for (k = 0; k < j; k++) {
                out[i] = in[k];
            }
        }
    }
}
";
    let p = parse(src).unwrap();
    let (rep, refs) = analyze(&p, &Bindings::new()).unwrap();
    let ok = synthesize_all(&refs, &rep, &Bindings::new(), &SynthOptions::default()).unwrap();
    assert_eq!(ok[0].channel.pattern_sizes, ints(&[4]));

    let mut boxes = BTreeMap::new();
    boxes.insert(
        "in#1".to_string(),
        vec![
            (BigInt::from(0), BigInt::from(4)),
            (BigInt::from(0), BigInt::from(9)),
        ],
    );
    let opts = SynthOptions {
        user_boxes: boxes,
        ..SynthOptions::default()
    };
    let boxed = synthesize_all(&refs, &rep, &Bindings::new(), &opts).unwrap();
    assert_eq!(boxed[0].channel.pattern_sizes, ints(&[10]));
}

#[test]
fn overlap_examples() {
    let tile = |stride: i64, write: bool| {
        let body = if write {
            format!("out[{stride}*i + j] = in[i];")
        } else {
            format!("out[i] = in[{stride}*i + j];")
        };
        format!(
            "@repetition(i)
func f(in[] : in, out[] : out) {{
    for (i = 0; i < 4; i++) {{
        for (j = 0; j < 2; j++) {{
            {body}
        }}
    }}
}}
"
        )
    };
    let ch = &build(&tile(2, false), Strategy::General)[0];
    assert_eq!(
        check_overlap(ch, ENUMERATION_BUDGET).unwrap(),
        OverlapStatus::Disjoint
    );

    let ch = &build(&tile(1, false), Strategy::General)[0];
    assert_eq!(
        check_overlap(ch, ENUMERATION_BUDGET).unwrap(),
        OverlapStatus::Overlap(OverlapWitness {
            kind: OverlapKind::Input,
            first: ints(&[0]),
            second: ints(&[1]),
            cell: ints(&[1]),
        })
    );

    let chans = build(&tile(1, true), Strategy::General);
    let out = chans.iter().find(|c| c.array.name == "out").unwrap();
    match check_overlap(out, ENUMERATION_BUDGET).unwrap() {
        OverlapStatus::Overlap(w) => assert_eq!(w.kind, OverlapKind::Output),
        other => panic!("{other:?}"),
    }

    let in1 = &build(MYTE, Strategy::General)[0];
    match check_overlap(in1, ENUMERATION_BUDGET).unwrap() {
        OverlapStatus::Overlap(w) => {
            assert_eq!(w.kind, OverlapKind::Input);
            assert_eq!((w.first, w.second), (ints(&[0]), ints(&[1])));
            assert_eq!(w.cell, ints(&[0, 11]));
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn overlap_budget_is_enforced() {
    let ch = &build(MYTE, Strategy::General)[1];
    assert!(matches!(
        check_overlap(ch, 10),
        Err(SynthError::BudgetExceeded(..))
    ));
}

#[test]
fn paving_lint() {
    assert!(lint_paving(&IntMatrix::from_rows(&[[1], [0]])));
    assert!(!lint_paving(&IntMatrix::from_rows(&[[1, 1], [0, 1]])));
    assert!(lint_paving(&IntMatrix::zeros(2, 2)));
}

#[test]
fn rewrite_myte() {
    let p = parse(MYTE).unwrap();
    let chans = build(MYTE, Strategy::General);
    let text = rewrite_program(&p, &chans);
    assert!(text.contains("S += in_ch1[j] * in_ch2["), "{text}");
    assert!(text.contains("out_ch1[k] = S;"), "{text}");
    assert!(
        text.contains("func myTE(in_ch1[] : in, in_ch2[] : in, out_ch1[] : out)"),
        "{text}"
    );
    let again = parse(&text).unwrap();
    assert_eq!(again.repetition, vec!["i"]);
}

#[test]
fn rewrite_strided() {
    let src = strided(9);
    let p = parse(&src).unwrap();
    let text = rewrite_program(&p, &build(&src, Strategy::General));
    assert!(text.contains("out_ch1[j] = in_ch1[j];"), "{text}");
    parse(&text).unwrap();
}

#[test]
fn strategies_touch_the_same_cells() {
    for src in [MYTE.to_string(), strided(9)] {
        let a = build(&src, Strategy::General);
        let b = build(&src, Strategy::FootprintBox);
        for (x, y) in a.iter().zip(&b) {
            let cells = |ch: &Channel| {
                let mut s = std::collections::BTreeSet::new();
                for r in &ch.refs {
                    for j in integer_points(&r.reference.domain, &ch.bindings, 100_000).unwrap() {
                        s.insert(ch.cell_of(&r.phi(&j)));
                    }
                }
                s
            };
            assert_eq!(cells(x), cells(y));
        }
    }
}

#[test]
fn strategy_names_parse() {
    for s in [
        Strategy::General,
        Strategy::FootprintBox,
        Strategy::DomainIso,
    ] {
        assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
    }
    assert!("box".parse::<Strategy>().is_err());
}
