use std::collections::BTreeSet;

use areole_core::affine::Bindings;
use areole_core::echelon::lattice_equal_oracle;
use areole_core::exact_math::{rank_oracle, IntMatrix};
use areole_core::geometry::{integer_points, ranges_iter};
use areole_core::pipeline::{run, Analysis};
use areole_core::spec_doc::SpecDocument;
use areole_core::synth::{
    overhead, Channel, Strategy as Construction, SynthOptions, ENUMERATION_BUDGET,
};
use num_bigint::BigInt;
use num_traits::{One, Signed};
use proptest::prelude::*;

const COUNTERS: [&str; 2] = ["j", "k"];

fn term(coeff: i64, name: &str) -> String {
    match coeff {
        0 => String::new(),
        1 => format!(" + {name}"),
        -1 => format!(" - {name}"),
        c if c < 0 => format!(" - {}*{name}", -c),
        c => format!(" + {c}*{name}"),
    }
}

/// `c0 + c1*i + sum b*j` as source text.
fn subscript(rep: i64, local: &[i64], constant: i64) -> String {
    let mut s = constant.to_string();
    s.push_str(&term(rep, "i"));
    for (b, name) in local.iter().zip(COUNTERS) {
        s.push_str(&term(*b, name));
    }
    s
}

#[derive(Debug, Clone)]
struct Kernel {
    rank: usize,
    depth: usize,
    extents: Vec<i64>,
    paving: Vec<i64>,
    /// Per reference: rank rows of depth coefficients, plus constants.
    refs: Vec<(Vec<Vec<i64>>, Vec<i64>)>,
}

impl Kernel {
    fn source(&self) -> String {
        let mut s = String::from("@repetition(i)\nfunc gen(in");
        s.push_str(&"[]".repeat(self.rank));
        s.push_str(" : in, out[] : out) {\n    for (i = 0; i < 3; i++) {\n");
        let mut indent = String::from("        ");
        for (d, n) in self.extents.iter().enumerate() {
            let c = COUNTERS[d];
            s.push_str(&format!("{indent}for ({c} = 0; {c} < {n}; {c}++) {{\n"));
            indent.push_str("    ");
        }
        let reads: Vec<String> = self
            .refs
            .iter()
            .map(|(rows, consts)| {
                let subs: String = (0..self.rank)
                    .map(|a| format!("[{}]", subscript(self.paving[a], &rows[a], consts[a])))
                    .collect();
                format!("in{subs}")
            })
            .collect();
        s.push_str(&format!("{indent}out[i] += {};\n", reads.join(" + ")));
        for _ in 0..self.depth {
            indent.truncate(indent.len() - 4);
            s.push_str(&format!("{indent}}}\n"));
        }
        s.push_str("    }\n}\n");
        s
    }
}

fn kernel() -> impl Strategy<Value = Kernel> {
    (1usize..=2, 1usize..=2, 1usize..=3).prop_flat_map(|(rank, depth, nrefs)| {
        (
            proptest::collection::vec(1i64..=4, depth),
            proptest::collection::vec(-3i64..=3, rank),
            proptest::collection::vec(
                (
                    proptest::collection::vec(proptest::collection::vec(-3i64..=3, depth), rank),
                    proptest::collection::vec(0i64..=5, rank),
                ),
                nrefs,
            ),
        )
            .prop_map(move |(extents, paving, refs)| Kernel {
                rank,
                depth,
                extents,
                paving,
                refs,
            })
    })
}

fn analyse(src: &str, strategy: Construction) -> Analysis {
    let opts = SynthOptions {
        strategy: Some(strategy),
        check_overlap: true,
        ..SynthOptions::default()
    };
    run(src, &Bindings::new(), &opts).unwrap()
}

fn input_channel(a: &Analysis) -> &Channel {
    &a.channels
        .iter()
        .find(|c| c.channel.array.name == "in")
        .unwrap()
        .channel
}

fn touched(ch: &Channel) -> BTreeSet<Vec<BigInt>> {
    let mut out = BTreeSet::new();
    for r in ranges_iter(&ch.repetition_ranges) {
        let base = ch.paving.apply(&r).unwrap();
        for cr in &ch.refs {
            for j in integer_points(&cr.reference.domain, &ch.bindings, 100_000).unwrap() {
                let cell = ch.cell_of(&cr.phi(&j));
                out.insert(base.iter().zip(&cell).map(|(a, b)| a + b).collect());
            }
        }
    }
    out
}

/// Cells from the raw subscripts `P r + B j + b`.
fn direct(ch: &Channel) -> BTreeSet<Vec<BigInt>> {
    let mut out = BTreeSet::new();
    for r in ranges_iter(&ch.repetition_ranges) {
        let base = ch.paving.apply(&r).unwrap();
        for cr in &ch.refs {
            for j in integer_points(&cr.reference.domain, &ch.bindings, 100_000).unwrap() {
                let bj = cr.local.apply(&j).unwrap();
                out.insert(
                    (0..bj.len())
                        .map(|k| &base[k] + &bj[k] + &cr.origin[k])
                        .collect(),
                );
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn every_strategy_touches_the_source_cells(k in kernel()) {
        let src = k.source();
        let general = analyse(&src, Construction::General);
        let boxed = analyse(&src, Construction::FootprintBox);
        let (g, b) = (input_channel(&general), input_channel(&boxed));
        let truth = direct(g);
        prop_assert_eq!(&touched(g), &truth, "{}", src);
        prop_assert_eq!(&touched(b), &truth, "{}", src);
        for cr in &g.refs {
            for j in integer_points(&cr.reference.domain, &g.bindings, 100_000).unwrap() {
                prop_assert!(g.in_pattern(&cr.phi(&j)));
            }
        }
        if k.refs.len() == 1 {
            let iso = analyse(&src, Construction::DomainIso);
            prop_assert_eq!(&touched(input_channel(&iso)), &truth);
        }
    }

    #[test]
    fn pattern_dimension_is_combined_rank(k in kernel()) {
        let a = analyse(&k.source(), Construction::General);
        let ch = input_channel(&a);
        prop_assert_eq!(ch.pattern_dim(), rank_oracle(&ch.combined));
        prop_assert_eq!(ch.fitting.shape(), (k.rank, ch.pattern_dim()));
        let ratio = overhead(ch, ENUMERATION_BUDGET).unwrap().ratio;
        prop_assert!(ratio.is_positive() && ratio <= One::one());
    }

    #[test]
    fn fitting_generates_the_combined_lattice(k in kernel()) {
        let a = analyse(&k.source(), Construction::General);
        let ch = input_channel(&a);
        if ch.pattern_dim() > 0 {
            let bx: Vec<(i64, i64)> = vec![(-12, 12); k.rank];
            prop_assert!(lattice_equal_oracle(&ch.fitting, &ch.combined, &bx).unwrap());
        }
    }

    #[test]
    fn spec_round_trips(k in kernel()) {
        let a = analyse(&k.source(), Construction::General);
        let text = a.spec().to_json();
        let doc = SpecDocument::from_json(&text).unwrap();
        prop_assert_eq!(&doc, &a.spec());
        prop_assert_eq!(doc.to_json(), text);
        for (s, c) in doc.channels.iter().zip(&a.channels) {
            prop_assert!(s.describes(&c.channel));
        }
    }

    #[test]
    fn signed_permutation_subscripts_waste_nothing(
        swap in any::<bool>(), neg in (any::<bool>(), any::<bool>()), n in (1i64..=5, 1i64..=5)
    ) {
        let sign = |b: bool| if b { -1 } else { 1 };
        let rows = if swap {
            vec![vec![0, sign(neg.0)], vec![sign(neg.1), 0]]
        } else {
            vec![vec![sign(neg.0), 0], vec![0, sign(neg.1)]]
        };
        let k = Kernel {
            rank: 2,
            depth: 2,
            extents: vec![n.0, n.1],
            paving: vec![0, 0],
            refs: vec![(rows, vec![5, 5])],
        };
        let a = analyse(&k.source(), Construction::General);
        let ch = input_channel(&a);
        prop_assert_eq!(ch.fitting.determinant().unwrap().abs(), BigInt::one());
        prop_assert_eq!(overhead(ch, ENUMERATION_BUDGET).unwrap().ratio, One::one());
    }

    #[test]
    fn echelon_form_subscripts_are_their_own_fitting(
        diag in (1i64..=3, 1i64..=3), low in 0i64..3, n in (1i64..=4, 1i64..=4)
    ) {
        // Reduced form keeps entries left of a pivot below that pivot.
        let low = low % diag.1;
        let k = Kernel {
            rank: 2,
            depth: 2,
            extents: vec![n.0, n.1],
            paving: vec![1, 0],
            refs: vec![(vec![vec![diag.0, 0], vec![low, diag.1]], vec![0, 0])],
        };
        let a = analyse(&k.source(), Construction::General);
        let ch = input_channel(&a);
        let b = IntMatrix::from_rows(&[[diag.0, 0], [low, diag.1]]);
        prop_assert_eq!(&ch.fitting, &b);
        prop_assert_eq!(&ch.refs[0].phi_matrix, &IntMatrix::identity(2));
    }
}
