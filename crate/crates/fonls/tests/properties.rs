//! Randomized grammar coverage for the nonlinearity parser: any expression
//! the grammar admits must parse, and the canonical rendering must be a
//! fixed point of parse -> render.

use fonls::PolynomialNonlinearity;
use proptest::prelude::*;

fn inner_factor() -> BoxedStrategy<String> {
    prop_oneof![
        Just("u".to_string()),
        Just("lap(u)".to_string()),
        (1u8..=2).prop_map(|j| format!("d({j})u")),
        (1u8..=2, 1u8..=2).prop_map(|(j, k)| format!("d({j},{k})u")),
    ]
    .boxed()
}

fn factor() -> BoxedStrategy<String> {
    prop_oneof![
        inner_factor(),
        inner_factor().prop_map(|s| format!("conj({s})")),
        Just("|lap(u)|^2".to_string()),
    ]
    .boxed()
}

fn coefficient() -> BoxedStrategy<String> {
    // a bare real starts with a digit or dot; signs live on the expression
    // level or inside the (re,im) literal
    prop_oneof![
        Just(String::new()),
        (0.0..1e3f64).prop_map(|c| format!("{c}*")),
        (-1e3..1e3f64, -1e3..1e3f64).prop_map(|(re, im)| format!("({re},{im})*")),
    ]
    .boxed()
}

fn term() -> BoxedStrategy<String> {
    (coefficient(), prop::collection::vec(factor(), 2..=4))
        .prop_map(|(c, fs)| format!("{c}{}", fs.join("*")))
        .boxed()
}

fn expression() -> BoxedStrategy<String> {
    (
        any::<bool>(),
        term(),
        prop::collection::vec((any::<bool>(), term()), 0..=2),
    )
        .prop_map(|(neg, first, rest)| {
            let mut s = if neg { format!("-{first}") } else { first };
            for (plus, t) in rest {
                s.push_str(if plus { " + " } else { " - " });
                s.push_str(&t);
            }
            s
        })
        .boxed()
}

proptest! {
    #[test]
    fn canonical_form_is_a_parse_fixed_point(src in expression()) {
        let p1 = PolynomialNonlinearity::parse(&src)
            .expect("grammar-conforming input parses");
        let canonical = p1.to_string();
        let p2 = PolynomialNonlinearity::parse(&canonical)
            .expect("canonical form re-parses");
        prop_assert_eq!(p2.to_string(), canonical);
        prop_assert_eq!(p1.terms().len(), p2.terms().len());
        prop_assert_eq!(p1.degree_min(), p2.degree_min());
        prop_assert_eq!(p1.degree_max(), p2.degree_max());
    }
}
