//! Property tests: the printer/parser round trip on fuzzed syntax, and the
//! substitution laws.

use proptest::prelude::*;
use revisos::ast::*;
use revisos::parser::{parse_iso, parse_type, pretty_iso, pretty_type, pretty_value};

fn arb_name() -> impl Strategy<Value = String> {
    "[a-z][a-z0-9_']{0,3}".prop_filter("not a keyword", |s| {
        !matches!(
            s.as_str(),
            "mu" | "injl" | "injr" | "fold" | "let" | "in" | "fix" | "def" | "main"
        )
    })
}

fn arb_type() -> impl Strategy<Value = BaseType> {
    let leaf = prop_oneof![
        Just(BaseType::Unit),
        arb_name().prop_map(|n| BaseType::Var(n.to_uppercase())),
    ];
    leaf.prop_recursive(4, 24, 4, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| BaseType::sum(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| BaseType::prod(a, b)),
            (arb_name(), inner).prop_map(|(n, b)| BaseType::mu(n.to_uppercase(), b)),
        ]
    })
}

fn arb_value() -> impl Strategy<Value = Value> {
    let leaf = prop_oneof![Just(Value::Unit), arb_name().prop_map(Value::var)];
    leaf.prop_recursive(4, 24, 4, |inner| {
        prop_oneof![
            inner.clone().prop_map(Value::injl),
            inner.clone().prop_map(Value::injr),
            inner.clone().prop_map(Value::fold),
            (inner.clone(), inner).prop_map(|(a, b)| Value::pair(a, b)),
        ]
    })
}

fn arb_pattern() -> impl Strategy<Value = Pattern> {
    let leaf = arb_name().prop_map(Pattern::var);
    leaf.prop_recursive(3, 12, 2, |inner| {
        (inner.clone(), inner).prop_map(|(a, b)| Pattern::pair(a, b))
    })
}

fn arb_expr(iso: impl Strategy<Value = Iso> + Clone + 'static) -> impl Strategy<Value = Expr> {
    let leaf = arb_value().prop_map(Expr::Value);
    leaf.prop_recursive(3, 12, 2, move |inner| {
        (arb_pattern(), iso.clone(), arb_pattern(), inner)
            .prop_map(|(p, i, a, b)| Expr::let_in(p, i, a, b))
    })
}

fn arb_iso() -> impl Strategy<Value = Iso> {
    let leaf = prop_oneof![
        arb_name().prop_map(Iso::Var),
        proptest::collection::vec((arb_value(), arb_value().prop_map(Expr::Value)), 1..4)
            .prop_map(Iso::Clauses),
    ];
    leaf.prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            proptest::collection::vec((arb_value(), arb_expr(inner.clone())), 1..4)
                .prop_map(Iso::Clauses),
            (arb_name(), inner.clone()).prop_map(|(f, b)| Iso::fix(f, b)),
            (inner, arb_type(), arb_type()).prop_map(|(i, a, b)| Iso::annot(i, IsoType::new(a, b))),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn iso_round_trip(iso in arb_iso()) {
        let printed = pretty_iso(&iso);
        let reparsed = parse_iso(&printed)
            .unwrap_or_else(|e| panic!("reparse failed: {e}\nsource: {printed}"));
        prop_assert_eq!(reparsed, iso);
    }
}

proptest! {
    #[test]
    fn type_round_trip(ty in arb_type()) {
        let printed = pretty_type(&ty);
        let reparsed = parse_type(&printed)
            .unwrap_or_else(|e| panic!("reparse failed: {e}\nsource: {printed}"));
        prop_assert_eq!(reparsed, ty);
    }

    #[test]
    fn value_round_trip(v in arb_value()) {
        let printed = pretty_value(&v);
        let reparsed = revisos::parser::parse_value(&printed)
            .unwrap_or_else(|e| panic!("reparse failed: {e}\nsource: {printed}"));
        prop_assert_eq!(reparsed, v);
    }

    /// Disjoint-support substitutions commute.
    #[test]
    fn substitution_commutes(v in arb_value(), w1 in arb_value(), w2 in arb_value()) {
        let s1 = Subst::singleton("q_one", w1);
        let s2 = Subst::singleton("q_two", w2);
        prop_assert_eq!(v.subst(&s1).subst(&s2), v.subst(&s2).subst(&s1));
    }

    /// The empty substitution is the identity.
    #[test]
    fn empty_subst_identity(v in arb_value()) {
        prop_assert_eq!(v.subst(&Subst::new()), v);
    }
}
