use atomwork::chain::{self, ChainAtom, ChainStructure, FinCof};
use proptest::prelude::*;

fn atom() -> impl Strategy<Value = ChainAtom> {
    prop_oneof![
        Just(ChainAtom::Identity),
        Just(ChainAtom::X),
        Just(ChainAtom::XConv),
        (0i64..12).prop_map(|i| ChainAtom::elem(0, i)),
        (-8i64..8).prop_map(|i| ChainAtom::elem(1, i)),
    ]
}

fn fincof() -> impl Strategy<Value = FinCof> {
    (any::<bool>(), proptest::collection::btree_set(atom(), 0..6))
        .prop_map(|(cofinite, exceptions)| FinCof { cofinite, exceptions })
}

fn probes() -> Vec<ChainAtom> {
    let mut out = ChainAtom::SPECIAL.to_vec();
    out.extend((0..20).map(|i| ChainAtom::elem(0, i)));
    out.extend((-14..14).map(|i| ChainAtom::elem(1, i)));
    out.push(ChainAtom::elem(0, 500));
    out.push(ChainAtom::elem(1, -500));
    out
}

fn same(s: &ChainStructure, a: &FinCof, b: &FinCof) -> bool {
    probes().iter().filter(|p| s.contains(p)).all(|p| a.contains(p) == b.contains(p))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn boolean_and_converse_laws(a in fincof(), b in fincof()) {
        prop_assert_eq!(a.complement().complement(), a.clone());
        prop_assert_eq!(a.converse().converse(), a.clone());
        prop_assert_eq!(a.union(&b).complement(), a.complement().meet(&b.complement()));
        for p in probes() {
            prop_assert_eq!(a.union(&b).contains(&p), a.contains(&p) || b.contains(&p));
            prop_assert_eq!(a.meet(&b).contains(&p), a.contains(&p) && b.contains(&p));
            prop_assert_eq!(a.converse().contains(&p.converse()), a.contains(&p));
        }
    }

    #[test]
    fn composition_laws(a in fincof(), b in fincof(), c in fincof()) {
        let s = ChainStructure::omega_zed();
        let id = FinCof::finite([ChainAtom::Identity]);
        prop_assert!(same(&s, &chain::compose(&s, &a, &id), &a));
        prop_assert!(same(&s, &chain::compose(&s, &id, &a), &a));
        let left = chain::compose(&s, &a, &b.union(&c));
        let right = chain::compose(&s, &a, &b).union(&chain::compose(&s, &a, &c));
        prop_assert!(same(&s, &left, &right));
        let conv = chain::compose(&s, &a, &b).converse();
        prop_assert!(same(&s, &conv, &chain::compose(&s, &b.converse(), &a.converse())));
        for p in probes() {
            prop_assert_eq!(chain::compose(&s, &a, &b).contains(&p), chain::compose_contains(&s, &a, &b, &p));
        }
    }
}
