//! Property tests: parser/printer laws, renaming as an action, checker
//! roundtrips, and backward completeness for forward application.

use proptest::prelude::*;

use ndml::calculus::{apply, backward, check_instance, CalcConfig};
use ndml::syntax::{
    parse_sequent, rename_sequent, Formula, Sequent, Structure, Term, VarId, VarKind,
};

fn formula_strategy() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        (0u32..3).prop_map(Formula::atom),
        (0u32..2).prop_map(|k| Formula::Atom(VarId::prop_q(k))),
        Just(Formula::Top),
        Just(Formula::Bot),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            inner.clone().prop_map(Formula::box_),
            inner.prop_map(Formula::dia),
        ]
    })
}

fn term_strategy() -> impl Strategy<Value = (Term, VarId)> {
    // A term together with a variable guaranteed distinct from its own.
    prop_oneof![
        (0u32..4).prop_map(|k| (Term::Nom(VarId::nom(2 * k + 1)), VarId::nom(2 * k + 3))),
        (0u32..4).prop_map(|k| (Term::DiaN(VarId::nom(2 * k + 1)), VarId::nom(2 * k + 3))),
        (0u32..4).prop_map(|k| (Term::BDiaN(VarId::nom(2 * k + 1)), VarId::nom(2 * k + 3))),
        (0u32..4).prop_map(|k| (Term::CoNom(VarId::conom(2 * k)), VarId::conom(2 * k + 2))),
        (0u32..4).prop_map(|k| (Term::BoxC(VarId::conom(2 * k)), VarId::conom(2 * k + 2))),
        (0u32..4).prop_map(|k| (Term::BBoxC(VarId::conom(2 * k)), VarId::conom(2 * k + 2))),
    ]
}

fn structure_strategy() -> impl Strategy<Value = Structure> {
    prop_oneof![
        ((0u32..5), formula_strategy()).prop_map(|(j, a)| Structure::LabJ(VarId::nom(2 * j + 1), a)),
        (formula_strategy(), (0u32..5)).prop_map(|(a, m)| Structure::LabM(a, VarId::conom(2 * m))),
        term_strategy().prop_map(|(t, other)| match (t, other) {
            (t, v) if v.kind == VarKind::Nominal && t.var() != v => Structure::pure_j(v, t).unwrap(),
            (t, v) => Structure::pure_m(t, v).unwrap(),
        }),
    ]
}

fn sequent_strategy() -> impl Strategy<Value = Sequent> {
    (
        proptest::collection::vec(structure_strategy(), 0..4),
        proptest::collection::vec(structure_strategy(), 0..3),
    )
        .prop_map(|(ant, con)| Sequent::new(ant, con))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    /// parse(print(s)) is the identity on printable sequents.
    #[test]
    fn parse_print_roundtrip(s in sequent_strategy()) {
        let printed = s.to_string();
        let back = parse_sequent(&printed).unwrap();
        prop_assert_eq!(back, s);
    }

    /// print(parse(x)) is idempotent after one pass.
    #[test]
    fn print_parse_canonicalizes(s in sequent_strategy()) {
        let printed = s.to_string();
        let once = parse_sequent(&printed).unwrap().to_string();
        let twice = parse_sequent(&once).unwrap().to_string();
        prop_assert_eq!(once, twice);
    }

    /// Renaming is an action: composing maps equals composing renames.
    #[test]
    fn rename_action_law(s in sequent_strategy(), shift in 1u32..4) {
        use std::collections::BTreeMap;
        let vars = s.term_vars();
        // sigma shifts every variable up by 2*shift; tau shifts back.
        let sigma: BTreeMap<_, _> = vars
            .iter()
            .map(|v| (*v, VarId { kind: v.kind, index: v.index + 2 * shift }))
            .collect();
        let tau: BTreeMap<_, _> = sigma.iter().map(|(a, b)| (*b, *a)).collect();
        let one = rename_sequent(&rename_sequent(&s, &sigma).unwrap(), &tau).unwrap();
        prop_assert_eq!(one, s.clone());
        // tau after sigma equals applying the composition directly.
        let compose: BTreeMap<_, _> = sigma.iter().map(|(a, b)| (*a, tau[b])).collect();
        let direct = rename_sequent(&s, &compose).unwrap();
        prop_assert_eq!(direct, s);
    }
}

/// Every corpus rule instance roundtrips through check_instance, and
/// backward re-discovers it from its conclusion.
#[test]
fn corpus_instances_roundtrip_and_backward_complete() {
    for entry in ndml::corpus::all() {
        let cfg = CalcConfig::with_sigma(&entry.sigma);
        for node in entry.derivation.flatten() {
            let vs = check_instance(&cfg, &node.inst);
            assert!(vs.is_empty(), "{}: {:?}", entry.name, vs);
            if node.rule().is_cut() {
                continue;
            }
            let steps = backward(&cfg, &node.end());
            let hit = steps.iter().any(|s| {
                s.rule == node.rule()
                    && s.premises.len() == node.inst.premises.len()
                    && s.premises
                        .iter()
                        .zip(&node.inst.premises)
                        .all(|(a, b)| a.alpha_eq(b))
            });
            assert!(
                hit,
                "{}: backward misses {} deriving `{}`",
                entry.name,
                node.rule(),
                node.end()
            );
        }
    }
}

/// Applying any backward step forward re-derives the goal (soundness of
/// the enumeration).
#[test]
fn backward_steps_apply_forward() {
    let cfg = CalcConfig::with_sigma(&[ndml::calculus::Axiom::T, ndml::calculus::Axiom::Four]);
    for text in [
        "j1 <= []p0 |- j1 <= p0",
        "<>p0 <= m0 |- <><>p0 <= m0",
        "j1 <= p0&q0 |- j1 <= p0",
        "j1 <= <#>j3, j3 <= [][]p0 |- j1 <= []p0",
    ] {
        let goal = parse_sequent(text).unwrap();
        for step in backward(&cfg, &goal) {
            let inst = apply(&cfg, step.rule, &step.premises, &step.bindings)
                .unwrap_or_else(|e| panic!("{} via {}: {}", text, step.rule, e));
            assert!(inst.conclusion.multiset_eq(&goal), "{} via {}", text, step.rule);
        }
    }
}
