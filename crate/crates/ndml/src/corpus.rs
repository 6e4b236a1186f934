//! Programmatic constructions of the shipped derivations: the
//! distribution laws, the five extension-axiom derivations, and the two
//! policy case studies with their parametric-stage transforms, plus a
//! generic identity-derivation builder used for composing proofs.

use std::collections::BTreeMap;

use crate::calculus::{Axiom, Bindings, CalcConfig, RuleId};
use crate::proof::{by_rule, Derivation};
use crate::syntax::{Formula, FreshGen, Structure, Term, VarId, VarKind};
use crate::transform::{parametric_step, Policy};

fn rule(cfg: &CalcConfig, id: RuleId, children: Vec<Derivation>, b: Bindings) -> Derivation {
    by_rule(cfg, id, children, b).unwrap_or_else(|e| panic!("corpus: {} failed: {}", id, e))
}

fn p0() -> Formula {
    Formula::atom(0)
}
fn q0() -> Formula {
    Formula::Atom(VarId::prop_q(0))
}
fn j(i: u32) -> VarId {
    VarId::nom(i)
}
fn m(i: u32) -> VarId {
    VarId::conom(i)
}

/// Derivation of the (T)-axiom sequent `j1 <= []p0 |- j1 <= p0`.
pub fn axiom_t(cfg: &CalcConfig) -> Derivation {
    let id = rule(cfg, RuleId::IdPm, vec![], Bindings::new().v('m', m(0)).f('A', p0()));
    let boxp = rule(
        cfg,
        RuleId::BoxP,
        vec![id],
        Bindings::new().v('j', j(1)).v('m', m(0)).f('A', p0()),
    );
    let t = rule(cfg, RuleId::AxT, vec![boxp], Bindings::new().v('j', j(1)).v('m', m(0)));
    rule(
        cfg,
        RuleId::SJ,
        vec![t],
        Bindings::new().v('j', j(1)).v('m', m(0)).f('A', p0()),
    )
}

/// Derivation of the (4)-axiom sequent `<>p0 <= m0 |- <><>p0 <= m0`.
pub fn axiom_4(cfg: &CalcConfig) -> Derivation {
    let id = rule(cfg, RuleId::IdJp, vec![], Bindings::new().v('j', j(1)).f('A', p0()));
    let dias = rule(
        cfg,
        RuleId::DiaS,
        vec![id],
        Bindings::new().v('j', j(1)).v('m', m(0)).f('A', p0()),
    );
    let four = rule(
        cfg,
        RuleId::Ax4,
        vec![dias],
        Bindings::new().v('j', j(1)).v('m', m(0)).v('h', j(3)),
    );
    let adj = rule(cfg, RuleId::AdjDiaBb, vec![four], Bindings::new().v('j', j(3)).v('m', m(0)));
    let sw = rule(
        cfg,
        RuleId::STTm,
        vec![adj],
        Bindings::new()
            .v('j', j(3))
            .v('m', m(2))
            .t('T', Term::BBoxC(m(0)))
            .t('U', Term::DiaN(j(1))),
    );
    let diap = rule(
        cfg,
        RuleId::DiaP,
        vec![sw],
        Bindings::new().v('j', j(1)).v('m', m(2)).f('A', p0()),
    );
    let sw2 = rule(
        cfg,
        RuleId::SJT,
        vec![diap],
        Bindings::new()
            .v('j', j(1))
            .v('m', m(2))
            .f('A', Formula::dia(p0()))
            .t('T', Term::BBoxC(m(0))),
    );
    let adj2 = rule(cfg, RuleId::AdjDiaBbInv, vec![sw2], Bindings::new().v('j', j(1)).v('m', m(0)));
    rule(
        cfg,
        RuleId::DiaP,
        vec![adj2],
        Bindings::new().v('j', j(1)).v('m', m(0)).f('A', Formula::dia(p0())),
    )
}

/// Derivation of the (B)-axiom sequent `j1 <= p0 |- j1 <= []<>p0`.
pub fn axiom_b(cfg: &CalcConfig) -> Derivation {
    let id = rule(cfg, RuleId::IdJp, vec![], Bindings::new().v('j', j(1)).f('A', p0()));
    let dias = rule(
        cfg,
        RuleId::DiaS,
        vec![id],
        Bindings::new().v('j', j(1)).v('m', m(0)).f('A', p0()),
    );
    let b = rule(cfg, RuleId::AxB, vec![dias], Bindings::new().v('j', j(1)).v('m', m(0)));
    rule(
        cfg,
        RuleId::BoxS,
        vec![b],
        Bindings::new().v('j', j(1)).v('m', m(0)).f('A', Formula::dia(p0())),
    )
}

/// Derivation of the (D)-axiom sequent `<>p0 <= m2 |- []p0 <= m2`.
pub fn axiom_d(cfg: &CalcConfig) -> Derivation {
    let id = rule(cfg, RuleId::IdPm, vec![], Bindings::new().v('m', m(0)).f('A', p0()));
    let boxp = rule(
        cfg,
        RuleId::BoxP,
        vec![id],
        Bindings::new().v('j', j(1)).v('m', m(0)).f('A', p0()),
    );
    let adj = rule(cfg, RuleId::AdjBdBox, vec![boxp], Bindings::new().v('j', j(1)).v('m', m(0)));
    let sw = rule(
        cfg,
        RuleId::STj,
        vec![adj],
        Bindings::new().v('j', j(3)).v('m', m(0)).f('A', p0()).t('T', Term::BDiaN(j(1))),
    );
    let dias = rule(
        cfg,
        RuleId::DiaS,
        vec![sw],
        Bindings::new().v('j', j(3)).v('m', m(2)).f('A', p0()),
    );
    let dd = rule(
        cfg,
        RuleId::AxD,
        vec![dias],
        Bindings::new().v('j', j(1)).v('m', m(2)).v('k', j(3)),
    );
    rule(
        cfg,
        RuleId::SM,
        vec![dd],
        Bindings::new().v('j', j(1)).v('m', m(2)).f('A', Formula::box_(p0())),
    )
}

/// Derivation of the (C)-axiom sequent `j7 <= <>[]p0 |- j7 <= []<>p0`.
pub fn axiom_c(cfg: &CalcConfig) -> Derivation {
    let id = rule(cfg, RuleId::IdPm, vec![], Bindings::new().v('m', m(0)).f('A', p0()));
    let boxp = rule(
        cfg,
        RuleId::BoxP,
        vec![id],
        Bindings::new().v('j', j(1)).v('m', m(0)).f('A', p0()),
    );
    let adj = rule(cfg, RuleId::AdjBdBox, vec![boxp], Bindings::new().v('j', j(1)).v('m', m(0)));
    let sw = rule(
        cfg,
        RuleId::STj,
        vec![adj],
        Bindings::new().v('j', j(3)).v('m', m(0)).f('A', p0()).t('T', Term::BDiaN(j(1))),
    );
    let dias = rule(
        cfg,
        RuleId::DiaS,
        vec![sw],
        Bindings::new().v('j', j(3)).v('m', m(2)).f('A', p0()),
    );
    let c = rule(
        cfg,
        RuleId::AxC,
        vec![dias],
        Bindings::new().v('j', j(1)).v('m', m(2)).v('k', j(3)).v('h', j(5)),
    );
    let adj2 = rule(cfg, RuleId::AdjBdBoxInv, vec![c], Bindings::new().v('j', j(5)).v('m', m(2)));
    let sw2 = rule(
        cfg,
        RuleId::STTm,
        vec![adj2],
        Bindings::new()
            .v('j', j(5))
            .v('m', m(4))
            .t('T', Term::BoxC(m(2)))
            .t('U', Term::DiaN(j(1))),
    );
    let diap = rule(
        cfg,
        RuleId::DiaP,
        vec![sw2],
        Bindings::new().v('j', j(1)).v('m', m(4)).f('A', Formula::box_(p0())),
    );
    let sw3 = rule(
        cfg,
        RuleId::SJT,
        vec![diap],
        Bindings::new()
            .v('j', j(7))
            .v('m', m(4))
            .f('A', Formula::dia(Formula::box_(p0())))
            .t('T', Term::BoxC(m(2))),
    );
    rule(
        cfg,
        RuleId::BoxS,
        vec![sw3],
        Bindings::new().v('j', j(7)).v('m', m(2)).f('A', Formula::dia(p0())),
    )
}

/// Distribution of the diamond over joins:
/// `<>p0|<>q0 <= m0 |- <>(p0|q0) <= m0`.
pub fn dia_over_or(cfg: &CalcConfig) -> Derivation {
    let disj = Formula::or(Formula::dia(p0()), Formula::dia(q0()));
    let branch = |atom: Formula, index: u8| {
        let id = rule(cfg, RuleId::IdJp, vec![], Bindings::new().v('j', j(1)).f('A', atom.clone()));
        let dias = rule(
            cfg,
            RuleId::DiaS,
            vec![id],
            Bindings::new().v('j', j(1)).v('m', m(0)).f('A', atom.clone()),
        );
        let ors = rule(
            cfg,
            RuleId::OrS,
            vec![dias],
            Bindings::new()
                .v('m', m(0))
                .f('A', Formula::dia(p0()))
                .f('B', Formula::dia(q0()))
                .i(index),
        );
        let adj = rule(cfg, RuleId::AdjDiaBb, vec![ors], Bindings::new().v('j', j(1)).v('m', m(0)));
        rule(
            cfg,
            RuleId::STm,
            vec![adj],
            Bindings::new().v('j', j(1)).v('m', m(2)).f('A', atom).t('T', Term::BBoxC(m(0))),
        )
    };
    let left = branch(p0(), 1);
    let right = branch(q0(), 2);
    let orp = rule(
        cfg,
        RuleId::OrP,
        vec![left, right],
        Bindings::new().v('m', m(2)).f('A', p0()).f('B', q0()),
    );
    let sw = rule(
        cfg,
        RuleId::SJT,
        vec![orp],
        Bindings::new()
            .v('j', j(1))
            .v('m', m(2))
            .f('A', Formula::or(p0(), q0()))
            .t('T', Term::BBoxC(m(0))),
    );
    let adj = rule(cfg, RuleId::AdjDiaBbInv, vec![sw], Bindings::new().v('j', j(1)).v('m', m(0)));
    let _ = disj;
    rule(
        cfg,
        RuleId::DiaP,
        vec![adj],
        Bindings::new().v('j', j(1)).v('m', m(0)).f('A', Formula::or(p0(), q0())),
    )
}

/// Bottom preservation: `F <= m0 |- <>F <= m0`.
pub fn dia_bot(cfg: &CalcConfig) -> Derivation {
    let id = rule(cfg, RuleId::IdBot, vec![], Bindings::new().v('m', m(0)));
    let sjj = rule(
        cfg,
        RuleId::SJj,
        vec![id],
        Bindings::new().v('j', j(1)).v('m', m(0)).f('A', Formula::Bot).f('B', Formula::Bot),
    );
    let botdia = rule(cfg, RuleId::BotDia, vec![sjj], Bindings::new().v('j', j(1)).v('m', m(0)));
    rule(
        cfg,
        RuleId::DiaP,
        vec![botdia],
        Bindings::new().v('j', j(1)).v('m', m(0)).f('A', Formula::Bot),
    )
}

fn box_p0() -> Formula {
    Formula::box_(p0())
}

/// The policy-one case study: a cut on `j1 <= [](p0)` whose both
/// occurrences are parametric.
pub fn pi1(cfg: &CalcConfig) -> Derivation {
    // Left branch.
    let id = rule(cfg, RuleId::IdPm, vec![], Bindings::new().v('m', m(0)).f('A', p0()));
    let boxp = rule(
        cfg,
        RuleId::BoxP,
        vec![id],
        Bindings::new().v('j', j(1)).v('m', m(0)).f('A', p0()),
    );
    let boxs = rule(
        cfg,
        RuleId::BoxS,
        vec![boxp],
        Bindings::new().v('j', j(1)).v('m', m(0)).f('A', p0()),
    );
    let smm = rule(
        cfg,
        RuleId::SMm,
        vec![boxs],
        Bindings::new().v('j', j(1)).v('m', m(0)).f('A', box_p0()).f('B', box_p0()),
    );
    let boxp2 = rule(
        cfg,
        RuleId::BoxP,
        vec![smm],
        Bindings::new().v('j', j(3)).v('m', m(0)).f('A', box_p0()),
    );
    let adj = rule(cfg, RuleId::AdjBdBox, vec![boxp2], Bindings::new().v('j', j(3)).v('m', m(0)));
    let left = rule(
        cfg,
        RuleId::STj,
        vec![adj],
        Bindings::new().v('j', j(1)).v('m', m(0)).f('A', box_p0()).t('T', Term::BDiaN(j(3))),
    );

    // Right branch.
    let id2 = rule(cfg, RuleId::IdPm, vec![], Bindings::new().v('m', m(0)).f('A', p0()));
    let boxp3 = rule(
        cfg,
        RuleId::BoxP,
        vec![id2],
        Bindings::new().v('j', j(1)).v('m', m(0)).f('A', p0()),
    );
    let adj2 = rule(cfg, RuleId::AdjBdBox, vec![boxp3], Bindings::new().v('j', j(1)).v('m', m(0)));
    let sw = rule(
        cfg,
        RuleId::STj,
        vec![adj2],
        Bindings::new().v('j', j(3)).v('m', m(0)).f('A', p0()).t('T', Term::BDiaN(j(1))),
    );
    let dias = rule(
        cfg,
        RuleId::DiaS,
        vec![sw],
        Bindings::new().v('j', j(3)).v('m', m(2)).f('A', p0()),
    );
    let adj3 = rule(cfg, RuleId::AdjDiaBb, vec![dias], Bindings::new().v('j', j(3)).v('m', m(2)));
    let sw2 = rule(
        cfg,
        RuleId::STTm,
        vec![adj3],
        Bindings::new()
            .v('j', j(3))
            .v('m', m(0))
            .t('T', Term::BBoxC(m(2)))
            .t('U', Term::BDiaN(j(1))),
    );
    let right = rule(cfg, RuleId::AdjBdBoxInv, vec![sw2], Bindings::new().v('j', j(1)).v('m', m(0)));

    rule(
        cfg,
        RuleId::CutJ,
        vec![left, right],
        Bindings::new().v('j', j(1)).f('A', box_p0()),
    )
}

/// The parametric-stage transform of [`pi1`]: the cut moved to the
/// uppermost introduction on the left, renaming-free under policy one.
pub fn pi1_prime(cfg: &CalcConfig) -> Derivation {
    let (d, renaming) = parametric_step(cfg, Policy::One, &pi1(cfg)).expect("pi1 parametric step");
    assert!(renaming.is_empty(), "policy one must be renaming-free on pi1");
    d
}

/// The policy-two case study: the same cut with increasing subscripts.
pub fn pi2(cfg: &CalcConfig) -> Derivation {
    // Left branch (switches pick fresh variables).
    let id = rule(cfg, RuleId::IdPm, vec![], Bindings::new().v('m', m(0)).f('A', p0()));
    let boxp = rule(
        cfg,
        RuleId::BoxP,
        vec![id],
        Bindings::new().v('j', j(1)).v('m', m(0)).f('A', p0()),
    );
    let boxs = rule(
        cfg,
        RuleId::BoxS,
        vec![boxp],
        Bindings::new().v('j', j(1)).v('m', m(0)).f('A', p0()),
    );
    let smm = rule(
        cfg,
        RuleId::SMm,
        vec![boxs],
        Bindings::new().v('j', j(1)).v('m', m(2)).f('A', box_p0()).f('B', box_p0()),
    );
    let boxp2 = rule(
        cfg,
        RuleId::BoxP,
        vec![smm],
        Bindings::new().v('j', j(1)).v('m', m(2)).f('A', box_p0()),
    );
    let adj = rule(cfg, RuleId::AdjBdBox, vec![boxp2], Bindings::new().v('j', j(1)).v('m', m(2)));
    let left = rule(
        cfg,
        RuleId::STj,
        vec![adj],
        Bindings::new().v('j', j(3)).v('m', m(2)).f('A', box_p0()).t('T', Term::BDiaN(j(1))),
    );

    // Right branch.
    let id2 = rule(cfg, RuleId::IdPm, vec![], Bindings::new().v('m', m(0)).f('A', p0()));
    let boxp3 = rule(
        cfg,
        RuleId::BoxP,
        vec![id2],
        Bindings::new().v('j', j(3)).v('m', m(0)).f('A', p0()),
    );
    let adj2 = rule(cfg, RuleId::AdjBdBox, vec![boxp3], Bindings::new().v('j', j(3)).v('m', m(0)));
    let sw = rule(
        cfg,
        RuleId::STj,
        vec![adj2],
        Bindings::new().v('j', j(5)).v('m', m(0)).f('A', p0()).t('T', Term::BDiaN(j(3))),
    );
    let dias = rule(
        cfg,
        RuleId::DiaS,
        vec![sw],
        Bindings::new().v('j', j(5)).v('m', m(0)).f('A', p0()),
    );
    let adj3 = rule(cfg, RuleId::AdjDiaBb, vec![dias], Bindings::new().v('j', j(5)).v('m', m(0)));
    let sw2 = rule(
        cfg,
        RuleId::STTm,
        vec![adj3],
        Bindings::new()
            .v('j', j(5))
            .v('m', m(2))
            .t('T', Term::BBoxC(m(0)))
            .t('U', Term::BDiaN(j(3))),
    );
    let right = rule(cfg, RuleId::AdjBdBoxInv, vec![sw2], Bindings::new().v('j', j(3)).v('m', m(2)));

    rule(
        cfg,
        RuleId::CutJ,
        vec![left, right],
        Bindings::new().v('j', j(3)).f('A', box_p0()),
    )
}

/// The parametric-stage transform of [`pi2`]: policy two forces a
/// renaming of the untouched branch.
pub fn pi2_prime(cfg: &CalcConfig) -> Derivation {
    let (d, _renaming) = parametric_step(cfg, Policy::Two, &pi2(cfg)).expect("pi2 parametric step");
    d
}

/// Preferred labelled form of an identity derivation for a formula,
/// decided by its outermost connective.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IdentityForm {
    /// `j <= A |- j <= A`
    J,
    /// `A <= m |- A <= m`
    M,
}

pub fn native_identity_form(a: &Formula) -> IdentityForm {
    match a {
        Formula::Atom(_) | Formula::Top | Formula::And(_, _) | Formula::Box_(_) => IdentityForm::J,
        Formula::Bot | Formula::Or(_, _) | Formula::Dia(_) => IdentityForm::M,
    }
}

/// Builds a derivation of the identity sequent for `a` in the requested
/// form, with the outer approximant `outer`.
pub fn derive_identity(
    cfg: &CalcConfig,
    a: &Formula,
    form: IdentityForm,
    outer: VarId,
    gen: &mut FreshGen,
) -> Derivation {
    let native = native_identity_form(a);
    if form != native && !matches!(a, Formula::Atom(_)) {
        // Build natively, then flip with one switch.
        let inner = match native {
            IdentityForm::J => gen.fresh(VarKind::Nominal),
            IdentityForm::M => gen.fresh(VarKind::Conominal),
        };
        let d = derive_identity(cfg, a, native, inner, gen);
        let (rid, b) = match native {
            IdentityForm::J => (
                RuleId::SMm,
                Bindings::new().v('j', inner).v('m', outer).f('A', a.clone()).f('B', a.clone()),
            ),
            IdentityForm::M => (
                RuleId::SJj,
                Bindings::new().v('j', outer).v('m', inner).f('A', a.clone()).f('B', a.clone()),
            ),
        };
        return rule(cfg, rid, vec![d], b);
    }
    match (a, form) {
        (Formula::Atom(_), IdentityForm::J) => {
            rule(cfg, RuleId::IdJp, vec![], Bindings::new().v('j', outer).f('A', a.clone()))
        }
        (Formula::Atom(_), IdentityForm::M) => {
            rule(cfg, RuleId::IdPm, vec![], Bindings::new().v('m', outer).f('A', a.clone()))
        }
        (Formula::Top, IdentityForm::J) => {
            rule(cfg, RuleId::IdTop, vec![], Bindings::new().v('j', outer))
        }
        (Formula::Bot, IdentityForm::M) => {
            rule(cfg, RuleId::IdBot, vec![], Bindings::new().v('m', outer))
        }
        (Formula::And(x, y), IdentityForm::J) => {
            let px = {
                let dx = derive_identity(cfg, x, IdentityForm::J, outer, gen);
                rule(
                    cfg,
                    RuleId::AndP,
                    vec![dx],
                    Bindings::new().v('j', outer).f('A', (**x).clone()).f('B', (**y).clone()).i(1),
                )
            };
            let py = {
                let dy = derive_identity(cfg, y, IdentityForm::J, outer, gen);
                rule(
                    cfg,
                    RuleId::AndP,
                    vec![dy],
                    Bindings::new().v('j', outer).f('A', (**x).clone()).f('B', (**y).clone()).i(2),
                )
            };
            rule(
                cfg,
                RuleId::AndS,
                vec![px, py],
                Bindings::new().v('j', outer).f('A', (**x).clone()).f('B', (**y).clone()),
            )
        }
        (Formula::Or(x, y), IdentityForm::M) => {
            let px = {
                let dx = derive_identity(cfg, x, IdentityForm::M, outer, gen);
                rule(
                    cfg,
                    RuleId::OrS,
                    vec![dx],
                    Bindings::new().v('m', outer).f('A', (**x).clone()).f('B', (**y).clone()).i(1),
                )
            };
            let py = {
                let dy = derive_identity(cfg, y, IdentityForm::M, outer, gen);
                rule(
                    cfg,
                    RuleId::OrS,
                    vec![dy],
                    Bindings::new().v('m', outer).f('A', (**x).clone()).f('B', (**y).clone()).i(2),
                )
            };
            rule(
                cfg,
                RuleId::OrP,
                vec![px, py],
                Bindings::new().v('m', outer).f('A', (**x).clone()).f('B', (**y).clone()),
            )
        }
        (Formula::Box_(x), IdentityForm::J) => {
            let im = gen.fresh(VarKind::Conominal);
            let dx = derive_identity(cfg, x, IdentityForm::M, im, gen);
            let bp = rule(
                cfg,
                RuleId::BoxP,
                vec![dx],
                Bindings::new().v('j', outer).v('m', im).f('A', (**x).clone()),
            );
            rule(
                cfg,
                RuleId::BoxS,
                vec![bp],
                Bindings::new().v('j', outer).v('m', im).f('A', (**x).clone()),
            )
        }
        (Formula::Dia(x), IdentityForm::M) => {
            let ij = gen.fresh(VarKind::Nominal);
            let dx = derive_identity(cfg, x, IdentityForm::J, ij, gen);
            let ds = rule(
                cfg,
                RuleId::DiaS,
                vec![dx],
                Bindings::new().v('j', ij).v('m', outer).f('A', (**x).clone()),
            );
            rule(
                cfg,
                RuleId::DiaP,
                vec![ds],
                Bindings::new().v('j', ij).v('m', outer).f('A', (**x).clone()),
            )
        }
        _ => unreachable!("atoms handle both forms; other shapes recurse through their native form"),
    }
}

/// A named corpus entry with the extension axioms it needs.
pub struct CorpusEntry {
    pub name: &'static str,
    pub sigma: Vec<Axiom>,
    pub derivation: Derivation,
}

/// Every derivation shipped in the corpus directory.
pub fn all() -> Vec<CorpusEntry> {
    let base = CalcConfig::default();
    let with = |ax: Axiom| CalcConfig::with_sigma(&[ax]);
    vec![
        CorpusEntry { name: "dia_over_or", sigma: vec![], derivation: dia_over_or(&base) },
        CorpusEntry { name: "dia_bot", sigma: vec![], derivation: dia_bot(&base) },
        CorpusEntry { name: "axiom_4", sigma: vec![Axiom::Four], derivation: axiom_4(&with(Axiom::Four)) },
        CorpusEntry { name: "axiom_t", sigma: vec![Axiom::T], derivation: axiom_t(&with(Axiom::T)) },
        CorpusEntry { name: "axiom_b", sigma: vec![Axiom::B], derivation: axiom_b(&with(Axiom::B)) },
        CorpusEntry { name: "axiom_d", sigma: vec![Axiom::D], derivation: axiom_d(&with(Axiom::D)) },
        CorpusEntry { name: "axiom_c", sigma: vec![Axiom::C], derivation: axiom_c(&with(Axiom::C)) },
        CorpusEntry { name: "pi1", sigma: vec![], derivation: pi1(&base) },
        CorpusEntry { name: "pi1_prime", sigma: vec![], derivation: pi1_prime(&base) },
        CorpusEntry { name: "pi2", sigma: vec![], derivation: pi2(&base) },
        CorpusEntry { name: "pi2_prime", sigma: vec![], derivation: pi2_prime(&base) },
    ]
}

/// Characteristic sequents of the basic axioms, used by the search
/// acceptance test: (name, sigma, sequent text).
pub fn characteristic_sequents() -> Vec<(&'static str, Vec<Axiom>, &'static str)> {
    vec![
        ("refl", vec![], "j1 <= p0 |- j1 <= p0"),
        ("bot", vec![], "j1 <= F |- j1 <= p0"),
        ("top", vec![], "j1 <= p0 |- j1 <= T"),
        ("or_inj", vec![], "p0|q0 <= m0 |- p0 <= m0"),
        ("and_proj", vec![], "j1 <= p0&q0 |- j1 <= p0"),
        ("box_top", vec![], "j1 <= T |- j1 <= []T"),
        ("dia_bot", vec![], "F <= m0 |- <>F <= m0"),
        ("box_and", vec![], "j1 <= []p0&[]q0 |- j1 <= [](p0&q0)"),
        ("dia_or", vec![], "<>p0|<>q0 <= m0 |- <>(p0|q0) <= m0"),
        ("ax_t", vec![Axiom::T], "j1 <= []p0 |- j1 <= p0"),
        ("ax_4", vec![Axiom::Four], "<>p0 <= m0 |- <><>p0 <= m0"),
        ("ax_b", vec![Axiom::B], "j1 <= p0 |- j1 <= []<>p0"),
        ("ax_d", vec![Axiom::D], "<>p0 <= m0 |- []p0 <= m0"),
        ("ax_c", vec![Axiom::C], "j1 <= <>[]p0 |- j1 <= []<>p0"),
    ]
}

/// Alpha-renaming helper for composing corpus lemmas: shifts every
/// variable of `d` above the given set.
pub fn shift_above(d: &Derivation, avoid: &[VarId]) -> Derivation {
    let mut gen = FreshGen::above(avoid);
    let map: BTreeMap<VarId, VarId> = d
        .all_vars()
        .into_iter()
        .map(|v| (v, gen.fresh(v.kind)))
        .collect();
    d.rename(&map).expect("total renaming")
}

/// Locates a labelled structure value in a sequent side.
pub fn find_labelled(d: &Derivation, want: &Structure) -> Option<crate::syntax::Loc> {
    d.end().locs().into_iter().find(|&l| d.end().get(l) == Some(want))
}

/// Composes `d` with a freshly built identity derivation by cutting on
/// the labelled formula at `loc` in `d`'s end-sequent. `None` when the
/// occurrence's labelled form does not match its classification (no cut
/// rule applies there).
pub fn compose_with_identity(
    cfg: &CalcConfig,
    d: &Derivation,
    loc: crate::syntax::Loc,
) -> Option<Derivation> {
    use crate::proof::{classify_label, LabelClass};
    let s = d.end().get(loc)?.clone();
    if !s.is_labelled() {
        return None;
    }
    let f = s.formula()?.clone();
    let form = match &s {
        Structure::LabJ(_, _) => IdentityForm::J,
        Structure::LabM(_, _) => IdentityForm::M,
        _ => return None,
    };
    if native_identity_form(&f) != form {
        return None;
    }
    let class = classify_label(d, (0, loc));
    let legal = matches!(
        (form, class),
        (IdentityForm::J, LabelClass::JLabelled) | (IdentityForm::M, LabelClass::MLabelled)
    );
    if !legal {
        return None;
    }
    let outer = s.approximant();
    let avoid: Vec<VarId> = d.all_vars().into_iter().collect();
    let mut gen = FreshGen::above(&avoid);
    let ident = derive_identity(cfg, &f, form, outer, &mut gen);
    let (rid, b) = match &s {
        Structure::LabJ(jv, ff) => (RuleId::CutJ, Bindings::new().v('j', *jv).f('A', ff.clone())),
        Structure::LabM(ff, mv) => (RuleId::CutM, Bindings::new().v('m', *mv).f('A', ff.clone())),
        _ => unreachable!(),
    };
    let children = match loc.side {
        crate::syntax::Side::Ant => vec![ident, d.clone()],
        crate::syntax::Side::Con => vec![d.clone(), ident],
    };
    by_rule(cfg, rid, children, b).ok()
}

/// Builds a deterministic family of proofs with cuts by composing corpus
/// lemmas and identity derivations, for the cut-elimination sweep.
pub fn cut_compositions(count: usize, seed: u64) -> Vec<(String, CalcConfig, Derivation)> {
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();

    // All legal lemma/occurrence compositions.
    let mut pool: Vec<(String, CalcConfig, Derivation)> = Vec::new();
    for entry in all() {
        let cfg = CalcConfig::with_sigma(&entry.sigma);
        for loc in entry.derivation.end().locs() {
            if let Some(c) = compose_with_identity(&cfg, &entry.derivation, loc) {
                pool.push((format!("{}@{}", entry.name, loc), cfg.clone(), c));
            }
        }
    }
    // Identity self-cuts over a formula pool.
    let formulas = [
        "p0", "q0", "[]p0", "<>p0", "p0&q0", "p0|q0", "[](p0&q0)", "<>(p0|q0)",
        "[]<>p0", "<>[]p0", "[][]p0", "<><>p0", "[]p0&[]q0", "<>p0|<>q0", "[]T", "<>F",
        "T", "F", "p0&(q0&p1)", "p0|(q0|p1)",
    ];
    let cfg = CalcConfig::default();
    for f in formulas {
        let a = crate::syntax::parse_formula(f).unwrap();
        let form = native_identity_form(&a);
        let mut gen = FreshGen::new();
        let outer = match form {
            IdentityForm::J => gen.fresh(VarKind::Nominal),
            IdentityForm::M => gen.fresh(VarKind::Conominal),
        };
        let d = derive_identity(&cfg, &a, form, outer, &mut gen);
        let loc = d
            .end()
            .locs()
            .into_iter()
            .find(|&l| l.side == crate::syntax::Side::Con)
            .unwrap();
        if let Some(c) = compose_with_identity(&cfg, &d, loc) {
            pool.push((format!("id({})", f), cfg.clone(), c));
        }
    }

    // Sample (possibly stacking a second cut on top).
    while out.len() < count && !pool.is_empty() {
        let (name, cfg, d) = pool[rng.gen_range(0..pool.len())].clone();
        if rng.gen_bool(0.3) {
            // Stack one more identity cut on a random legal occurrence.
            let locs = d.end().locs();
            let loc = locs[rng.gen_range(0..locs.len())];
            if let Some(d2) = compose_with_identity(&cfg, &d, loc) {
                out.push((format!("{}+{}", name, loc), cfg, d2));
                continue;
            }
        }
        out.push((name, cfg, d));
    }
    out
}
