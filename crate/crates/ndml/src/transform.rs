//! Proof transformations: displaying structures, twin restoration,
//! canonical form and cyclic rotation, approximant preservation, and cut
//! elimination.

use std::collections::BTreeMap;

use crate::calculus::{
    apply, var_in_display, Bindings, CalcConfig, Mode, RuleId, RuleInstance,
};
use crate::error::TransformError;
use crate::proof::{by_rule, Derivation};
use crate::syntax::{
    smallest_compatible, Formula, FreshGen, Loc, Position, Sequent, Side, Structure, Term, VarId,
    VarKind,
};

/// Fresh-variable policy for transformations. Policy one reuses the
/// smallest compatible subscript at switch steps; policy two always picks
/// strictly fresh ones there.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Policy {
    #[default]
    One,
    Two,
}

fn pick_switch_var(policy: Policy, kind: VarKind, seq_vars: &[VarId], all_vars: &[VarId]) -> VarId {
    match policy {
        Policy::One => smallest_compatible(kind, seq_vars),
        Policy::Two => FreshGen::above(all_vars).fresh(kind),
    }
}

/// The two occurrences of a variable in a sequent, when it occurs exactly
/// twice. Each is (locator, is-approximant).
fn var_occurrences(seq: &Sequent, v: VarId) -> Vec<(Loc, bool)> {
    let mut out = Vec::new();
    for loc in seq.locs() {
        for (w, approx) in seq.get(loc).unwrap().term_vars() {
            if w == v {
                out.push((loc, approx));
            }
        }
    }
    out
}

/// The unique switch step consuming `v` in `seq`. `v` must occur once on
/// each side of the turnstile: as an approximant, or inside the bare pure
/// structure `j <= m` (the `S_m`/`S_j` readings). Returns the rule and
/// its bindings.
fn switch_consuming(
    policy: Policy,
    seq: &Sequent,
    v: VarId,
    all_vars: &[VarId],
) -> Result<(RuleId, Bindings), TransformError> {
    let occs = var_occurrences(seq, v);
    if occs.len() != 2 {
        return Err(TransformError::Other(format!(
            "{} occurs {} time(s) in `{}`, cannot switch",
            v,
            occs.len(),
            seq
        )));
    }
    let (ant_occ, con_occ) = match (occs[0].0.side, occs[1].0.side) {
        (Side::Ant, Side::Con) => (occs[0].0, occs[1].0),
        (Side::Con, Side::Ant) => (occs[1].0, occs[0].0),
        _ => {
            return Err(TransformError::Other(format!(
                "both occurrences of {} are on the same side of `{}`",
                v, seq
            )))
        }
    };
    let sa = seq.get(ant_occ).unwrap().clone();
    let sc = seq.get(con_occ).unwrap().clone();
    let mut seq_vars = seq.term_vars();
    seq_vars.retain(|w| *w != v);
    use Structure::*;
    let entry = match (v.kind, &sa, &sc) {
        // Consuming a nominal introduces a conominal (clockwise family).
        (VarKind::Nominal, LabJ(_, a), LabJ(_, b)) => {
            let m = pick_switch_var(policy, VarKind::Conominal, &seq_vars, all_vars);
            (RuleId::SMm, Bindings::new().v('j', v).v('m', m).f('A', a.clone()).f('B', b.clone()))
        }
        (VarKind::Nominal, PureJ(_, t), LabJ(_, a)) => {
            let m = pick_switch_var(policy, VarKind::Conominal, &seq_vars, all_vars);
            (RuleId::SMT, Bindings::new().v('j', v).v('m', m).f('A', a.clone()).t('T', *t))
        }
        (VarKind::Nominal, LabJ(_, a), PureJ(_, Term::CoNom(m))) => {
            // The partner is the bare `j <= m`: S_m reuses m.
            (RuleId::SM, Bindings::new().v('j', v).v('m', *m).f('A', a.clone()))
        }
        (VarKind::Nominal, LabJ(_, a), PureJ(_, t)) => {
            let m = pick_switch_var(policy, VarKind::Conominal, &seq_vars, all_vars);
            (RuleId::STm, Bindings::new().v('j', v).v('m', m).f('A', a.clone()).t('T', *t))
        }
        (VarKind::Nominal, PureJ(_, u), PureJ(_, t)) => {
            let m = pick_switch_var(policy, VarKind::Conominal, &seq_vars, all_vars);
            (RuleId::STTm, Bindings::new().v('j', v).v('m', m).t('T', *t).t('U', *u))
        }
        // Consuming a conominal introduces a nominal (anticlockwise).
        (VarKind::Conominal, LabM(a, _), LabM(b, _)) => {
            let j = pick_switch_var(policy, VarKind::Nominal, &seq_vars, all_vars);
            (RuleId::SJj, Bindings::new().v('j', j).v('m', v).f('A', a.clone()).f('B', b.clone()))
        }
        (VarKind::Conominal, PureM(t, _), LabM(a, _)) => {
            let j = pick_switch_var(policy, VarKind::Nominal, &seq_vars, all_vars);
            (RuleId::SJT, Bindings::new().v('j', j).v('m', v).f('A', a.clone()).t('T', *t))
        }
        // The consequent occurrence is buried in the bare `j <= m`.
        (VarKind::Conominal, LabM(a, _), PureJ(j, Term::CoNom(_))) => {
            (RuleId::SJ, Bindings::new().v('j', *j).v('m', v).f('A', a.clone()))
        }
        (VarKind::Conominal, PureM(u, _), PureJ(j, Term::CoNom(_))) => {
            // Read `j <= m` as the term j below m and flip both.
            let nj = pick_switch_var(policy, VarKind::Nominal, &seq_vars, all_vars);
            (RuleId::SJTT, Bindings::new().v('j', nj).v('m', v).t('T', Term::Nom(*j)).t('U', *u))
        }
        (VarKind::Conominal, LabM(a, _), PureM(t, _)) => {
            let j = pick_switch_var(policy, VarKind::Nominal, &seq_vars, all_vars);
            (RuleId::STj, Bindings::new().v('j', j).v('m', v).f('A', a.clone()).t('T', *t))
        }
        (VarKind::Conominal, PureM(u, _), PureM(t, _)) => {
            let j = pick_switch_var(policy, VarKind::Nominal, &seq_vars, all_vars);
            (RuleId::SJTT, Bindings::new().v('j', j).v('m', v).t('T', *t).t('U', *u))
        }
        _ => {
            return Err(TransformError::Other(format!(
                "no switch consumes {} pairing `{}` with `{}`",
                v, sa, sc
            )))
        }
    };
    Ok(entry)
}

/// A recorded transformation step: the applied instance and, when the
/// step is invertible, the rule that undoes it.
#[derive(Debug, Clone)]
pub struct TraceStep {
    pub inst: RuleInstance,
    pub inverse: Option<RuleId>,
}

fn inverse_of(rule: RuleId) -> Option<RuleId> {
    use RuleId::*;
    Some(match rule {
        AdjDiaBb => AdjDiaBbInv,
        AdjDiaBbInv => AdjDiaBb,
        AdjBdBox => AdjBdBoxInv,
        AdjBdBoxInv => AdjBdBox,
        SMm => SJj,
        SJj => SMm,
        SMT => STj,
        STj => SMT,
        STm => SJT,
        SJT => STm,
        STTm => SJTT,
        SJTT => STTm,
        _ => return None,
    })
}

/// A display trace: switch/adjunction steps leading to a sequent where
/// the target's variable is in display.
#[derive(Debug, Clone)]
pub struct DisplayTrace {
    pub steps: Vec<TraceStep>,
    pub result: Sequent,
    pub target: Loc,
}

/// A twin-restoration witness: steps to an interderivable sequent where
/// the target pure structure's approximant has its twin (a unique
/// approximant occurrence on the opposite side).
#[derive(Debug, Clone)]
pub struct TwinWitness {
    pub steps: Vec<TraceStep>,
    pub result: Sequent,
}

fn adjunct_step(
    cfg: &CalcConfig,
    seq: &Sequent,
    loc: Loc,
) -> Result<Option<RuleInstance>, TransformError> {
    let Some(s) = seq.get(loc) else { return Ok(None) };
    if loc.side != Side::Con {
        return Ok(None);
    }
    let (rule, j, m) = match s {
        Structure::PureM(Term::DiaN(j), m) => (RuleId::AdjDiaBb, *j, *m),
        Structure::PureJ(j, Term::BBoxC(m)) => (RuleId::AdjDiaBbInv, *j, *m),
        Structure::PureJ(j, Term::BoxC(m)) => (RuleId::AdjBdBox, *j, *m),
        Structure::PureM(Term::BDiaN(j), m) => (RuleId::AdjBdBoxInv, *j, *m),
        _ => return Ok(None),
    };
    let b = Bindings::new().v('j', j).v('m', m);
    Ok(Some(apply(cfg, rule, &[seq.clone()], &b)?))
}

fn find_in_term_occ(seq: &Sequent, v: VarId) -> Option<Loc> {
    seq.locs().into_iter().find(|&l| {
        seq.get(l).unwrap().term_vars().iter().any(|&(w, approx)| w == v && !approx)
    })
}

fn find_structure(seq: &Sequent, s: &Structure) -> Option<Loc> {
    seq.locs().into_iter().find(|&l| seq.get(l) == Some(s))
}

/// Restores the twin of the approximant of the pure structure at
/// `target` in `d`'s end-sequent: when its second occurrence is buried
/// under a modality on the consequent side, one adjunction surfaces it.
pub fn twin_restore(
    cfg: &CalcConfig,
    d: &Derivation,
    target: Loc,
) -> Result<TwinWitness, TransformError> {
    let seq = d.end();
    let Some(s) = seq.get(target) else {
        return Err(TransformError::Other(format!("locator {} out of range", target)));
    };
    let v = s.approximant();
    let occs = var_occurrences(seq, v);
    let other: Vec<(Loc, bool)> = occs.into_iter().filter(|(l, _)| *l != target).collect();
    match other.as_slice() {
        [(_, true)] => Ok(TwinWitness { steps: vec![], result: seq.clone() }),
        [(l, false)] => {
            // Buried occurrence: it lives in a consequent-side pure
            // structure, where a single adjunction restores the twin.
            match adjunct_step(cfg, seq, *l)? {
                Some(inst) => {
                    let result = inst.conclusion.clone();
                    let inverse = inverse_of(inst.rule);
                    Ok(TwinWitness { steps: vec![TraceStep { inst, inverse }], result })
                }
                None => Err(TransformError::Other(format!(
                    "second occurrence of {} in `{}` cannot be surfaced by adjunction",
                    v, seq
                ))),
            }
        }
        _ => Err(TransformError::Other(format!(
            "{} does not occur exactly twice in `{}`",
            v, seq
        ))),
    }
}

/// The variable a display trace exhibits: the buried term variable of a
/// modal pure structure, otherwise the approximant.
pub fn display_variable(s: &Structure) -> VarId {
    match s.term() {
        Some(t) if !t.is_bare() => t.var(),
        _ => s.approximant(),
    }
}

/// Displays the structure at `target` in `d`'s end-sequent: a trace of
/// switch and adjunction steps after which the target's variable is in
/// display. Bounded by 2n+4 steps.
pub fn display(
    cfg: &CalcConfig,
    d: &Derivation,
    target: Loc,
) -> Result<DisplayTrace, TransformError> {
    let seq = d.end().clone();
    let Some(s) = seq.get(target) else {
        return Err(TransformError::Other(format!("locator {} out of range", target)));
    };
    let v = display_variable(s);
    let bound = 2 * seq.len() + 4;
    let mut cur = seq.clone();
    let mut cur_target = seq.get(target).unwrap().clone();
    let mut steps: Vec<TraceStep> = Vec::new();
    let all_vars: Vec<VarId> = d.all_vars().into_iter().collect();

    while !var_in_display(&cur, v) {
        if steps.len() > bound {
            return Err(TransformError::Unreachable { target: s.to_string(), bound });
        }
        // v has a buried occurrence; find it.
        let l = find_in_term_occ(&cur, v).expect("not in display means a buried occurrence");
        if l.side == Side::Con {
            // One adjunction surfaces it.
            let inst = adjunct_step(cfg, &cur, l)?.ok_or_else(|| {
                TransformError::Other(format!("cannot adjunct `{}`", cur.get(l).unwrap()))
            })?;
            cur = inst.conclusion.clone();
            let inverse = inverse_of(inst.rule);
            steps.push(TraceStep { inst, inverse });
        } else {
            // Antecedent-side: switch the carrying structure to the
            // consequent by consuming its approximant, whose twin exists
            // (after at most one adjunction).
            let w = cur.get(l).unwrap().approximant();
            // Restore w's twin if buried.
            let occs = var_occurrences(&cur, w);
            if let Some((lb, _)) = occs.iter().find(|(lo, approx)| !approx && *lo != l) {
                if let Some(inst) = adjunct_step(cfg, &cur, *lb)? {
                    cur = inst.conclusion.clone();
                    let inverse = inverse_of(inst.rule);
                    steps.push(TraceStep { inst, inverse });
                }
            }
            let (rule, b) = switch_consuming(Policy::One, &cur, w, &all_vars)?;
            let inst = apply(cfg, rule, &[cur.clone()], &b)?;
            cur = inst.conclusion.clone();
            let inverse = inverse_of(inst.rule);
            steps.push(TraceStep { inst, inverse });
        }
        // Track the target's image (by content; the target structure is
        // never consumed because v stays in the sequent).
        if find_structure(&cur, &cur_target).is_none() {
            // The target itself was flipped by the switch; its image is
            // the structure still approximated by or containing v.
            if let Some(nl) = cur.locs().into_iter().find(|&nl| {
                cur.get(nl).unwrap().term_vars().iter().any(|&(w2, _)| w2 == v)
            }) {
                cur_target = cur.get(nl).unwrap().clone();
            }
        }
    }
    let final_loc = find_structure(&cur, &cur_target)
        .or_else(|| {
            cur.locs()
                .into_iter()
                .find(|&nl| cur.get(nl).unwrap().term_vars().iter().any(|&(w2, _)| w2 == v))
        })
        .ok_or_else(|| TransformError::Other("lost track of the display target".into()))?;
    Ok(DisplayTrace { steps, result: cur, target: final_loc })
}

// ---------------------------------------------------------------------------
// Canonical form and rotation
// ---------------------------------------------------------------------------

fn components(s: &Structure) -> (String, String, Vec<String>, Vec<String>) {
    // Left and right component, plus their sub-term/subformula sets as
    // printable keys.
    fn formula_subs(f: &Formula) -> Vec<String> {
        f.subformulas().iter().map(|x| x.to_string()).collect()
    }
    fn term_subs(t: &Term) -> Vec<String> {
        let mut out = vec![t.to_string()];
        if !t.is_bare() {
            out.push(t.var().to_string());
        }
        out
    }
    match s {
        Structure::LabJ(j, a) => (j.to_string(), a.to_string(), vec![j.to_string()], formula_subs(a)),
        Structure::LabM(a, m) => (a.to_string(), m.to_string(), formula_subs(a), vec![m.to_string()]),
        Structure::PureJ(j, t) => (j.to_string(), t.to_string(), vec![j.to_string()], term_subs(t)),
        Structure::PureM(t, m) => (t.to_string(), m.to_string(), term_subs(t), vec![m.to_string()]),
    }
}

fn share(a: &[String], b: &[String]) -> bool {
    a.iter().any(|x| b.contains(x))
}

fn connection_bridge(s: &Structure, side: Side) -> bool {
    // A precedent-position structure containing F, or a succedent-position
    // one containing T, bridges any adjacency.
    let pos = crate::syntax::position_of_structure(s, side);
    let has = |f: &Formula, want: &Formula| f.subformulas().iter().any(|x| *x == want);
    match s.formula() {
        Some(f) => match pos {
            Position::Precedent => has(f, &Formula::Bot),
            Position::Succedent => has(f, &Formula::Top),
        },
        None => false,
    }
}

/// Are two structures in connection when placed adjacently: consecutive
/// antecedent structures link last-component-to-first-component; the
/// final antecedent structure links to the consequent's right component;
/// the consequent's left component wraps to the first antecedent.
fn in_connection(prev: &Structure, next: &Structure, kind: AdjKind) -> bool {
    let (_pl, _pr, pl_subs, pr_subs) = components(prev);
    let (_nl, _nr, nl_subs, nr_subs) = components(next);
    let linked = match kind {
        AdjKind::AntAnt => share(&pr_subs, &nl_subs),
        // Last antecedent vs consequent written as y >= x: its first
        // component is the original right side.
        AdjKind::AntCon => share(&pr_subs, &nr_subs),
        // Wrap: the consequent's original left side meets the first
        // antecedent's left component.
        AdjKind::ConAnt => share(&nl_subs, &pl_subs),
    };
    linked
        || connection_bridge(prev, if kind == AdjKind::ConAnt { Side::Con } else { Side::Ant })
        || connection_bridge(next, if kind == AdjKind::AntCon { Side::Con } else { Side::Ant })
}

#[derive(Clone, Copy, PartialEq)]
enum AdjKind {
    AntAnt,
    AntCon,
    ConAnt,
}

/// The canonical-form predicate: a single-conclusion sequent whose
/// adjacent structures (cyclically, through the consequent) are in
/// composition.
pub fn is_canonical(s: &Sequent) -> bool {
    if s.con.len() != 1 {
        return false;
    }
    let con = &s.con[0];
    if s.ant.is_empty() {
        return true;
    }
    for w in s.ant.windows(2) {
        if !in_connection(&w[0], &w[1], AdjKind::AntAnt) {
            return false;
        }
    }
    in_connection(s.ant.last().unwrap(), con, AdjKind::AntCon)
        && in_connection(con, &s.ant[0], AdjKind::ConAnt)
}

/// Reorders the structures of `s` into canonical cyclic form. The
/// multiset of structures is preserved. Ties break toward the smallest
/// variable index.
pub fn canonical_form(s: &Sequent) -> Result<Sequent, TransformError> {
    s.exact_two().map_err(TransformError::NotCyclic)?;
    if s.con.len() != 1 {
        return Err(TransformError::NotCyclic(format!(
            "expected a single-conclusion sequent, got {} consequent structures",
            s.con.len()
        )));
    }
    let con = s.con[0].clone();
    let n = s.ant.len();
    if n == 0 {
        return Ok(s.clone());
    }
    // Backtracking over orderings, trying smaller keys first.
    let mut order: Vec<usize> = Vec::new();
    let mut used = vec![false; n];
    let key = |s: &Structure| s.to_string();
    let mut candidates: Vec<usize> = (0..n).collect();
    candidates.sort_by_key(|&i| key(&s.ant[i]));

    fn search(
        s: &Sequent,
        con: &Structure,
        candidates: &[usize],
        used: &mut Vec<bool>,
        order: &mut Vec<usize>,
    ) -> bool {
        let n = used.len();
        if order.len() == n {
            let last = &s.ant[*order.last().unwrap()];
            let first = &s.ant[order[0]];
            return in_connection(last, con, AdjKind::AntCon)
                && in_connection(con, first, AdjKind::ConAnt);
        }
        for &i in candidates {
            if used[i] {
                continue;
            }
            let ok = match order.last() {
                None => in_connection(con, &s.ant[i], AdjKind::ConAnt),
                Some(&p) => in_connection(&s.ant[p], &s.ant[i], AdjKind::AntAnt),
            };
            if !ok {
                continue;
            }
            used[i] = true;
            order.push(i);
            if search(s, con, candidates, used, order) {
                return true;
            }
            order.pop();
            used[i] = false;
        }
        false
    }

    if !search(s, &con, &candidates, &mut used, &mut order) {
        return Err(TransformError::NotCyclic(format!(
            "no cyclic ordering of `{}` links adjacent structures",
            s
        )));
    }
    let ant = order.into_iter().map(|i| s.ant[i].clone()).collect();
    Ok(Sequent::new(ant, vec![con]))
}

/// Direction of a cyclic rotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Clockwise,
    AntiClockwise,
}

/// One rotation step on a canonical sequent: clockwise consumes the
/// wrap-around variable shared by the first antecedent structure and the
/// consequent; anticlockwise consumes the one shared by the last
/// antecedent structure and the consequent. An adjunction is interposed
/// when the shared variable is buried under a modality.
pub fn rotate_step(
    cfg: &CalcConfig,
    policy: Policy,
    seq: &Sequent,
    dir: Direction,
) -> Result<(Vec<TraceStep>, Sequent), TransformError> {
    let kind = match dir {
        Direction::Clockwise => VarKind::Nominal,
        Direction::AntiClockwise => VarKind::Conominal,
    };
    let edge = match dir {
        Direction::Clockwise => seq.ant.first(),
        Direction::AntiClockwise => seq.ant.last(),
    };
    let Some(edge) = edge else {
        return Err(TransformError::Other("empty antecedent".into()));
    };
    let v = edge.approximant();
    if v.kind != kind {
        return Err(TransformError::Other(format!(
            "the {} edge of `{}` is approximated by {}, not a {:?}",
            match dir {
                Direction::Clockwise => "clockwise",
                Direction::AntiClockwise => "anticlockwise",
            },
            seq,
            v,
            kind
        )));
    }
    let mut steps = Vec::new();
    let mut cur = seq.clone();
    // Surface a buried second occurrence first.
    if let Some(l) = find_in_term_occ(&cur, v) {
        match adjunct_step(cfg, &cur, l)? {
            Some(inst) => {
                cur = inst.conclusion.clone();
                let inverse = inverse_of(inst.rule);
                steps.push(TraceStep { inst, inverse });
            }
            None => {
                return Err(TransformError::Other(format!(
                    "rotation blocked: {} buried on the antecedent side of `{}`",
                    v, cur
                )))
            }
        }
    }
    let all_vars = cur.term_vars();
    let (rule, b) = switch_consuming(policy, &cur, v, &all_vars)?;
    let inst = apply(cfg, rule, &[cur], &b)?;
    let result = inst.conclusion.clone();
    let inverse = inverse_of(inst.rule);
    steps.push(TraceStep { inst, inverse });
    Ok((steps, result))
}

/// Rotates a canonical sequent until `target` (a structure value expected
/// in the antecedent) sits first (clockwise) or last (anticlockwise).
/// Returns the recorded steps and the final sequent; the target stays
/// congruent through the fragment.
pub fn rotate(
    cfg: &CalcConfig,
    policy: Policy,
    seq: &Sequent,
    target: &Structure,
    dir: Direction,
) -> Result<(Vec<TraceStep>, Sequent), TransformError> {
    let mut cur = seq.clone();
    let mut steps = Vec::new();
    let at_place = |s: &Sequent| match dir {
        Direction::Clockwise => s.ant.first() == Some(target),
        Direction::AntiClockwise => s.ant.last() == Some(target),
    };
    if !seq.ant.contains(target) {
        return Err(TransformError::Other(format!("`{}` is not in the antecedent of `{}`", target, seq)));
    }
    let mut fuel = 2 * seq.len() + 4;
    while !at_place(&cur) {
        if fuel == 0 {
            return Err(TransformError::Other(format!(
                "rotation of `{}` toward `{}` did not converge",
                seq, target
            )));
        }
        fuel -= 1;
        let (mut st, next) = rotate_step(cfg, policy, &cur, dir)?;
        steps.append(&mut st);
        cur = next;
        if !cur.ant.contains(target) {
            return Err(TransformError::Other(format!(
                "rotation consumed the target `{}` (sequent `{}`)",
                target, cur
            )));
        }
    }
    Ok((steps, cur))
}

// ---------------------------------------------------------------------------
// Approximant preservation
// ---------------------------------------------------------------------------

/// Renames `d` so that the approximant of `displayed` coincides with the
/// approximant of `principal`. The two occurrences must be congruent and
/// connected through an even number of switch steps (each switch flips
/// between a nominal and a conominal approximant). The result is
/// alpha-equivalent to `d`.
pub fn preserve_approximant(
    _cfg: &CalcConfig,
    d: &Derivation,
    principal: crate::proof::Occ,
    displayed: crate::proof::Occ,
) -> Result<(Derivation, BTreeMap<VarId, VarId>), TransformError> {
    let forest = crate::proof::congruence(d);
    if !forest.congruent(principal, displayed) {
        return Err(TransformError::Other("occurrences are not congruent".into()));
    }
    let nodes = d.flatten();
    let get = |(n, l): crate::proof::Occ| nodes[n].end().get(l).cloned();
    let (Some(sp), Some(sd)) = (get(principal), get(displayed)) else {
        return Err(TransformError::Other("occurrence out of range".into()));
    };
    if sp.formula() != sd.formula() {
        return Err(TransformError::Other("occurrences carry different formulas".into()));
    }
    let (i, j) = (sd.approximant(), sp.approximant());
    if switch_distance(d, &forest, principal, displayed)? % 2 != 0 {
        return Err(TransformError::Other(
            "occurrences are separated by an odd number of switch steps".into(),
        ));
    }
    if i == j {
        return Ok((d.clone(), BTreeMap::new()));
    }
    let mut map = BTreeMap::new();
    map.insert(i, j);
    if d.all_vars().contains(&j) {
        map.insert(j, i);
    }
    let renamed = d.rename(&map).map_err(|e| TransformError::Other(e.to_string()))?;
    Ok((renamed, map))
}

/// Number of switch edges on the congruence path between two occurrences.
fn switch_distance(
    d: &Derivation,
    forest: &crate::proof::CongruenceForest,
    from: crate::proof::Occ,
    to: crate::proof::Occ,
) -> Result<usize, TransformError> {
    use std::collections::VecDeque;
    let nodes = d.flatten();
    let children = d.child_ids();
    // Build the undirected edge list with a switch flag.
    let mut edges: BTreeMap<crate::proof::Occ, Vec<(crate::proof::Occ, bool)>> = BTreeMap::new();
    for (n, node) in nodes.iter().enumerate() {
        for (cl, parents) in &node.inst.param_map {
            for (pi, pl) in parents {
                let a = (n, *cl);
                let b = (children[n][*pi], *pl);
                edges.entry(a).or_default().push((b, false));
                edges.entry(b).or_default().push((a, false));
            }
        }
        for (cl, (pi, pl)) in &node.inst.switch_map {
            let a = (n, *cl);
            let b = (children[n][*pi], *pl);
            let is_switch = node.inst.rule.is_switch();
            edges.entry(a).or_default().push((b, is_switch));
            edges.entry(b).or_default().push((a, is_switch));
        }
    }
    let mut dist: BTreeMap<crate::proof::Occ, usize> = BTreeMap::new();
    let mut q = VecDeque::new();
    dist.insert(from, 0);
    q.push_back(from);
    while let Some(o) = q.pop_front() {
        if o == to {
            return Ok(dist[&o]);
        }
        let d0 = dist[&o];
        for (next, is_switch) in edges.get(&o).cloned().unwrap_or_default() {
            let nd = d0 + usize::from(is_switch);
            if dist.get(&next).map_or(true, |&old| nd < old) {
                dist.insert(next, nd);
                q.push_back(next);
            }
        }
    }
    if !forest.congruent(from, to) {
        return Err(TransformError::Other("occurrences are not connected".into()));
    }
    Err(TransformError::Other("occurrences are not connected".into()))
}

// ---------------------------------------------------------------------------
// Cut elimination
// ---------------------------------------------------------------------------

fn introduced_at_root(d: &Derivation, loc: Loc) -> bool {
    d.inst.parents_of(loc).is_empty()
}

/// Realigns `d`'s root conclusion to `target` (a permutation of it).
pub fn reorder_conclusion(
    cfg: &CalcConfig,
    d: &Derivation,
    target: &Sequent,
) -> Result<Derivation, TransformError> {
    if d.end() == target {
        return Ok(d.clone());
    }
    if !d.end().multiset_eq(target) {
        return Err(TransformError::Other(format!(
            "`{}` is not a reordering of `{}`",
            target,
            d.end()
        )));
    }
    let premises: Vec<Sequent> = d.children.iter().map(|c| c.end().clone()).collect();
    let inst = crate::calculus::check_instance_aligned(
        cfg,
        d.inst.rule,
        &premises,
        target,
        &d.inst.bindings,
        None,
    )
    .map_err(|vs| TransformError::Other(vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")))?;
    Ok(Derivation { inst, children: d.children.clone() })
}

/// Makes `d` end exactly in `target`: first by reordering, then by an
/// alpha-renaming of variables private to the derivation.
fn make_end_equal(
    cfg: &CalcConfig,
    d: &Derivation,
    target: &Sequent,
) -> Result<Derivation, TransformError> {
    if d.end() == target {
        return Ok(d.clone());
    }
    if d.end().multiset_eq(target) {
        return reorder_conclusion(cfg, d, target);
    }
    // Alpha fallback: match structures up to a variable bijection.
    let map = alpha_match(d.end(), target).ok_or_else(|| {
        TransformError::Other(format!("`{}` is not alpha-equal to `{}`", d.end(), target))
    })?;
    let renamed = rename_derivation_total(d, &map)?;
    reorder_conclusion(cfg, &renamed, target)
}

/// Renames `d` by `map`, routing through temporaries when targets collide
/// with variables of the tree. Variables of `d` outside the map's domain
/// that coincide with a target are evicted to fresh names first.
fn rename_derivation_total(
    d: &Derivation,
    map: &BTreeMap<VarId, VarId>,
) -> Result<Derivation, TransformError> {
    let map: BTreeMap<VarId, VarId> = map.iter().filter(|(a, b)| a != b).map(|(a, b)| (*a, *b)).collect();
    if map.is_empty() {
        return Ok(d.clone());
    }
    if let Ok(r) = d.rename(&map) {
        return Ok(r);
    }
    let all: Vec<VarId> = d
        .all_vars()
        .into_iter()
        .chain(map.values().copied())
        .collect();
    let mut gen = FreshGen::above(&all);
    let mut d = d.clone();
    let evictions: BTreeMap<VarId, VarId> = d
        .all_vars()
        .into_iter()
        .filter(|v| !map.contains_key(v) && map.values().any(|t| t == v))
        .map(|v| (v, gen.fresh(v.kind)))
        .collect();
    if !evictions.is_empty() {
        d = d.rename(&evictions).map_err(|e| TransformError::Other(e.to_string()))?;
    }
    if let Ok(r) = d.rename(&map) {
        return Ok(r);
    }
    // Two-step rename through fresh temporaries (cycles in the map).
    let step1: BTreeMap<VarId, VarId> = map.keys().map(|v| (*v, gen.fresh(v.kind))).collect();
    let mid = d.rename(&step1).map_err(|e| TransformError::Other(e.to_string()))?;
    let step2: BTreeMap<VarId, VarId> = map.iter().map(|(a, b)| (step1[a], *b)).collect();
    mid.rename(&step2).map_err(|e| TransformError::Other(e.to_string()))
}

/// Variable bijection making `a` multiset-equal to `b`, if any.
fn alpha_match(a: &Sequent, b: &Sequent) -> Option<BTreeMap<VarId, VarId>> {
    fn go(
        rest_a: &[Structure],
        rest_b: &mut Vec<Option<Structure>>,
        map: &mut BTreeMap<VarId, VarId>,
        used: &mut Vec<VarId>,
    ) -> bool {
        let Some(sa) = rest_a.first() else { return true };
        for i in 0..rest_b.len() {
            let Some(sb) = rest_b[i].clone() else { continue };
            let Some(local) = structure_match(sa, &sb) else { continue };
            // Merge consistently and injectively.
            let mut added = Vec::new();
            let mut ok = true;
            for (k, v) in &local {
                match map.get(k) {
                    Some(old) if old != v => {
                        ok = false;
                        break;
                    }
                    Some(_) => {}
                    None => {
                        if used.contains(v) {
                            ok = false;
                            break;
                        }
                        map.insert(*k, *v);
                        used.push(*v);
                        added.push(*k);
                    }
                }
            }
            if ok {
                rest_b[i] = None;
                if go(&rest_a[1..], rest_b, map, used) {
                    return true;
                }
                rest_b[i] = Some(sb);
            }
            for k in added {
                let v = map.remove(&k).unwrap();
                used.retain(|u| *u != v);
            }
        }
        false
    }
    if a.ant.len() != b.ant.len() || a.con.len() != b.con.len() {
        return None;
    }
    let mut map = BTreeMap::new();
    let mut used = Vec::new();
    let mut ba: Vec<Option<Structure>> = b.ant.iter().cloned().map(Some).collect();
    if !go(&a.ant, &mut ba, &mut map, &mut used) {
        return None;
    }
    let mut bc: Vec<Option<Structure>> = b.con.iter().cloned().map(Some).collect();
    if !go(&a.con, &mut bc, &mut map, &mut used) {
        return None;
    }
    Some(map)
}

/// Variable correspondence between two structures of the same shape.
fn structure_match(a: &Structure, b: &Structure) -> Option<BTreeMap<VarId, VarId>> {
    use Structure::*;
    let mut map = BTreeMap::new();
    match (a, b) {
        (LabJ(j1, f1), LabJ(j2, f2)) | (LabM(f1, j1), LabM(f2, j2)) if f1 == f2 => {
            map.insert(*j1, *j2);
        }
        (PureJ(j1, t1), PureJ(j2, t2)) | (PureM(t1, j1), PureM(t2, j2)) => {
            if std::mem::discriminant(t1) != std::mem::discriminant(t2) {
                return None;
            }
            map.insert(*j1, *j2);
            map.insert(t1.var(), t2.var());
        }
        _ => return None,
    }
    Some(map)
}

/// Applies the switch that flips the labelled formula at `occ` (consuming
/// its approximant, introducing `forced` or a policy-chosen variable).
/// Returns the new derivation and the locator of the flipped image.
fn flip_occurrence(
    cfg: &CalcConfig,
    policy: Policy,
    d: &Derivation,
    occ: Loc,
    forced: Option<VarId>,
) -> Result<(Derivation, Loc), TransformError> {
    let seq = d.end().clone();
    let Some(s) = seq.get(occ).cloned() else {
        return Err(TransformError::Other("flip target out of range".into()));
    };
    let v = s.approximant();
    let all_vars: Vec<VarId> = d.all_vars().into_iter().collect();
    let (rule, mut b) = switch_consuming(policy, &seq, v, &all_vars)?;
    if let Some(f) = forced {
        // Replace the introduced variable.
        let intro_key = if v.kind == VarKind::Nominal { 'm' } else { 'j' };
        b.vars.insert(intro_key, f);
    }
    let d2 = by_rule(cfg, rule, vec![d.clone()], b).map_err(TransformError::Rule)?;
    // The image carries the same formula, flipped to the other labelled
    // form.
    let want_formula = s.formula().cloned();
    let img = d2
        .inst
        .np_concl
        .iter()
        .copied()
        .find(|&l| {
            let t = d2.end().get(l).unwrap();
            t.is_labelled() && t.formula().cloned() == want_formula && t.is_labelled() != false
                && std::mem::discriminant(t) != std::mem::discriminant(&s)
        })
        .ok_or_else(|| TransformError::Other("lost the flipped occurrence".into()))?;
    Ok((d2, img))
}

/// Outcome of a push: the transformed derivation and the images of the
/// surviving conclusion occurrences of the pushed branch.
struct PushOut {
    d: Derivation,
    images: BTreeMap<Loc, Loc>,
    renamed_other: BTreeMap<VarId, VarId>,
}

/// Orientation of the branch being pushed into.
#[derive(Clone, Copy, PartialEq)]
enum BranchSide {
    Left,
    Right,
}

fn mk_cut_bindings(a: &Structure) -> (RuleId, Bindings) {
    match a {
        Structure::LabJ(j, f) => (RuleId::CutJ, Bindings::new().v('j', *j).f('A', f.clone())),
        Structure::LabM(f, m) => (RuleId::CutM, Bindings::new().v('m', *m).f('A', f.clone())),
        _ => unreachable!("cut formulas are labelled"),
    }
}

/// Pushes the cut with `other` up the branch `b` along the history of the
/// tracked occurrence `occ` of the cut formula, per the parametric stage
/// of cut elimination.
fn push(
    cfg: &CalcConfig,
    policy: Policy,
    b: &Derivation,
    occ: Loc,
    other: &Derivation,
    side: BranchSide,
    depth: usize,
) -> Result<PushOut, TransformError> {
    if depth > 512 {
        return Err(TransformError::Other("parametric push recursion too deep".into()));
    }
    let parents = b.inst.parents_of(occ);
    if parents.is_empty() {
        return push_bottom_out(cfg, policy, b, occ, other, side);
    }

    // Parameter or switch-nonparametric occurrence.
    let is_switch_np = b.inst.switch_map.iter().any(|(l, _)| *l == occ);
    if is_switch_np && b.inst.rule.is_switch() {
        push_through_switch(cfg, policy, b, occ, other, side, depth)
    } else {
        push_through_parameter(cfg, policy, b, occ, other, side, depth, parents)
    }
}

/// The cut lands at an introduction of the tracked occurrence: build it
/// there. When the occurrence's labelled form is the switch-dual of the
/// cut formula (mixed histories through the constants and atoms), the
/// other branch's occurrence is flipped first.
fn push_bottom_out(
    cfg: &CalcConfig,
    policy: Policy,
    b: &Derivation,
    occ: Loc,
    other: &Derivation,
    side: BranchSide,
) -> Result<PushOut, TransformError> {
    let Some(s) = b.end().get(occ).cloned() else {
        return Err(TransformError::Other("tracked occurrence out of range".into()));
    };
    if !s.is_labelled() {
        return Err(TransformError::NotEliminable(format!(
            "history of the cut formula bottoms out at non-labelled `{}`",
            s
        )));
    }
    let mut b = b.clone();
    let mut other = other.clone();
    let mut renamed_other = BTreeMap::new();
    // Where the matching occurrence sits in `other` for a same-form cut.
    let other_side = match side {
        BranchSide::Left => Side::Ant,
        BranchSide::Right => Side::Con,
    };
    let same_form =
        |o: &Derivation, form: &Structure| {
            o.end().locs().into_iter().find(|&l| l.side == other_side && o.end().get(l) == Some(form))
        };
    let mut a_now = s.clone();
    if same_form(&other, &a_now).is_none() {
        // Any labelled occurrence carrying the same formula.
        let cand = other
            .end()
            .locs()
            .into_iter()
            .filter(|l| l.side == other_side)
            .map(|l| (l, other.end().get(l).unwrap().clone()))
            .find(|(_, t)| t.is_labelled() && t.formula() == s.formula())
            .ok_or_else(|| {
                TransformError::Other(format!(
                    "no occurrence of the cut formula `{}` in `{}`",
                    s,
                    other.end()
                ))
            })?;
        let (cand_loc, cand_struct) = cand;
        if std::mem::discriminant(&cand_struct) == std::mem::discriminant(&s) {
            // Same form, diverged approximants: rename other's variable.
            let from = cand_struct.approximant();
            let to = s.approximant();
            let mut map = BTreeMap::new();
            map.insert(from, to);
            if other.all_vars().contains(&to) {
                map.insert(to, from);
            }
            other = rename_derivation_total(&other, &map)?;
            renamed_other = map;
        } else {
            // Dual form: flip other's occurrence with one switch and
            // align the introduced variable with the introduction's.
            let iv = s.approximant();
            let forced = if other.all_vars().contains(&iv) { None } else { Some(iv) };
            let (flipped, img) = flip_occurrence(cfg, policy, &other, cand_loc, forced)?;
            other = flipped;
            let got = other.end().get(img).unwrap().approximant();
            if got != iv {
                // Rename the introduction subtree instead.
                b = rename_safely(&b, iv, got)?;
                a_now = b.end().get(occ).unwrap().clone();
            } else {
                a_now = s.clone();
            }
        }
    }
    // Premise roles: the bottomed occurrence in the consequent supplies
    // the left premise of the cut.
    let bottom_loc = occ;
    debug_assert_eq!(b.end().get(bottom_loc), Some(&a_now));
    let (cut_rule, cb) = mk_cut_bindings(&a_now);
    let (children, prem_idx_of_b) = match bottom_loc.side {
        Side::Con => (vec![b.clone(), other.clone()], 0usize),
        Side::Ant => (vec![other.clone(), b.clone()], 1usize),
    };
    let cut = by_rule(cfg, cut_rule, children, cb).map_err(TransformError::Rule)?;
    // Images of b's surviving occurrences through the cut.
    let mut images = BTreeMap::new();
    for (cl, parents) in &cut.inst.param_map {
        for (pi, pl) in parents {
            if *pi == prem_idx_of_b {
                images.insert(*pl, *cl);
            }
        }
    }
    Ok(PushOut { d: cut, images, renamed_other })
}

fn push_through_parameter(
    cfg: &CalcConfig,
    policy: Policy,
    b: &Derivation,
    occ: Loc,
    other: &Derivation,
    side: BranchSide,
    depth: usize,
    parents: Vec<(usize, Loc)>,
) -> Result<PushOut, TransformError> {
    let rule = b.inst.rule;
    // Push into every premise holding a congruent occurrence.
    let mut new_children: Vec<Derivation> = b.children.clone();
    let mut child_images: Vec<Option<BTreeMap<Loc, Loc>>> = vec![None; b.children.len()];
    let mut renamed_other = BTreeMap::new();
    for (pi, pl) in &parents {
        let out = push(cfg, policy, &b.children[*pi], *pl, other, side, depth + 1)?;
        new_children[*pi] = out.d;
        child_images[*pi] = Some(out.images);
        if !out.renamed_other.is_empty() {
            renamed_other = out.renamed_other;
        }
    }

    // Rebind variables by the images of the rule's nonparametric premise
    // occurrences.
    let mut var_map: BTreeMap<VarId, VarId> = BTreeMap::new();
    for (pi, nps) in b.inst.np_prem.iter().enumerate() {
        let Some(images) = &child_images[pi] else { continue };
        for np in nps {
            let orig = b.inst.premises[pi].get(*np).unwrap();
            let Some(img_loc) = images.get(np) else { continue };
            let img = new_children[pi].end().get(*img_loc).unwrap();
            let Some(local) = structure_match(orig, img) else {
                return Err(TransformError::Other(format!(
                    "nonparametric `{}` degenerated to `{}` during the push",
                    orig, img
                )));
            };
            for (k, v) in local {
                if let Some(old) = var_map.get(&k) {
                    if *old != v {
                        return Err(TransformError::Other(format!(
                            "inconsistent variable images for {}",
                            k
                        )));
                    }
                }
                var_map.insert(k, v);
            }
        }
    }
    let mut bindings = b.inst.bindings.clone();
    for v in bindings.vars.values_mut() {
        if let Some(nv) = var_map.get(v) {
            *v = *nv;
        }
    }
    for t in bindings.terms.values_mut() {
        *t = t.rename(&var_map);
    }

    let inst = apply(
        cfg,
        rule,
        &new_children.iter().map(|c| c.end().clone()).collect::<Vec<_>>(),
        &bindings,
    )
    .map_err(TransformError::Rule)?;
    let d2 = Derivation { inst, children: new_children };

    // Compose images: original conclusion loc -> premise loc -> pushed
    // premise loc -> new conclusion loc.
    let mut images = BTreeMap::new();
    // Parameters.
    for (cl, ps) in &b.inst.param_map {
        // Follow the first premise that has an image.
        let mut found = None;
        for (pi, pl) in ps {
            let mid = match &child_images[*pi] {
                Some(imgs) => imgs.get(pl).copied(),
                None => Some(*pl),
            };
            if let Some(mid) = mid {
                // New conclusion loc congruent to (pi, mid).
                for (ncl, nps) in &d2.inst.param_map {
                    if nps.iter().any(|(qi, ql)| qi == pi && *ql == mid) {
                        found = Some(*ncl);
                        break;
                    }
                }
            }
            if found.is_some() {
                break;
            }
        }
        if let Some(ncl) = found {
            images.insert(*cl, ncl);
        }
    }
    // Nonparametric conclusion occurrences keep their schema position.
    for (k, cl) in b.inst.np_concl.iter().enumerate() {
        if *cl == occ {
            continue;
        }
        if let Some(ncl) = d2.inst.np_concl.get(k) {
            images.insert(*cl, *ncl);
        }
    }
    Ok(PushOut { d: d2, images, renamed_other })
}

fn push_through_switch(
    cfg: &CalcConfig,
    policy: Policy,
    b: &Derivation,
    occ: Loc,
    other: &Derivation,
    side: BranchSide,
    depth: usize,
) -> Result<PushOut, TransformError> {
    // The tracked occurrence continues above as the switch partner.
    let (_, (pi, partner)) = b
        .inst
        .switch_map
        .iter()
        .find(|(l, _)| *l == occ)
        .copied()
        .ok_or_else(|| TransformError::Other("switch edge missing".into()))?;
    let out = push(cfg, policy, &b.children[pi], partner, other, side, depth + 1)?;

    // The other premise nonparametric (the twin) survives; re-pair its
    // image with the current partner of its consumed variable.
    let twin_prem_loc = b.inst.np_prem[pi]
        .iter()
        .copied()
        .find(|l| *l != partner)
        .ok_or_else(|| TransformError::Other("switch without a twin".into()))?;
    let twin_orig = b.inst.premises[pi].get(twin_prem_loc).unwrap().clone();
    let twin_img_loc = *out.images.get(&twin_prem_loc).ok_or_else(|| {
        TransformError::Other("twin image lost during push".into())
    })?;
    let mid = out.d;
    let twin_img = mid.end().get(twin_img_loc).unwrap().clone();
    let local = structure_match(&twin_orig, &twin_img).ok_or_else(|| {
        TransformError::Other(format!("twin `{}` degenerated to `{}`", twin_orig, twin_img))
    })?;
    // The variable consumed by the original switch, as it now appears.
    let consumed_orig = consumed_var(b.inst.rule, &b.inst.bindings)?;
    let v = *local.get(&consumed_orig).unwrap_or(&consumed_orig);

    let mut cur = mid;
    let mut pre_steps_images: Vec<BTreeMap<Loc, Loc>> = Vec::new();
    // Surface a buried partner occurrence with one adjunction.
    let buried = var_occurrences(cur.end(), v)
        .into_iter()
        .find(|(l, approx)| !approx && *l != twin_img_loc);
    if let Some((lb, _)) = buried {
        if let Some(inst) = adjunct_step(cfg, cur.end(), lb)? {
            let step_map = instance_all_images(&inst);
            cur = Derivation { inst: inst.clone(), children: vec![cur] };
            pre_steps_images.push(step_map);
        }
    }
    let all_vars: Vec<VarId> = cur
        .all_vars()
        .into_iter()
        .chain(other.all_vars())
        .collect();
    let (srule, sb) = switch_consuming(policy, cur.end(), v, &all_vars)?;
    let inst = apply(cfg, srule, &[cur.end().clone()], &sb).map_err(TransformError::Rule)?;
    let step_map = instance_all_images(&inst);
    let d2 = Derivation { inst, children: vec![cur] };
    pre_steps_images.push(step_map);

    // Compose images from the original conclusion through the child push
    // and the replayed steps.
    let compose = |start: Loc| -> Option<Loc> {
        let mut l = start;
        for m in &pre_steps_images {
            l = *m.get(&l)?;
        }
        Some(l)
    };
    let mut images = BTreeMap::new();
    for (cl, ps) in &b.inst.param_map {
        if let Some((qi, ql)) = ps.first() {
            debug_assert_eq!(*qi, pi);
            if let Some(mid_l) = out.images.get(ql) {
                if let Some(fin) = compose(*mid_l) {
                    images.insert(*cl, fin);
                }
            }
        }
    }
    // The twin's conclusion image: the flipped twin in the new switch.
    for (cl, (qi2, ql2)) in &b.inst.switch_map {
        if *cl == occ {
            continue;
        }
        debug_assert_eq!(*qi2, pi);
        if *ql2 == twin_prem_loc {
            if let Some(fin) = compose(twin_img_loc) {
                images.insert(*cl, fin);
            }
        }
    }
    Ok(PushOut { d: d2, images, renamed_other: out.renamed_other })
}

/// Conclusion images of parameters of a single instance.
fn instance_param_images(inst: &RuleInstance) -> BTreeMap<Loc, Loc> {
    let mut map = BTreeMap::new();
    for (cl, ps) in &inst.param_map {
        for (_, pl) in ps {
            map.insert(*pl, *cl);
        }
    }
    map
}

/// Conclusion images including switch-nonparametric pairs (a moved
/// structure maps to its flipped image).
fn instance_all_images(inst: &RuleInstance) -> BTreeMap<Loc, Loc> {
    let mut map = instance_param_images(inst);
    for (cl, (_, pl)) in &inst.switch_map {
        map.insert(*pl, *cl);
    }
    map
}

/// The variable consumed by a switch instance.
fn consumed_var(rule: RuleId, b: &Bindings) -> Result<VarId, TransformError> {
    use RuleId::*;
    let key = match rule {
        SM | SMm | SMT | STm | STTm => 'j',
        SJ | SJj | SJT | STj | SJTT => 'm',
        _ => return Err(TransformError::Other(format!("{} is not a switch", rule))),
    };
    b.vars
        .get(&key)
        .copied()
        .ok_or_else(|| TransformError::Other("switch bindings missing the consumed variable".into()))
}

/// Renames `from` to `to` inside a subtree, first moving an existing `to`
/// out of the way.
fn rename_safely(d: &Derivation, from: VarId, to: VarId) -> Result<Derivation, TransformError> {
    if from == to {
        return Ok(d.clone());
    }
    let mut d = d.clone();
    if d.all_vars().contains(&to) {
        let avoid: Vec<VarId> = d.all_vars().into_iter().chain([from, to]).collect();
        let evicted = FreshGen::above(&avoid).fresh(to.kind);
        let mut evict = BTreeMap::new();
        evict.insert(to, evicted);
        d = d.rename(&evict).map_err(|e| TransformError::Other(e.to_string()))?;
    }
    let mut map = BTreeMap::new();
    map.insert(from, to);
    d.rename(&map).map_err(|e| TransformError::Other(e.to_string()))
}

/// Builds the one- or two-node proof of `j <= x |- j <= z` (an axiom,
/// possibly behind one switch), introduced on the requested side of the
/// labelled classification. `None` when the calculus has no such proof.
fn weak_axiom_j(
    cfg: &CalcConfig,
    j: VarId,
    x: &Formula,
    z: &Formula,
    class: crate::proof::LabelClass,
) -> Option<Derivation> {
    use crate::proof::LabelClass::*;
    let restricted_j = |f: &Formula| matches!(f, Formula::Atom(_) | Formula::And(_, _) | Formula::Box_(_));
    let restricted_m = |f: &Formula| matches!(f, Formula::Atom(_) | Formula::Or(_, _) | Formula::Dia(_));
    let native = |rule: RuleId, b: Bindings| by_rule(cfg, rule, vec![], b).ok();
    match class {
        JLabelled | Mixed => {
            let d = match (x, z) {
                (Formula::Atom(p), Formula::Atom(q)) if p == q => {
                    native(RuleId::IdJp, Bindings::new().v('j', j).f('A', z.clone()))
                }
                (Formula::Top, Formula::Top) => native(RuleId::IdTop, Bindings::new().v('j', j)),
                (Formula::Bot, _) if restricted_j(z) => {
                    native(RuleId::BotJ, Bindings::new().v('j', j).f('A', z.clone()))
                }
                (_, Formula::Top) if restricted_j(x) => {
                    native(RuleId::TopJ, Bindings::new().v('j', j).f('A', x.clone()))
                }
                _ => None,
            };
            if d.is_some() || class == JLabelled {
                return d;
            }
            weak_axiom_j(cfg, j, x, z, MLabelled)
        }
        MLabelled => {
            // S_jj over the corresponding m-side axiom `z <= m |- x <= m`.
            let m = VarId::conom(0);
            let ax = match (x, z) {
                (Formula::Atom(p), Formula::Atom(q)) if p == q => {
                    native(RuleId::IdPm, Bindings::new().v('m', m).f('A', x.clone()))
                }
                (Formula::Bot, Formula::Bot) => native(RuleId::IdBot, Bindings::new().v('m', m)),
                (_, Formula::Top) if restricted_m(x) => {
                    native(RuleId::TopM, Bindings::new().v('m', m).f('B', x.clone()))
                }
                (Formula::Bot, _) if restricted_m(z) => {
                    native(RuleId::BotM, Bindings::new().v('m', m).f('B', z.clone()))
                }
                _ => None,
            }?;
            let b = Bindings::new().v('j', j).v('m', m).f('A', z.clone()).f('B', x.clone());
            by_rule(cfg, RuleId::SJj, vec![ax], b).ok()
        }
    }
}

/// Dual helper: `x <= m |- z <= m`.
fn weak_axiom_m(
    cfg: &CalcConfig,
    m: VarId,
    x: &Formula,
    z: &Formula,
    class: crate::proof::LabelClass,
) -> Option<Derivation> {
    use crate::proof::LabelClass::*;
    let restricted_j = |f: &Formula| matches!(f, Formula::Atom(_) | Formula::And(_, _) | Formula::Box_(_));
    let restricted_m = |f: &Formula| matches!(f, Formula::Atom(_) | Formula::Or(_, _) | Formula::Dia(_));
    let native = |rule: RuleId, b: Bindings| by_rule(cfg, rule, vec![], b).ok();
    match class {
        MLabelled | Mixed => {
            let d = match (x, z) {
                (Formula::Atom(p), Formula::Atom(q)) if p == q => {
                    native(RuleId::IdPm, Bindings::new().v('m', m).f('A', z.clone()))
                }
                (Formula::Bot, Formula::Bot) => native(RuleId::IdBot, Bindings::new().v('m', m)),
                (Formula::Top, _) if restricted_m(z) => {
                    native(RuleId::TopM, Bindings::new().v('m', m).f('B', z.clone()))
                }
                (_, Formula::Bot) if restricted_m(x) => {
                    native(RuleId::BotM, Bindings::new().v('m', m).f('B', x.clone()))
                }
                _ => None,
            };
            if d.is_some() || class == MLabelled {
                return d;
            }
            weak_axiom_m(cfg, m, x, z, JLabelled)
        }
        JLabelled => {
            // S_mm over the j-side axiom `j <= z ... j <= x`.
            let j = VarId::nom(1);
            let ax = match (x, z) {
                (Formula::Atom(p), Formula::Atom(q)) if p == q => {
                    native(RuleId::IdJp, Bindings::new().v('j', j).f('A', x.clone()))
                }
                (Formula::Top, Formula::Top) => native(RuleId::IdTop, Bindings::new().v('j', j)),
                (Formula::Top, _) if restricted_j(z) => {
                    // premise `j <= z |- j <= T` is Top_j with A := z
                    native(RuleId::TopJ, Bindings::new().v('j', j).f('A', z.clone()))
                }
                (_, Formula::Bot) if restricted_j(x) => {
                    // premise `j <= F |- j <= x` is Bot_j with A := x
                    native(RuleId::BotJ, Bindings::new().v('j', j).f('A', x.clone()))
                }
                _ => None,
            }?;
            let b = Bindings::new().v('j', j).v('m', m).f('A', z.clone()).f('B', x.clone());
            by_rule(cfg, RuleId::SMm, vec![ax], b).ok()
        }
    }
}

/// Node id (pre-order within `d`) of child `i` of the root.
fn child_node_id(d: &Derivation, i: usize) -> usize {
    1 + d.children[..i].iter().map(|c| c.node_count()).sum::<usize>()
}

/// One reduction move on a cut whose premise subproofs are cut-free.
fn reduce_one(
    cfg: &CalcConfig,
    policy: Policy,
    d: &Derivation,
) -> Result<Derivation, TransformError> {
    debug_assert!(d.inst.rule.is_cut());
    let occ_l = d.inst.np_prem[0][0];
    let occ_r = d.inst.np_prem[1][0];
    let left = &d.children[0];
    let right = &d.children[1];
    // A premise that is an identity axiom on the cut formula erases the
    // cut outright, whatever the other side looks like.
    {
        use RuleId::*;
        let a = left.end().get(occ_l).unwrap().clone();
        let is_exact_id = |x: &Derivation| {
            matches!(x.rule(), IdJp | IdPm | IdBot | IdTop)
                && x.end().ant == vec![a.clone()]
                && x.end().con == vec![a.clone()]
        };
        if is_exact_id(left) {
            return make_end_equal(cfg, right, d.end());
        }
        if is_exact_id(right) {
            return make_end_equal(cfg, left, d.end());
        }
    }
    let pl = introduced_at_root(left, occ_l);
    let pr = introduced_at_root(right, occ_r);
    match (pl, pr) {
        (true, true) => principal_step(cfg, policy, d),
        (false, _) => {
            let out = push(cfg, policy, left, occ_l, right, BranchSide::Left, 0)?;
            Ok(out.d)
        }
        (true, false) => {
            let out = push(cfg, policy, right, occ_r, left, BranchSide::Right, 0)?;
            Ok(out.d)
        }
    }
}

/// One parametric move on a cut-rooted derivation (pushing toward the
/// uppermost introduction on the side where the cut formula is
/// parametric). Returns the transformed derivation and the renaming
/// applied to the untouched branch, identity under policy one.
pub fn parametric_step(
    cfg: &CalcConfig,
    policy: Policy,
    d: &Derivation,
) -> Result<(Derivation, BTreeMap<VarId, VarId>), TransformError> {
    if !d.inst.rule.is_cut() {
        return Err(TransformError::Other("parametric step expects a cut at the root".into()));
    }
    let occ_l = d.inst.np_prem[0][0];
    let occ_r = d.inst.np_prem[1][0];
    let (out, target) = if !introduced_at_root(&d.children[0], occ_l) {
        (
            push(cfg, policy, &d.children[0], occ_l, &d.children[1], BranchSide::Left, 0)?,
            d.end().clone(),
        )
    } else if !introduced_at_root(&d.children[1], occ_r) {
        (
            push(cfg, policy, &d.children[1], occ_r, &d.children[0], BranchSide::Right, 0)?,
            d.end().clone(),
        )
    } else {
        return Err(TransformError::Other("both cut formulas are principal".into()));
    };
    let fixed = make_end_equal(cfg, &out.d, &target)?;
    Ok((fixed, out.renamed_other))
}

fn principal_step(
    cfg: &CalcConfig,
    policy: Policy,
    d: &Derivation,
) -> Result<Derivation, TransformError> {
    use crate::proof::LabelClass::*;
    use RuleId::*;
    let left = &d.children[0];
    let right = &d.children[1];
    let a_loc_l = d.inst.np_prem[0][0];
    let a = left.end().get(a_loc_l).unwrap().clone();
    let target = d.end().clone();

    // Exact identity axioms: the cut is erased.
    let is_exact_id = |x: &Derivation| {
        matches!(x.rule(), IdJp | IdPm | IdBot | IdTop)
            && x.end().ant == vec![a.clone()]
            && x.end().con == vec![a.clone()]
    };
    if is_exact_id(left) {
        return make_end_equal(cfg, right, &target);
    }
    if is_exact_id(right) {
        return make_end_equal(cfg, left, &target);
    }

    let forest = crate::proof::congruence(d);
    let lid = child_node_id(d, 0);
    let rid = child_node_id(d, 1);
    // Classification of subformula occurrences: premise nonparametric
    // labelled occurrences on both sides.
    let aux_class = |locs: Vec<(usize, Loc)>| crate::proof::classify_with(d, &forest, &locs);
    let np_occ = |branch: &Derivation, base: usize, pi: usize, labelled: bool| -> Option<(usize, Loc)> {
        let node = base + 1 + branch.children[..pi].iter().map(|c| c.node_count()).sum::<usize>();
        branch.inst.np_prem[pi]
            .iter()
            .copied()
            .find(|l| branch.inst.premises[pi].get(*l).map(|s| s.is_labelled()) == Some(labelled))
            .map(|l| (node, l))
    };

    match (left.rule(), right.rule()) {
        // Conjunction: And_S against And_P on the matching conjunct.
        (AndS, AndP) | (OrP, OrS) => {
            let i = right.inst.bindings.index.unwrap_or(1) as usize;
            let sub = if i == 1 {
                right.inst.bindings.formulas[&'A'].clone()
            } else {
                right.inst.bindings.formulas[&'B'].clone()
            };
            let left_i = left.children[i - 1].clone();
            let right_p = right.children[0].clone();
            let mut occs = Vec::new();
            if let Some(o) = np_occ(left, lid, i - 1, true) {
                occs.push(o);
            }
            if let Some(o) = np_occ(right, rid, 0, true) {
                occs.push(o);
            }
            let class = aux_class(occs);
            let is_and = left.rule() == AndS;
            // Mixed atomic/constant histories reduce through the direct
            // route; the pushes flip at their introductions.
            let direct_ok = (is_and && class != MLabelled) || (!is_and && class != JLabelled);
            let reduced = if direct_ok {
                let (rule, b) = if is_and {
                    let j = *d.inst.bindings.vars.get(&'j').unwrap();
                    (CutJ, Bindings::new().v('j', j).f('A', sub.clone()))
                } else {
                    let m = *d.inst.bindings.vars.get(&'m').unwrap();
                    (CutM, Bindings::new().v('m', m).f('A', sub.clone()))
                };
                by_rule(cfg, rule, vec![left_i, right_p], b).map_err(TransformError::Rule)?
            } else {
                // Flip both auxiliary occurrences to the other labelled
                // form, cut there, switch back.
                let avoid: Vec<VarId> = left_i
                    .all_vars()
                    .into_iter()
                    .chain(right_p.all_vars())
                    .collect();
                let fresh_kind = if is_and { VarKind::Conominal } else { VarKind::Nominal };
                let shared = FreshGen::above(&avoid).fresh(fresh_kind);
                let l_occ = left.inst.np_prem[i - 1][0];
                let r_occ = right.inst.np_prem[0][0];
                let (fl, _) = flip_occurrence(cfg, policy, &left_i, l_occ, Some(shared))?;
                let (fr, _) = flip_occurrence(cfg, policy, &right_p, r_occ, Some(shared))?;
                let (rule, b, consumed) = if is_and {
                    (CutM, Bindings::new().v('m', shared).f('A', sub.clone()), *d
                        .inst
                        .bindings
                        .vars
                        .get(&'j')
                        .unwrap())
                } else {
                    (CutJ, Bindings::new().v('j', shared).f('A', sub.clone()), *d
                        .inst
                        .bindings
                        .vars
                        .get(&'m')
                        .unwrap())
                };
                let cut = by_rule(cfg, rule, vec![fr, fl], b).map_err(TransformError::Rule)?;
                // Re-switch, restoring the original approximant.
                let all: Vec<VarId> = cut.all_vars().into_iter().collect();
                let (srule, mut sb) = switch_consuming(policy, cut.end(), shared, &all)?;
                let intro_key = if fresh_kind == VarKind::Conominal { 'j' } else { 'm' };
                sb.vars.insert(intro_key, consumed);
                by_rule(cfg, srule, vec![cut], sb).map_err(TransformError::Rule)?
            };
            make_end_equal(cfg, &reduced, &target)
        }
        // Box: Box_S against Box_P.
        (BoxS, BoxP) => {
            let sub = left.inst.bindings.formulas[&'A'].clone();
            let m_e = left.inst.bindings.vars[&'m'];
            let m_r = right.inst.bindings.vars[&'m'];
            let j = d.inst.bindings.vars[&'j'];
            let left_p = left.children[0].clone();
            let right_p = right.children[0].clone();
            let mut occs = Vec::new();
            if let Some(o) = np_occ(left, lid, 0, true) {
                occs.push(o);
            }
            if let Some(o) = np_occ(right, rid, 0, true) {
                occs.push(o);
            }
            let class = aux_class(occs);
            let reduced = match class {
                MLabelled | Mixed => {
                    let left2 = rename_safely(&left_p, m_e, m_r)?;
                    let adj = by_rule(
                        cfg,
                        AdjBdBox,
                        vec![left2],
                        Bindings::new().v('j', j).v('m', m_r),
                    )
                    .map_err(TransformError::Rule)?;
                    let cut = by_rule(
                        cfg,
                        CutM,
                        vec![right_p, adj],
                        Bindings::new().v('m', m_r).f('A', sub.clone()),
                    )
                    .map_err(TransformError::Rule)?;
                    by_rule(cfg, AdjBdBoxInv, vec![cut], Bindings::new().v('j', j).v('m', m_r))
                        .map_err(TransformError::Rule)?
                }
                JLabelled => {
                    // The twin-mediated switch on both branches.
                    let avoid: Vec<VarId> = left_p
                        .all_vars()
                        .into_iter()
                        .chain(right_p.all_vars())
                        .collect();
                    let i = FreshGen::above(&avoid).fresh(VarKind::Nominal);
                    let adj = by_rule(
                        cfg,
                        AdjBdBox,
                        vec![left_p],
                        Bindings::new().v('j', j).v('m', m_e),
                    )
                    .map_err(TransformError::Rule)?;
                    let all: Vec<VarId> = adj.all_vars().into_iter().collect();
                    let (r3, mut b3) = switch_consuming(policy, adj.end(), m_e, &all)?;
                    b3.vars.insert('j', i);
                    let left3 = by_rule(cfg, r3, vec![adj], b3).map_err(TransformError::Rule)?;
                    let all: Vec<VarId> = right_p.all_vars().into_iter().collect();
                    let (r4, mut b4) = switch_consuming(policy, right_p.end(), m_r, &all)?;
                    b4.vars.insert('j', i);
                    let right2 =
                        by_rule(cfg, r4, vec![right_p], b4).map_err(TransformError::Rule)?;
                    let cut = by_rule(
                        cfg,
                        CutJ,
                        vec![left3, right2],
                        Bindings::new().v('j', i).f('A', sub.clone()),
                    )
                    .map_err(TransformError::Rule)?;
                    let all: Vec<VarId> = cut.all_vars().into_iter().collect();
                    let (r5, mut b5) = switch_consuming(policy, cut.end(), i, &all)?;
                    b5.vars.insert('m', m_r);
                    let st = by_rule(cfg, r5, vec![cut], b5).map_err(TransformError::Rule)?;
                    by_rule(cfg, AdjBdBoxInv, vec![st], Bindings::new().v('j', j).v('m', m_r))
                        .map_err(TransformError::Rule)?
                }
            };
            make_end_equal(cfg, &reduced, &target)
        }
        // Diamond: Dia_P against Dia_S.
        (DiaP, DiaS) => {
            let sub = left.inst.bindings.formulas[&'A'].clone();
            let j_e = left.inst.bindings.vars[&'j'];
            let j_r = right.inst.bindings.vars[&'j'];
            let m = d.inst.bindings.vars[&'m'];
            let left_p = left.children[0].clone();
            let right_p = right.children[0].clone();
            let mut occs = Vec::new();
            if let Some(o) = np_occ(left, lid, 0, true) {
                occs.push(o);
            }
            if let Some(o) = np_occ(right, rid, 0, true) {
                occs.push(o);
            }
            let class = aux_class(occs);
            let reduced = match class {
                JLabelled | Mixed => {
                    let left2 = rename_safely(&left_p, j_e, j_r)?;
                    let adj = by_rule(
                        cfg,
                        AdjDiaBb,
                        vec![left2],
                        Bindings::new().v('j', j_r).v('m', m),
                    )
                    .map_err(TransformError::Rule)?;
                    let cut = by_rule(
                        cfg,
                        CutJ,
                        vec![right_p, adj],
                        Bindings::new().v('j', j_r).f('A', sub.clone()),
                    )
                    .map_err(TransformError::Rule)?;
                    by_rule(cfg, AdjDiaBbInv, vec![cut], Bindings::new().v('j', j_r).v('m', m))
                        .map_err(TransformError::Rule)?
                }
                MLabelled => {
                    let avoid: Vec<VarId> = left_p
                        .all_vars()
                        .into_iter()
                        .chain(right_p.all_vars())
                        .collect();
                    let mh = FreshGen::above(&avoid).fresh(VarKind::Conominal);
                    let adj = by_rule(
                        cfg,
                        AdjDiaBb,
                        vec![left_p],
                        Bindings::new().v('j', j_e).v('m', m),
                    )
                    .map_err(TransformError::Rule)?;
                    let all: Vec<VarId> = adj.all_vars().into_iter().collect();
                    let (r3, mut b3) = switch_consuming(policy, adj.end(), j_e, &all)?;
                    b3.vars.insert('m', mh);
                    let left3 = by_rule(cfg, r3, vec![adj], b3).map_err(TransformError::Rule)?;
                    let all: Vec<VarId> = right_p.all_vars().into_iter().collect();
                    let (r4, mut b4) = switch_consuming(policy, right_p.end(), j_r, &all)?;
                    b4.vars.insert('m', mh);
                    let right2 =
                        by_rule(cfg, r4, vec![right_p], b4).map_err(TransformError::Rule)?;
                    let cut = by_rule(
                        cfg,
                        CutM,
                        vec![left3, right2],
                        Bindings::new().v('m', mh).f('A', sub.clone()),
                    )
                    .map_err(TransformError::Rule)?;
                    let all: Vec<VarId> = cut.all_vars().into_iter().collect();
                    let (r5, mut b5) = switch_consuming(policy, cut.end(), mh, &all)?;
                    b5.vars.insert('j', j_r);
                    let st = by_rule(cfg, r5, vec![cut], b5).map_err(TransformError::Rule)?;
                    by_rule(cfg, AdjDiaBbInv, vec![st], Bindings::new().v('j', j_r).v('m', m))
                        .map_err(TransformError::Rule)?
                }
            };
            make_end_equal(cfg, &reduced, &target)
        }
        // Axiom against a logical rule: compose through the bottom or
        // top constant.
        (BotJ, AndP) => {
            let j = d.inst.bindings.vars[&'j'];
            let i = right.inst.bindings.index.unwrap_or(1) as usize;
            let sub = if i == 1 {
                right.inst.bindings.formulas[&'A'].clone()
            } else {
                right.inst.bindings.formulas[&'B'].clone()
            };
            let right_p = right.children[0].clone();
            if sub == Formula::Bot {
                return make_end_equal(cfg, &right_p, &target);
            }
            let class = aux_class(np_occ(right, rid, 0, true).into_iter().collect());
            let left2 = weak_axiom_j(cfg, j, &Formula::Bot, &sub, class).ok_or_else(|| {
                TransformError::NotEliminable(format!(
                    "no cut-free axiom composite for j <= F against j <= {}",
                    sub
                ))
            })?;
            let cut = by_rule(cfg, CutJ, vec![left2, right_p], Bindings::new().v('j', j).f('A', sub))
                .map_err(TransformError::Rule)?;
            make_end_equal(cfg, &cut, &target)
        }
        (AndS, TopJ) => {
            let j = d.inst.bindings.vars[&'j'];
            for i in [1usize, 2usize] {
                let sub = if i == 1 {
                    left.inst.bindings.formulas[&'A'].clone()
                } else {
                    left.inst.bindings.formulas[&'B'].clone()
                };
                let left_i = left.children[i - 1].clone();
                if sub == Formula::Top {
                    return make_end_equal(cfg, &left_i, &target);
                }
                let class = aux_class(np_occ(left, lid, i - 1, true).into_iter().collect());
                if let Some(right2) = weak_axiom_j(cfg, j, &sub, &Formula::Top, class) {
                    let cut = by_rule(
                        cfg,
                        CutJ,
                        vec![left_i, right2],
                        Bindings::new().v('j', j).f('A', sub),
                    )
                    .map_err(TransformError::Rule)?;
                    return make_end_equal(cfg, &cut, &target);
                }
            }
            Err(TransformError::NotEliminable(
                "conjunction against the top axiom admits no composite".into(),
            ))
        }
        (TopM, OrS) => {
            let m = d.inst.bindings.vars[&'m'];
            let i = right.inst.bindings.index.unwrap_or(1) as usize;
            let sub = if i == 1 {
                right.inst.bindings.formulas[&'A'].clone()
            } else {
                right.inst.bindings.formulas[&'B'].clone()
            };
            let right_p = right.children[0].clone();
            if sub == Formula::Top {
                return make_end_equal(cfg, &right_p, &target);
            }
            let class = aux_class(np_occ(right, rid, 0, true).into_iter().collect());
            let left2 = weak_axiom_m(cfg, m, &Formula::Top, &sub, class).ok_or_else(|| {
                TransformError::NotEliminable(format!(
                    "no cut-free axiom composite for T <= m against {} <= m",
                    sub
                ))
            })?;
            let cut = by_rule(cfg, CutM, vec![left2, right_p], Bindings::new().v('m', m).f('A', sub))
                .map_err(TransformError::Rule)?;
            make_end_equal(cfg, &cut, &target)
        }
        (OrP, BotM) => {
            let m = d.inst.bindings.vars[&'m'];
            for i in [1usize, 2usize] {
                let sub = if i == 1 {
                    left.inst.bindings.formulas[&'A'].clone()
                } else {
                    left.inst.bindings.formulas[&'B'].clone()
                };
                let left_i = left.children[i - 1].clone();
                if sub == Formula::Bot {
                    return make_end_equal(cfg, &left_i, &target);
                }
                let class = aux_class(np_occ(left, lid, i - 1, true).into_iter().collect());
                if let Some(right2) = weak_axiom_m(cfg, m, &sub, &Formula::Bot, class) {
                    let cut = by_rule(
                        cfg,
                        CutM,
                        vec![left_i, right2],
                        Bindings::new().v('m', m).f('A', sub),
                    )
                    .map_err(TransformError::Rule)?;
                    return make_end_equal(cfg, &cut, &target);
                }
            }
            Err(TransformError::NotEliminable(
                "disjunction against the bottom axiom admits no composite".into(),
            ))
        }
        // Axiom against axiom: compose into another axiom when one
        // exists.
        (l, r) if l.is_initial() && r.is_initial() => {
            let (lx, rz, composite) = match &a {
                Structure::LabJ(j, _) => {
                    let lx = left.end().ant[0].formula().cloned();
                    let rz = right.end().con[0].formula().cloned();
                    match (lx, rz) {
                        (Some(x), Some(z)) => {
                            let c = weak_axiom_j(cfg, *j, &x, &z, crate::proof::LabelClass::Mixed);
                            (x, z, c)
                        }
                        _ => return Err(TransformError::NotEliminable("malformed axiom cut".into())),
                    }
                }
                Structure::LabM(_, m) => {
                    let lx = left.end().ant[0].formula().cloned();
                    let rz = right.end().con[0].formula().cloned();
                    match (lx, rz) {
                        (Some(x), Some(z)) => {
                            let c = weak_axiom_m(cfg, *m, &x, &z, crate::proof::LabelClass::Mixed);
                            (x, z, c)
                        }
                        _ => return Err(TransformError::NotEliminable("malformed axiom cut".into())),
                    }
                }
                _ => unreachable!(),
            };
            let composite = composite.ok_or_else(|| {
                TransformError::NotEliminable(format!(
                    "axioms composing `{}` with `{}` have no cut-free composite",
                    lx, rz
                ))
            })?;
            make_end_equal(cfg, &composite, &target)
        }
        (l, r) => Err(TransformError::NotEliminable(format!(
            "no principal reduction for {} against {}",
            l, r
        ))),
    }
}

/// Path (child indices) of an uppermost cut: a cut with no cut above it.
fn find_uppermost_cut(d: &Derivation) -> Option<Vec<usize>> {
    for (i, c) in d.children.iter().enumerate() {
        if let Some(mut p) = find_uppermost_cut(c) {
            let mut path = vec![i];
            path.append(&mut p);
            return Some(path);
        }
    }
    if d.inst.rule.is_cut() {
        Some(Vec::new())
    } else {
        None
    }
}

fn subtree<'a>(d: &'a Derivation, path: &[usize]) -> &'a Derivation {
    match path.split_first() {
        None => d,
        Some((i, rest)) => subtree(&d.children[*i], rest),
    }
}

fn splice(d: &Derivation, path: &[usize], replacement: Derivation) -> Derivation {
    match path.split_first() {
        None => replacement,
        Some((i, rest)) => {
            let mut out = d.clone();
            out.children[*i] = splice(&d.children[*i], rest, replacement);
            out
        }
    }
}

/// Eliminates every cut. The output checks, is cut-free, and ends in the
/// same sequent. Operates on strict-mode proofs.
pub fn cut_eliminate(
    cfg: &CalcConfig,
    policy: Policy,
    d: &Derivation,
) -> Result<Derivation, TransformError> {
    cut_eliminate_inner(cfg, policy, d, 20_000, false)
}

/// Debugging variant: prints each reduction step.
pub fn cut_eliminate_traced(
    cfg: &CalcConfig,
    policy: Policy,
    d: &Derivation,
    fuel: usize,
) -> Result<Derivation, TransformError> {
    cut_eliminate_inner(cfg, policy, d, fuel, true)
}

fn cut_eliminate_inner(
    cfg: &CalcConfig,
    policy: Policy,
    d: &Derivation,
    mut fuel: usize,
    trace: bool,
) -> Result<Derivation, TransformError> {
    if cfg.mode == Mode::Invertible {
        return Err(TransformError::NonProperConfiguration(
            "cut elimination operates on non-invertible proofs".into(),
        ));
    }
    let mut cur = d.clone();
    while let Some(path) = find_uppermost_cut(&cur) {
        if fuel == 0 {
            return Err(TransformError::Other("cut elimination exceeded its step budget".into()));
        }
        fuel -= 1;
        let sub = subtree(&cur, &path).clone();
        let end = sub.end().clone();
        if trace {
            let a = sub.end();
            let _ = a;
            eprintln!(
                "cut {:?} on {} | left {} ({}n) right {} ({}n)",
                sub.inst.rule,
                sub.inst
                    .bindings
                    .formulas
                    .get(&'A')
                    .map(|f| f.to_string())
                    .unwrap_or_default(),
                sub.children[0].rule(),
                sub.children[0].node_count(),
                sub.children[1].rule(),
                sub.children[1].node_count(),
            );
        }
        let reduced = reduce_one(cfg, policy, &sub)?;
        let fixed = make_end_equal(cfg, &reduced, &end)?;
        cur = splice(&cur, &path, fixed);
    }
    Ok(cur)
}

/// Public wrapper: the switch rule and bindings that consume `v` in
/// `seq`, for roundtrip testing and external drivers.
pub fn switch_step_for(
    _cfg: &CalcConfig,
    policy: Policy,
    seq: &Sequent,
    v: VarId,
    all_vars: &[VarId],
) -> Result<(RuleId, Bindings), TransformError> {
    switch_consuming(policy, seq, v, all_vars)
}

/// When the structure at `loc` admits an adjunction, applies it and its
/// inverse; returns the intermediate and final sequents.
pub fn adjunction_roundtrip(
    cfg: &CalcConfig,
    seq: &Sequent,
    loc: Loc,
) -> Option<(Sequent, Sequent)> {
    let inst = adjunct_step(cfg, seq, loc).ok()??;
    let inv = inverse_of(inst.rule)?;
    let back = apply(cfg, inv, &[inst.conclusion.clone()], &inst.bindings).ok()?;
    Some((inst.conclusion, back.conclusion))
}
