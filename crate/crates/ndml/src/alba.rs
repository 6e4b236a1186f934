//! A small correspondence engine: rewrites modal inequalities of the
//! restricted inductive fragment into flat quasi-inequalities over
//! nominals and conominals, and reads the result back as a one-premise
//! structural rule.

use std::fmt;

use crate::error::AlbaError;
use crate::syntax::{Formula, Sequent, Structure, Term, VarId};

/// Quantifier of a prefix entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantifier {
    All,
    Exists,
}

/// Terms of the extended language as they appear in ALBA computations:
/// no depth restriction, over variables of any kind.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimpleTerm {
    Var(VarId),
    Formula(Formula),
    Dia(Box<SimpleTerm>),
    Box(Box<SimpleTerm>),
    BDia(Box<SimpleTerm>),
    BBox(Box<SimpleTerm>),
}

impl SimpleTerm {
    pub fn var(v: VarId) -> SimpleTerm {
        SimpleTerm::Var(v)
    }
    pub fn dia(t: SimpleTerm) -> SimpleTerm {
        SimpleTerm::Dia(Box::new(t))
    }
    pub fn box_(t: SimpleTerm) -> SimpleTerm {
        SimpleTerm::Box(Box::new(t))
    }
    pub fn bdia(t: SimpleTerm) -> SimpleTerm {
        SimpleTerm::BDia(Box::new(t))
    }
    pub fn bbox(t: SimpleTerm) -> SimpleTerm {
        SimpleTerm::BBox(Box::new(t))
    }

    pub fn vars(&self) -> Vec<VarId> {
        match self {
            SimpleTerm::Var(v) => vec![*v],
            SimpleTerm::Formula(f) => f.props(),
            SimpleTerm::Dia(t) | SimpleTerm::Box(t) | SimpleTerm::BDia(t) | SimpleTerm::BBox(t) => t.vars(),
        }
    }

    fn subst(&self, v: VarId, with: &SimpleTerm) -> SimpleTerm {
        match self {
            SimpleTerm::Var(w) if *w == v => with.clone(),
            SimpleTerm::Var(w) => SimpleTerm::Var(*w),
            SimpleTerm::Formula(f) => SimpleTerm::Formula(f.clone()),
            SimpleTerm::Dia(t) => SimpleTerm::dia(t.subst(v, with)),
            SimpleTerm::Box(t) => SimpleTerm::box_(t.subst(v, with)),
            SimpleTerm::BDia(t) => SimpleTerm::bdia(t.subst(v, with)),
            SimpleTerm::BBox(t) => SimpleTerm::bbox(t.subst(v, with)),
        }
    }
}

impl fmt::Display for SimpleTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimpleTerm::Var(v) => write!(f, "{}", v),
            SimpleTerm::Formula(x) => write!(f, "{}", x),
            SimpleTerm::Dia(t) => write!(f, "<>{}", t),
            SimpleTerm::Box(t) => write!(f, "[]{}", t),
            SimpleTerm::BDia(t) => write!(f, "<#>{}", t),
            SimpleTerm::BBox(t) => write!(f, "[#]{}", t),
        }
    }
}

/// Body of a quasi-inequality: an implication tree over inequalities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QBody {
    Leq(SimpleTerm, SimpleTerm),
    And(Vec<QBody>),
    Implies(Box<QBody>, Box<QBody>),
}

impl QBody {
    pub fn implies(p: QBody, q: QBody) -> QBody {
        QBody::Implies(Box::new(p), Box::new(q))
    }

    pub fn vars(&self) -> Vec<VarId> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut Vec<VarId>) {
        match self {
            QBody::Leq(a, b) => {
                for v in a.vars().into_iter().chain(b.vars()) {
                    if !out.contains(&v) {
                        out.push(v);
                    }
                }
            }
            QBody::And(parts) => parts.iter().for_each(|p| p.collect_vars(out)),
            QBody::Implies(p, q) => {
                p.collect_vars(out);
                q.collect_vars(out);
            }
        }
    }

}

impl fmt::Display for QBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QBody::Leq(a, b) => write!(f, "{} <= {}", a, b),
            QBody::And(parts) => {
                let strs: Vec<String> = parts.iter().map(|p| format!("{}", p)).collect();
                write!(f, "({})", strs.join(" & "))
            }
            QBody::Implies(p, q) => write!(f, "({} => {})", p, q),
        }
    }
}

/// A quantified implication over inequalities of the extended language.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuasiInequality {
    pub prefix: Vec<(Quantifier, VarId)>,
    pub body: QBody,
}

impl fmt::Display for QuasiInequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (q, v) in &self.prefix {
            match q {
                Quantifier::All => write!(f, "A{} ", v)?,
                Quantifier::Exists => write!(f, "E{} ", v)?,
            }
        }
        write!(f, "{}", self.body)
    }
}

/// One step of the rewrite chain, for reporting.
#[derive(Debug, Clone)]
pub struct ChainStep {
    pub name: &'static str,
    pub result: QuasiInequality,
}

/// Shape of the supported fragment: `<>^k []^a p <= []^l <>^b p`.
#[derive(Debug, Clone, Copy)]
struct FragmentShape {
    k: usize,
    a: usize,
    l: usize,
    b: usize,
}

fn shape_of(lhs: &Formula, rhs: &Formula) -> Result<(FragmentShape, VarId), AlbaError> {
    fn diamonds(f: &Formula) -> (usize, Formula) {
        match f {
            Formula::Dia(x) => {
                let (n, rest) = diamonds(x);
                (n + 1, rest)
            }
            _ => (0, f.clone()),
        }
    }
    fn boxes(f: &Formula) -> (usize, Formula) {
        match f {
            Formula::Box_(x) => {
                let (n, rest) = boxes(x);
                (n + 1, rest)
            }
            _ => (0, f.clone()),
        }
    }
    let (k, lrest) = diamonds(lhs);
    let (a, lcore) = boxes(&lrest);
    let (l, rrest) = boxes(rhs);
    let (b, rcore) = diamonds(&rrest);
    match (lcore, rcore) {
        (Formula::Atom(p), Formula::Atom(q)) if p == q => Ok((FragmentShape { k, a, l, b }, p)),
        (lc, rc) => Err(AlbaError::OutOfFragment(format!(
            "expected <>^k []^a p <= []^l <>^b p, found cores `{}` and `{}`",
            lc, rc
        ))),
    }
}

fn iterate(n: usize, f: impl Fn(SimpleTerm) -> SimpleTerm, base: SimpleTerm) -> SimpleTerm {
    let mut t = base;
    for _ in 0..n {
        t = f(t);
    }
    t
}

/// The approximation step: fresh universal nominals below the left
/// subterm, conominals above the right one.
pub fn approximate(lhs: &Formula, rhs: &Formula) -> Result<QuasiInequality, AlbaError> {
    let (shape, p) = shape_of(lhs, rhs)?;
    let j = VarId::nom(1);
    let m = VarId::conom(0);
    let psi = iterate(shape.a, SimpleTerm::box_, SimpleTerm::var(p));
    let rho = iterate(shape.b, SimpleTerm::dia, SimpleTerm::var(p));
    let concl = QBody::Leq(
        iterate(shape.k, SimpleTerm::dia, SimpleTerm::var(j)),
        iterate(shape.l, SimpleTerm::box_, SimpleTerm::var(m)),
    );
    let body = QBody::implies(
        QBody::And(vec![
            QBody::Leq(SimpleTerm::var(j), psi),
            QBody::Leq(rho, SimpleTerm::var(m)),
        ]),
        concl,
    );
    Ok(QuasiInequality {
        prefix: vec![(Quantifier::All, p), (Quantifier::All, j), (Quantifier::All, m)],
        body,
    })
}

/// The elimination step: adjunction surfacing where needed, then the
/// Ackermann substitution removing the proposition variable.
pub fn eliminate(q: &QuasiInequality) -> Result<(QuasiInequality, Vec<ChainStep>), AlbaError> {
    let QBody::Implies(prem, concl) = &q.body else {
        return Err(AlbaError::AckermannBlocked("expected an implication body".into()));
    };
    let QBody::And(parts) = prem.as_ref() else {
        return Err(AlbaError::AckermannBlocked("expected two approximation premises".into()));
    };
    let [QBody::Leq(SimpleTerm::Var(j), psi), QBody::Leq(rho, SimpleTerm::Var(m))] = parts.as_slice()
    else {
        return Err(AlbaError::AckermannBlocked("premises are not in approximated form".into()));
    };
    let p = match (psi_core(psi), psi_core(rho)) {
        (Some(p1), Some(p2)) if p1 == p2 => p1,
        _ => {
            return Err(AlbaError::AckermannBlocked(
                "premises do not share a single proposition variable".into(),
            ))
        }
    };
    let a = modal_depth(psi);
    let b = modal_depth(rho);
    let mut steps = Vec::new();
    let mut prefix: Vec<(Quantifier, VarId)> =
        q.prefix.iter().copied().filter(|(_, v)| *v != p).collect();

    // Pick the substitution that keeps the result flat.
    let antecedent = if a == 0 {
        // p := j substituted into rho <= m.
        let sub = rho_apply(rho, SimpleTerm::var(*j));
        QBody::Leq(sub, SimpleTerm::var(*m))
    } else if b == 0 {
        // p := m substituted into j <= psi.
        let sub = psi_apply(psi, SimpleTerm::var(*m));
        QBody::Leq(SimpleTerm::var(*j), sub)
    } else {
        // Surface the left adjoints first: j <= []^a p becomes
        // <#>^a j <= p, then substitute into rho <= m.
        let surfaced = iterate(a, SimpleTerm::bdia, SimpleTerm::var(*j));
        steps.push(ChainStep {
            name: "adjunction",
            result: QuasiInequality {
                prefix: q.prefix.clone(),
                body: QBody::implies(
                    QBody::And(vec![
                        QBody::Leq(surfaced.clone(), SimpleTerm::var(p)),
                        QBody::Leq(rho.clone(), SimpleTerm::var(*m)),
                    ]),
                    (**concl).clone(),
                ),
            },
        });
        QBody::Leq(rho_apply(rho, surfaced), SimpleTerm::var(*m))
    };

    // Flatten the conclusion when both modalities are present.
    let concl2 = flatten_conclusion(concl);
    let out = QuasiInequality {
        prefix: {
            prefix.retain(|(_, v)| *v == *j || *v == *m);
            prefix
        },
        body: QBody::implies(antecedent, concl2),
    };
    steps.push(ChainStep { name: "Ackermann", result: out.clone() });
    Ok((out, steps))
}

fn psi_core(t: &SimpleTerm) -> Option<VarId> {
    match t {
        SimpleTerm::Var(v) => Some(*v),
        SimpleTerm::Box(x) | SimpleTerm::Dia(x) => psi_core(x),
        _ => None,
    }
}

fn modal_depth(t: &SimpleTerm) -> usize {
    match t {
        SimpleTerm::Var(_) | SimpleTerm::Formula(_) => 0,
        SimpleTerm::Box(x) | SimpleTerm::Dia(x) | SimpleTerm::BDia(x) | SimpleTerm::BBox(x) => {
            1 + modal_depth(x)
        }
    }
}

fn rho_apply(rho: &SimpleTerm, with: SimpleTerm) -> SimpleTerm {
    match rho {
        SimpleTerm::Var(_) => with,
        SimpleTerm::Dia(x) => SimpleTerm::dia(rho_apply(x, with)),
        SimpleTerm::Box(x) => SimpleTerm::box_(rho_apply(x, with)),
        other => other.clone().subst(psi_core(other).expect("core"), &with),
    }
}

fn psi_apply(psi: &SimpleTerm, with: SimpleTerm) -> SimpleTerm {
    rho_apply(psi, with)
}

/// Rewrites `<>^k j <= []^l m` (both positive) into `<#>^l <>^k j <= m`.
fn flatten_conclusion(c: &QBody) -> QBody {
    let QBody::Leq(lhs, rhs) = c else { return c.clone() };
    fn boxes(t: &SimpleTerm) -> (usize, &SimpleTerm) {
        match t {
            SimpleTerm::Box(x) => {
                let (n, r) = boxes(x);
                (n + 1, r)
            }
            _ => (0, t),
        }
    }
    let (l, core) = boxes(rhs);
    if l == 0 || matches!(lhs, SimpleTerm::Var(_)) {
        return c.clone();
    }
    // Both sides modal: move the boxes over as black diamonds.
    QBody::Leq(iterate(l, SimpleTerm::bdia, lhs.clone()), core.clone())
}

/// A one-premise structural rule schema: nonparametric structures of the
/// premise and the conclusion, with eigenvariables fresh in the premise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StructuralRule {
    pub premise_ant: Vec<Structure>,
    pub premise_con: Vec<Structure>,
    pub concl_ant: Vec<Structure>,
    pub concl_con: Vec<Structure>,
    pub eigenvars: Vec<VarId>,
}

impl fmt::Display for StructuralRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |ant: &[Structure], con: &[Structure]| {
            let mut parts = vec!["G".to_string()];
            parts.extend(ant.iter().map(|s| s.to_string()));
            let mut cparts: Vec<String> = con.iter().map(|s| s.to_string()).collect();
            cparts.push("D".to_string());
            format!("{} |- {}", parts.join(", "), cparts.join(", "))
        };
        write!(
            f,
            "{}  =>  {}",
            show(&self.premise_ant, &self.premise_con),
            show(&self.concl_ant, &self.concl_con)
        )?;
        if !self.eigenvars.is_empty() {
            let vs: Vec<String> = self.eigenvars.iter().map(|v| v.to_string()).collect();
            write!(f, "   ({} fresh)", vs.join(", "))?;
        }
        Ok(())
    }
}

impl StructuralRule {
    /// Canonical renaming for comparison up to variable indexing.
    pub fn alpha_canonical(&self) -> StructuralRule {
        let seq = |ant: &[Structure], con: &[Structure]| Sequent::new(ant.to_vec(), con.to_vec());
        let all = Sequent::new(
            [self.premise_ant.clone(), self.concl_ant.clone()].concat(),
            [self.premise_con.clone(), self.concl_con.clone()].concat(),
        );
        let mut map = std::collections::BTreeMap::new();
        let mut next_j = 1u32;
        let mut next_m = 0u32;
        for loc in all.locs() {
            for (v, _) in all.get(loc).unwrap().term_vars() {
                map.entry(v).or_insert_with(|| match v.kind {
                    crate::syntax::VarKind::Nominal => {
                        let id = VarId::nom(next_j);
                        next_j += 2;
                        id
                    }
                    crate::syntax::VarKind::Conominal => {
                        let id = VarId::conom(next_m);
                        next_m += 2;
                        id
                    }
                    crate::syntax::VarKind::Prop => v,
                });
            }
        }
        let r = |xs: &[Structure]| xs.iter().map(|s| s.rename(&map)).collect::<Vec<_>>();
        let _ = seq;
        StructuralRule {
            premise_ant: r(&self.premise_ant),
            premise_con: r(&self.premise_con),
            concl_ant: r(&self.concl_ant),
            concl_con: r(&self.concl_con),
            eigenvars: self.eigenvars.iter().map(|v| *map.get(v).unwrap_or(v)).collect(),
        }
    }
}

/// Turns a depth-limited simple term over one variable into an object
/// term of the calculus.
fn to_term(t: &SimpleTerm) -> Result<Term, AlbaError> {
    match t {
        SimpleTerm::Var(v) => match v.kind {
            crate::syntax::VarKind::Nominal => Ok(Term::Nom(*v)),
            crate::syntax::VarKind::Conominal => Ok(Term::CoNom(*v)),
            _ => Err(AlbaError::UnsupportedShape(format!("{} is not a term variable", v))),
        },
        SimpleTerm::Dia(x) => match to_term(x)? {
            Term::Nom(v) => Ok(Term::DiaN(v)),
            other => Err(AlbaError::UnsupportedShape(format!("<> over {}", other))),
        },
        SimpleTerm::BDia(x) => match to_term(x)? {
            Term::Nom(v) => Ok(Term::BDiaN(v)),
            other => Err(AlbaError::UnsupportedShape(format!("<#> over {}", other))),
        },
        SimpleTerm::Box(x) => match to_term(x)? {
            Term::CoNom(v) => Ok(Term::BoxC(v)),
            other => Err(AlbaError::UnsupportedShape(format!("[] over {}", other))),
        },
        SimpleTerm::BBox(x) => match to_term(x)? {
            Term::CoNom(v) => Ok(Term::BBoxC(v)),
            other => Err(AlbaError::UnsupportedShape(format!("[#] over {}", other))),
        },
        SimpleTerm::Formula(f) => Err(AlbaError::UnsupportedShape(format!("formula {}", f))),
    }
}

/// A flat inequality as a pure structure: `X <= m` or `j <= Y`.
fn to_structure(l: &SimpleTerm, r: &SimpleTerm) -> Result<Structure, AlbaError> {
    let lt = to_term(l)?;
    let rt = to_term(r)?;
    Structure::pure(lt, rt).map_err(|e| AlbaError::UnsupportedShape(e.to_string()))
}

/// Breaks a possibly-deep inequality `X <= m` into a pure structure list,
/// introducing one fresh nominal for a depth-two nominal side (the
/// join-generation step read backward).
fn break_ineq(
    l: &SimpleTerm,
    r: &SimpleTerm,
    fresh: &mut crate::syntax::FreshGen,
) -> Result<(Vec<Structure>, Structure, Option<VarId>), AlbaError> {
    if let Ok(s) = to_structure(l, r) {
        return Ok((vec![], s, None));
    }
    // Depth two on the left: f(g(j)) <= m becomes k <= g(j), f(k) <= m.
    let (outer, inner): (fn(SimpleTerm) -> SimpleTerm, &SimpleTerm) = match l {
        SimpleTerm::Dia(x) => (SimpleTerm::dia, x),
        SimpleTerm::BDia(x) => (SimpleTerm::bdia, x),
        _ => {
            return Err(AlbaError::UnsupportedShape(format!("inequality {} <= {}", l, r)));
        }
    };
    let k = fresh.fresh(crate::syntax::VarKind::Nominal);
    let side = to_structure(&SimpleTerm::var(k), inner)?;
    let main = to_structure(&outer(SimpleTerm::var(k)), r)?;
    Ok((vec![side], main, Some(k)))
}

/// Reads a variable-eliminated quasi-inequality as a one-premise
/// structural rule with contexts, re-applying generation to break depth
/// beyond one.
pub fn flatten_and_emit(q: &QuasiInequality) -> Result<StructuralRule, AlbaError> {
    let QBody::Implies(prem, concl) = &q.body else {
        return Err(AlbaError::UnsupportedShape("expected an implication".into()));
    };
    let (QBody::Leq(pl, pr), QBody::Leq(cl, cr)) = (prem.as_ref(), concl.as_ref()) else {
        return Err(AlbaError::UnsupportedShape("expected flat inequalities".into()));
    };
    let mut fresh = crate::syntax::FreshGen::above(
        &q.prefix.iter().map(|(_, v)| *v).collect::<Vec<_>>(),
    );
    let (prem_extra, prem_main, prem_eigen) = break_ineq(pl, pr, &mut fresh)?;
    let (concl_extra, concl_main, _concl_fresh) = break_ineq(cl, cr, &mut fresh)?;
    Ok(StructuralRule {
        premise_ant: prem_extra,
        premise_con: vec![prem_main],
        concl_ant: concl_extra,
        concl_con: vec![concl_main],
        eigenvars: prem_eigen.into_iter().collect(),
    })
}

/// The whole pipeline with the per-step chain for reporting.
pub fn correspond(
    lhs: &Formula,
    rhs: &Formula,
) -> Result<(Vec<ChainStep>, QuasiInequality, StructuralRule), AlbaError> {
    let approx = approximate(lhs, rhs)?;
    let mut chain = vec![ChainStep { name: "approximation", result: approx.clone() }];
    let (elim, steps) = eliminate(&approx)?;
    chain.extend(steps);
    let rule = flatten_and_emit(&elim)?;
    Ok((chain, elim, rule))
}

/// The five labelled rules of the extension table, as structural-rule
/// values for the golden comparison.
pub fn table_rule(ax: crate::calculus::Axiom) -> StructuralRule {
    use crate::calculus::Axiom::*;
    let j = VarId::nom(1);
    let m = VarId::conom(0);
    let k = VarId::nom(3);
    let h = VarId::nom(5);
    let pj = |v: VarId, t: Term| Structure::pure_j(v, t).unwrap();
    let pm = |t: Term, v: VarId| Structure::pure_m(t, v).unwrap();
    match ax {
        Four => StructuralRule {
            premise_ant: vec![],
            premise_con: vec![pm(Term::DiaN(j), m)],
            concl_ant: vec![pj(h, Term::DiaN(j))],
            concl_con: vec![pm(Term::DiaN(h), m)],
            eigenvars: vec![],
        },
        T => StructuralRule {
            premise_ant: vec![],
            premise_con: vec![pj(j, Term::BoxC(m))],
            concl_ant: vec![],
            concl_con: vec![pj(j, Term::CoNom(m))],
            eigenvars: vec![],
        },
        B => StructuralRule {
            premise_ant: vec![],
            premise_con: vec![pm(Term::DiaN(j), m)],
            concl_ant: vec![],
            concl_con: vec![pj(j, Term::BoxC(m))],
            eigenvars: vec![],
        },
        D => StructuralRule {
            premise_ant: vec![pj(k, Term::BDiaN(j))],
            premise_con: vec![pm(Term::DiaN(k), m)],
            concl_ant: vec![],
            concl_con: vec![pj(j, Term::CoNom(m))],
            eigenvars: vec![k],
        },
        C => StructuralRule {
            premise_ant: vec![pj(k, Term::BDiaN(j))],
            premise_con: vec![pm(Term::DiaN(k), m)],
            concl_ant: vec![pj(h, Term::DiaN(j))],
            concl_con: vec![pm(Term::BDiaN(h), m)],
            eigenvars: vec![k],
        },
    }
}

/// The defining inequality of an extension axiom over `p0`.
pub fn axiom_inequality(ax: crate::calculus::Axiom) -> (Formula, Formula) {
    use crate::calculus::Axiom::*;
    let p = Formula::atom(0);
    match ax {
        Four => (Formula::dia(Formula::dia(p.clone())), Formula::dia(p)),
        T => (Formula::box_(p.clone()), p),
        B => (p.clone(), Formula::box_(Formula::dia(p))),
        D => (Formula::box_(p.clone()), Formula::dia(p)),
        C => (
            Formula::dia(Formula::box_(p.clone())),
            Formula::box_(Formula::dia(p)),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::Axiom;
    use crate::syntax::parse_formula;

    fn approx_str(l: &str, r: &str) -> String {
        let q = approximate(&parse_formula(l).unwrap(), &parse_formula(r).unwrap()).unwrap();
        q.to_string()
    }

    fn elim_str(l: &str, r: &str) -> String {
        let q = approximate(&parse_formula(l).unwrap(), &parse_formula(r).unwrap()).unwrap();
        eliminate(&q).unwrap().0.to_string()
    }

    #[test]
    fn approximate_matches_chain_first_lines() {
        assert_eq!(
            approx_str("<><>p0", "<>p0"),
            "Ap0 Aj1 Am0 ((j1 <= p0 & <>p0 <= m0) => <><>j1 <= []m0)".replace("[]m0", "m0")
        );
        assert_eq!(approx_str("[]p0", "p0"), "Ap0 Aj1 Am0 ((j1 <= []p0 & p0 <= m0) => j1 <= m0)");
        assert_eq!(approx_str("p0", "p0"), "Ap0 Aj1 Am0 ((j1 <= p0 & p0 <= m0) => j1 <= m0)");
    }

    #[test]
    fn eliminate_matches_chain_results() {
        assert_eq!(elim_str("<><>p0", "<>p0"), "Aj1 Am0 (<>j1 <= m0 => <><>j1 <= m0)");
        assert_eq!(elim_str("p0", "[]<>p0"), "Aj1 Am0 (<>j1 <= m0 => j1 <= []m0)");
        assert_eq!(elim_str("<>[]p0", "[]<>p0"), "Aj1 Am0 (<><#>j1 <= m0 => <#><>j1 <= m0)");
        assert_eq!(elim_str("[]p0", "p0"), "Aj1 Am0 (j1 <= []m0 => j1 <= m0)");
        assert_eq!(elim_str("[]p0", "<>p0"), "Aj1 Am0 (<><#>j1 <= m0 => j1 <= m0)");
    }

    #[test]
    fn out_of_fragment_reports() {
        let e = approximate(
            &parse_formula("p0&q0").unwrap(),
            &parse_formula("p0").unwrap(),
        )
        .unwrap_err();
        assert!(matches!(e, AlbaError::OutOfFragment(_)));
    }

    #[test]
    fn golden_rules_for_all_five_axioms() {
        for ax in [Axiom::Four, Axiom::T, Axiom::B, Axiom::D, Axiom::C] {
            let (l, r) = axiom_inequality(ax);
            let (_, _, rule) = correspond(&l, &r).unwrap_or_else(|e| panic!("{:?}: {}", ax, e));
            assert_eq!(
                rule.alpha_canonical(),
                table_rule(ax).alpha_canonical(),
                "axiom ({}) expected {} got {}",
                ax,
                table_rule(ax),
                rule
            );
        }
    }
}

#[cfg(test)]
mod chain_preservation {
    use super::*;
    use crate::calculus::Axiom;
    use crate::semantics::{enumerate_models, quasi_valid};

    /// Every rewrite step of the chain preserves validity model by
    /// model: the axiom, the approximation, and each later line agree.
    #[test]
    fn chain_steps_preserve_validity_per_model() {
        let models = enumerate_models(5, 13, 40);
        for ax in [Axiom::Four, Axiom::T, Axiom::B, Axiom::D, Axiom::C] {
            let (l, r) = axiom_inequality(ax);
            let (chain, _, _) = correspond(&l, &r).unwrap();
            for m in &models {
                let direct = m.satisfies_axiom(ax);
                for step in &chain {
                    let v = quasi_valid(m, &step.result).unwrap();
                    assert_eq!(
                        direct, v,
                        "axiom ({}) step {} disagrees on {}",
                        ax, step.name, m.name
                    );
                }
            }
        }
    }
}
