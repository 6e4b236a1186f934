//! The rule system: rule identifiers, configurations, forward application,
//! instance validation, and backward enumeration, with every side
//! condition enforced.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::RuleError;
use crate::syntax::{
    Formula, FreshGen, Loc, Sequent, Side, Structure, Term, VarId, VarKind,
};

/// The five extension axioms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Axiom {
    T,
    Four,
    B,
    D,
    C,
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axiom::T => write!(f, "T"),
            Axiom::Four => write!(f, "4"),
            Axiom::B => write!(f, "B"),
            Axiom::D => write!(f, "D"),
            Axiom::C => write!(f, "C"),
        }
    }
}

impl std::str::FromStr for Axiom {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "T" => Ok(Axiom::T),
            "4" => Ok(Axiom::Four),
            "B" => Ok(Axiom::B),
            "D" => Ok(Axiom::D),
            "C" => Ok(Axiom::C),
            _ => Err(format!("unknown axiom `{}` (expected one of T,4,B,D,C)", s)),
        }
    }
}

/// Rule mode: strict proofs with empty-context axioms, or the invertible
/// variants used for backward search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Mode {
    #[default]
    NonInvertible,
    Invertible,
}

/// Calculus configuration.
#[derive(Debug, Clone, Default)]
pub struct CalcConfig {
    pub sigma: BTreeSet<Axiom>,
    pub mode: Mode,
    /// Drops the freshness condition on the conclusion of switch rules,
    /// keeping the one on the premise. Experimental.
    pub relaxed_switch: bool,
}

impl CalcConfig {
    pub fn with_sigma(axioms: &[Axiom]) -> CalcConfig {
        CalcConfig { sigma: axioms.iter().copied().collect(), ..Default::default() }
    }

    pub fn invertible(mut self) -> CalcConfig {
        self.mode = Mode::Invertible;
        self
    }
}

macro_rules! rule_ids {
    ($($variant:ident => $name:literal),+ $(,)?) => {
        /// Identifier of a rule of the calculus. The string forms are
        /// stable and used in derivation files and CLI output.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        pub enum RuleId {
            $($variant),+
        }

        impl RuleId {
            pub const ALL: &'static [RuleId] = &[$(RuleId::$variant),+];

            pub fn name(self) -> &'static str {
                match self {
                    $(RuleId::$variant => $name),+
                }
            }
        }

        impl std::str::FromStr for RuleId {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($name => Ok(RuleId::$variant),)+
                    _ => Err(format!("unknown rule `{}`", s)),
                }
            }
        }
    };
}

rule_ids! {
    IdJp => "Id_jp",
    IdPm => "Id_pm",
    IdBot => "Id_Bot",
    IdTop => "Id_Top",
    BotJ => "Bot_j",
    BotM => "Bot_m",
    TopM => "Top_m",
    TopJ => "Top_j",
    CutJ => "Cut_j",
    CutM => "Cut_m",
    SM => "S_m",
    SJ => "S_j",
    SMm => "S_mm",
    SJj => "S_jj",
    SMT => "S_mT",
    SJT => "S_jT",
    STm => "S_Tm",
    STj => "S_Tj",
    STTm => "S_TTm",
    SJTT => "S_jTT",
    AdjDiaBb => "Adj_DiaBb",
    AdjDiaBbInv => "Adj_DiaBb_inv",
    AdjBdBox => "Adj_BdBox",
    AdjBdBoxInv => "Adj_BdBox_inv",
    TopBox => "TopBox",
    BotDia => "BotDia",
    AndP => "And_P",
    AndS => "And_S",
    OrP => "Or_P",
    OrS => "Or_S",
    BoxP => "Box_P",
    BoxS => "Box_S",
    DiaP => "Dia_P",
    DiaS => "Dia_S",
    Ax4 => "Ax4",
    AxT => "AxT",
    AxB => "AxB",
    AxD => "AxD",
    AxC => "AxC",
    AndPInv => "And_P_inv",
    OrSInv => "Or_S_inv",
    BoxPInv => "Box_P_inv",
    DiaSInv => "Dia_S_inv",
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

impl RuleId {
    pub fn arity(self) -> usize {
        use RuleId::*;
        match self {
            IdJp | IdPm | IdBot | IdTop | BotJ | BotM | TopM | TopJ => 0,
            CutJ | CutM | AndS | OrP => 2,
            _ => 1,
        }
    }

    pub fn sigma_requirement(self) -> Option<Axiom> {
        match self {
            RuleId::Ax4 => Some(Axiom::Four),
            RuleId::AxT => Some(Axiom::T),
            RuleId::AxB => Some(Axiom::B),
            RuleId::AxD => Some(Axiom::D),
            RuleId::AxC => Some(Axiom::C),
            _ => None,
        }
    }

    pub fn is_switch(self) -> bool {
        use RuleId::*;
        matches!(self, SM | SJ | SMm | SJj | SMT | SJT | STm | STj | STTm | SJTT)
    }

    pub fn is_adjunction(self) -> bool {
        use RuleId::*;
        matches!(self, AdjDiaBb | AdjDiaBbInv | AdjBdBox | AdjBdBoxInv)
    }

    pub fn is_cut(self) -> bool {
        matches!(self, RuleId::CutJ | RuleId::CutM)
    }

    pub fn is_initial(self) -> bool {
        self.arity() == 0
    }

    pub fn is_clockwise_switch(self) -> bool {
        use RuleId::*;
        matches!(self, SMm | SMT | STm | STTm | SM)
    }

    pub fn is_anticlockwise_switch(self) -> bool {
        use RuleId::*;
        matches!(self, SJj | SJT | STj | SJTT | SJ)
    }

    /// Rules whose principal introduction makes a labelled formula
    /// j-labelled.
    pub fn introduces_j_labelled(self) -> bool {
        use RuleId::*;
        matches!(self, IdJp | IdTop | BotJ | TopJ | AndP | AndPInv | AndS | BoxP | BoxPInv | BoxS)
    }

    /// Rules whose principal introduction makes a labelled formula
    /// m-labelled.
    pub fn introduces_m_labelled(self) -> bool {
        use RuleId::*;
        matches!(self, IdPm | IdBot | BotM | TopM | OrP | OrS | OrSInv | DiaP | DiaS | DiaSInv)
    }

    /// Availability under a mode: invertible mode swaps the four
    /// non-invertible logical rules for their invertible variants.
    pub fn available_in(self, mode: Mode) -> bool {
        use RuleId::*;
        match mode {
            Mode::NonInvertible => !matches!(self, AndPInv | OrSInv | BoxPInv | DiaSInv),
            Mode::Invertible => !matches!(self, AndP | OrS | BoxP | DiaS),
        }
    }
}

/// Metavariable bindings of a rule instance.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Bindings {
    pub formulas: BTreeMap<char, Formula>,
    pub terms: BTreeMap<char, Term>,
    pub vars: BTreeMap<char, VarId>,
    /// Which conjunct/disjunct a one-sided `And_P`/`Or_S` used.
    pub index: Option<u8>,
    /// Context for invertible-mode initial rules, which carry one.
    pub ctx: Option<(Vec<Structure>, Vec<Structure>)>,
}

impl Bindings {
    pub fn new() -> Bindings {
        Bindings::default()
    }
    pub fn f(mut self, k: char, v: Formula) -> Self {
        self.formulas.insert(k, v);
        self
    }
    pub fn t(mut self, k: char, v: Term) -> Self {
        self.terms.insert(k, v);
        self
    }
    pub fn v(mut self, k: char, v: VarId) -> Self {
        self.vars.insert(k, v);
        self
    }
    pub fn i(mut self, i: u8) -> Self {
        self.index = Some(i);
        self
    }

    fn formula(&self, k: char, rule: RuleId) -> Result<Formula, RuleError> {
        self.formulas.get(&k).cloned().ok_or_else(|| RuleError::SchemaMismatch {
            rule: rule.name().into(),
            msg: format!("missing formula binding `{}`", k),
        })
    }
    fn term(&self, k: char, rule: RuleId) -> Result<Term, RuleError> {
        self.terms.get(&k).copied().ok_or_else(|| RuleError::SchemaMismatch {
            rule: rule.name().into(),
            msg: format!("missing term binding `{}`", k),
        })
    }
    fn var(&self, k: char, kind: VarKind, rule: RuleId) -> Result<VarId, RuleError> {
        let v = self.vars.get(&k).copied().ok_or_else(|| RuleError::SchemaMismatch {
            rule: rule.name().into(),
            msg: format!("missing variable binding `{}`", k),
        })?;
        if v.kind != kind {
            return Err(RuleError::SchemaMismatch {
                rule: rule.name().into(),
                msg: format!("binding `{}` = {} has the wrong kind", k, v),
            });
        }
        Ok(v)
    }
}

/// Where the nonparametric structures of the conclusion sit relative to
/// the contexts.
#[derive(Debug, Clone, Default)]
struct ConclShape {
    ant_front: Vec<Structure>,
    ant_back: Vec<Structure>,
    con_front: Vec<Structure>,
    con_back: Vec<Structure>,
}

/// Nonparametric structures expected in one premise.
#[derive(Debug, Clone, Default)]
struct PremShape {
    ant: Vec<Structure>,
    con: Vec<Structure>,
}

#[derive(Debug, Clone, Default)]
struct Shape {
    premises: Vec<PremShape>,
    concl: ConclShape,
    /// Variables that must not occur in the contexts (freshness).
    fresh_in_ctx: Vec<(VarId, &'static str)>,
    /// Variables that must not occur in the conclusion at all.
    absent_in_concl: Vec<(VarId, &'static str)>,
    /// Structures that must be in display in the conclusion.
    display_in_concl: Vec<Structure>,
    /// (premise index, structure) pairs that must be in display there.
    display_in_prem: Vec<(usize, Structure)>,
    /// Structures that must occur among premise 0's context (invertible
    /// variants keep their principal in the context).
    require_in_ctx: Vec<(Side, Structure)>,
    /// Switch congruence: conclusion np index -> (premise, premise np index),
    /// indices into the flattened np lists (ant then con).
    switch_edges: Vec<(usize, usize)>,
}

/// A validated rule application.
#[derive(Debug, Clone)]
pub struct RuleInstance {
    pub rule: RuleId,
    pub premises: Vec<Sequent>,
    pub conclusion: Sequent,
    pub bindings: Bindings,
    /// Locators of nonparametric occurrences in the conclusion.
    pub np_concl: Vec<Loc>,
    /// Locators of nonparametric occurrences per premise.
    pub np_prem: Vec<Vec<Loc>>,
    /// Parameter flow: conclusion occurrence -> congruent premise
    /// occurrences.
    pub param_map: Vec<(Loc, Vec<(usize, Loc)>)>,
    /// Switch (and adjunction) congruence between nonparametric
    /// occurrences: conclusion -> premise.
    pub switch_map: Vec<(Loc, (usize, Loc))>,
}

impl RuleInstance {
    /// Premise occurrences congruent to the conclusion occurrence `loc`.
    pub fn parents_of(&self, loc: Loc) -> Vec<(usize, Loc)> {
        let mut out = Vec::new();
        for (l, ps) in &self.param_map {
            if *l == loc {
                out.extend(ps.iter().copied());
            }
        }
        for (l, p) in &self.switch_map {
            if *l == loc {
                out.push(*p);
            }
        }
        out
    }
}

/// Is the structure at `loc` in display in `seq`: its approximant must be
/// an approximant in every structure of the sequent where it occurs.
pub fn in_display(seq: &Sequent, loc: Loc) -> bool {
    let Some(s) = seq.get(loc) else { return false };
    var_in_display(seq, s.approximant())
}

/// Is `v` in display in the sequent: every occurrence of `v` is an
/// approximant occurrence.
pub fn var_in_display(seq: &Sequent, v: VarId) -> bool {
    seq.locs().iter().all(|&l| {
        self_or_true(seq.get(l).unwrap(), v)
    })
}

fn self_or_true(s: &Structure, v: VarId) -> bool {
    s.term_vars().iter().all(|&(w, approx)| w != v || approx)
}

fn ctx_vars(ant: &[Structure], con: &[Structure]) -> Vec<VarId> {
    let mut out = Vec::new();
    for s in ant.iter().chain(con.iter()) {
        for (v, _) in s.term_vars() {
            if !out.contains(&v) {
                out.push(v);
            }
        }
    }
    out
}

fn restricted_j(a: &Formula) -> bool {
    matches!(a, Formula::Atom(_) | Formula::And(_, _) | Formula::Box_(_))
}

fn restricted_m(b: &Formula) -> bool {
    matches!(b, Formula::Atom(_) | Formula::Or(_, _) | Formula::Dia(_))
}

fn mismatch(rule: RuleId, msg: impl Into<String>) -> RuleError {
    RuleError::SchemaMismatch { rule: rule.name().into(), msg: msg.into() }
}

/// Builds the schema of `rule` under `bindings`.
fn shape(cfg: &CalcConfig, rule: RuleId, b: &Bindings) -> Result<Shape, RuleError> {
    use RuleId::*;
    let mut sh = Shape::default();
    let strict = |sh: &mut Shape, v: VarId, what: &'static str| {
        sh.fresh_in_ctx.push((v, what));
    };
    match rule {
        IdJp => {
            let j = b.var('j', VarKind::Nominal, rule)?;
            let a = b.formula('A', rule)?;
            if !matches!(a, Formula::Atom(_)) {
                return Err(mismatch(rule, "Id_jp requires an atomic formula"));
            }
            let s = Structure::LabJ(j, a);
            sh.concl.ant_front.push(s.clone());
            sh.concl.con_front.push(s);
        }
        IdPm => {
            let m = b.var('m', VarKind::Conominal, rule)?;
            let a = b.formula('A', rule)?;
            if !matches!(a, Formula::Atom(_)) {
                return Err(mismatch(rule, "Id_pm requires an atomic formula"));
            }
            let s = Structure::LabM(a, m);
            sh.concl.ant_front.push(s.clone());
            sh.concl.con_front.push(s);
        }
        IdBot => {
            let m = b.var('m', VarKind::Conominal, rule)?;
            let s = Structure::LabM(Formula::Bot, m);
            sh.concl.ant_front.push(s.clone());
            sh.concl.con_front.push(s);
        }
        IdTop => {
            let j = b.var('j', VarKind::Nominal, rule)?;
            let s = Structure::LabJ(j, Formula::Top);
            sh.concl.ant_front.push(s.clone());
            sh.concl.con_front.push(s);
        }
        BotJ => {
            let j = b.var('j', VarKind::Nominal, rule)?;
            let a = b.formula('A', rule)?;
            if !restricted_j(&a) {
                return Err(mismatch(rule, "Bot_j requires A in {p, A&B, []A}"));
            }
            sh.concl.ant_front.push(Structure::LabJ(j, Formula::Bot));
            sh.concl.con_front.push(Structure::LabJ(j, a));
        }
        TopJ => {
            let j = b.var('j', VarKind::Nominal, rule)?;
            let a = b.formula('A', rule)?;
            if !restricted_j(&a) {
                return Err(mismatch(rule, "Top_j requires A in {p, A&B, []A}"));
            }
            sh.concl.ant_front.push(Structure::LabJ(j, a));
            sh.concl.con_front.push(Structure::LabJ(j, Formula::Top));
        }
        BotM => {
            let m = b.var('m', VarKind::Conominal, rule)?;
            let a = b.formula('B', rule)?;
            if !restricted_m(&a) {
                return Err(mismatch(rule, "Bot_m requires B in {p, A|B, <>A}"));
            }
            sh.concl.ant_front.push(Structure::LabM(a, m));
            sh.concl.con_front.push(Structure::LabM(Formula::Bot, m));
        }
        TopM => {
            let m = b.var('m', VarKind::Conominal, rule)?;
            let a = b.formula('B', rule)?;
            if !restricted_m(&a) {
                return Err(mismatch(rule, "Top_m requires B in {p, A|B, <>A}"));
            }
            sh.concl.ant_front.push(Structure::LabM(Formula::Top, m));
            sh.concl.con_front.push(Structure::LabM(a, m));
        }
        CutJ => {
            let j = b.var('j', VarKind::Nominal, rule)?;
            let a = b.formula('A', rule)?;
            let cutf = Structure::LabJ(j, a);
            sh.premises.push(PremShape { ant: vec![], con: vec![cutf.clone()] });
            sh.premises.push(PremShape { ant: vec![cutf.clone()], con: vec![] });
            sh.display_in_prem.push((0, cutf.clone()));
            sh.display_in_prem.push((1, cutf));
        }
        CutM => {
            let m = b.var('m', VarKind::Conominal, rule)?;
            let a = b.formula('A', rule)?;
            let cutf = Structure::LabM(a, m);
            sh.premises.push(PremShape { ant: vec![], con: vec![cutf.clone()] });
            sh.premises.push(PremShape { ant: vec![cutf.clone()], con: vec![] });
            sh.display_in_prem.push((0, cutf.clone()));
            sh.display_in_prem.push((1, cutf));
        }
        SM => {
            let j = b.var('j', VarKind::Nominal, rule)?;
            let m = b.var('m', VarKind::Conominal, rule)?;
            let a = b.formula('A', rule)?;
            sh.premises.push(PremShape {
                ant: vec![Structure::LabJ(j, a.clone())],
                con: vec![Structure::pure_j(j, Term::CoNom(m))?],
            });
            sh.concl.con_front.push(Structure::LabM(a, m));
            sh.absent_in_concl.push((j, "must not appear in the conclusion of S_m"));
            sh.switch_edges.push((0, 0));
        }
        SJ => {
            let j = b.var('j', VarKind::Nominal, rule)?;
            let m = b.var('m', VarKind::Conominal, rule)?;
            let a = b.formula('A', rule)?;
            sh.premises.push(PremShape {
                ant: vec![Structure::LabM(a.clone(), m)],
                con: vec![Structure::pure_j(j, Term::CoNom(m))?],
            });
            sh.concl.con_front.push(Structure::LabJ(j, a));
            sh.absent_in_concl.push((m, "must not appear in the conclusion of S_j"));
            sh.switch_edges.push((0, 0));
        }
        SMm | SMT | STm | STTm => {
            let j = b.var('j', VarKind::Nominal, rule)?;
            let m = b.var('m', VarKind::Conominal, rule)?;
            let (p_ant, p_con, c_ant, c_con): (Structure, Structure, Structure, Structure) = match rule {
                SMm => {
                    let a = b.formula('A', rule)?;
                    let bb = b.formula('B', rule)?;
                    (
                        Structure::LabJ(j, a.clone()),
                        Structure::LabJ(j, bb.clone()),
                        Structure::LabM(bb, m),
                        Structure::LabM(a, m),
                    )
                }
                SMT => {
                    let a = b.formula('A', rule)?;
                    let t = b.term('T', rule)?;
                    (
                        Structure::pure_j(j, t)?,
                        Structure::LabJ(j, a.clone()),
                        Structure::LabM(a, m),
                        Structure::pure_m(t, m)?,
                    )
                }
                STm => {
                    let a = b.formula('A', rule)?;
                    let t = b.term('T', rule)?;
                    (
                        Structure::LabJ(j, a.clone()),
                        Structure::pure_j(j, t)?,
                        Structure::pure_m(t, m)?,
                        Structure::LabM(a, m),
                    )
                }
                STTm => {
                    let t = b.term('T', rule)?;
                    let u = b.term('U', rule)?;
                    (
                        Structure::pure_j(j, u)?,
                        Structure::pure_j(j, t)?,
                        Structure::pure_m(t, m)?,
                        Structure::pure_m(u, m)?,
                    )
                }
                _ => unreachable!(),
            };
            sh.premises.push(PremShape { ant: vec![p_ant], con: vec![p_con] });
            sh.concl.ant_back.push(c_ant);
            sh.concl.con_front.push(c_con);
            strict(&mut sh, j, "premise-side switch variable");
            if !cfg.relaxed_switch {
                strict(&mut sh, m, "conclusion-side switch variable");
            }
            // premise ant pairs with conclusion con, premise con with
            // conclusion ant
            sh.switch_edges.push((1, 0));
            sh.switch_edges.push((0, 1));
        }
        SJj | SJT | STj | SJTT => {
            let j = b.var('j', VarKind::Nominal, rule)?;
            let m = b.var('m', VarKind::Conominal, rule)?;
            let (p_ant, p_con, c_ant, c_con): (Structure, Structure, Structure, Structure) = match rule {
                SJj => {
                    let a = b.formula('A', rule)?;
                    let bb = b.formula('B', rule)?;
                    (
                        Structure::LabM(a.clone(), m),
                        Structure::LabM(bb.clone(), m),
                        Structure::LabJ(j, bb),
                        Structure::LabJ(j, a),
                    )
                }
                SJT => {
                    let a = b.formula('A', rule)?;
                    let t = b.term('T', rule)?;
                    (
                        Structure::pure_m(t, m)?,
                        Structure::LabM(a.clone(), m),
                        Structure::LabJ(j, a),
                        Structure::pure_j(j, t)?,
                    )
                }
                STj => {
                    let a = b.formula('A', rule)?;
                    let t = b.term('T', rule)?;
                    (
                        Structure::LabM(a.clone(), m),
                        Structure::pure_m(t, m)?,
                        Structure::pure_j(j, t)?,
                        Structure::LabJ(j, a),
                    )
                }
                SJTT => {
                    let t = b.term('T', rule)?;
                    let u = b.term('U', rule)?;
                    (
                        Structure::pure_m(u, m)?,
                        Structure::pure_m(t, m)?,
                        Structure::pure_j(j, t)?,
                        Structure::pure_j(j, u)?,
                    )
                }
                _ => unreachable!(),
            };
            sh.premises.push(PremShape { ant: vec![p_ant], con: vec![p_con] });
            // Anticlockwise switches prepend the new antecedent structure.
            sh.concl.ant_front.push(c_ant);
            sh.concl.con_front.push(c_con);
            strict(&mut sh, m, "premise-side switch variable");
            if !cfg.relaxed_switch {
                strict(&mut sh, j, "conclusion-side switch variable");
            }
            sh.switch_edges.push((1, 0));
            sh.switch_edges.push((0, 1));
        }
        AdjDiaBb => {
            let j = b.var('j', VarKind::Nominal, rule)?;
            let m = b.var('m', VarKind::Conominal, rule)?;
            sh.premises.push(PremShape { ant: vec![], con: vec![Structure::pure_m(Term::DiaN(j), m)?] });
            sh.concl.con_front.push(Structure::pure_j(j, Term::BBoxC(m))?);
            sh.switch_edges.push((0, 0));
        }
        AdjDiaBbInv => {
            let j = b.var('j', VarKind::Nominal, rule)?;
            let m = b.var('m', VarKind::Conominal, rule)?;
            sh.premises.push(PremShape { ant: vec![], con: vec![Structure::pure_j(j, Term::BBoxC(m))?] });
            sh.concl.con_front.push(Structure::pure_m(Term::DiaN(j), m)?);
            sh.switch_edges.push((0, 0));
        }
        AdjBdBox => {
            let j = b.var('j', VarKind::Nominal, rule)?;
            let m = b.var('m', VarKind::Conominal, rule)?;
            sh.premises.push(PremShape { ant: vec![], con: vec![Structure::pure_j(j, Term::BoxC(m))?] });
            sh.concl.con_front.push(Structure::pure_m(Term::BDiaN(j), m)?);
            sh.switch_edges.push((0, 0));
        }
        AdjBdBoxInv => {
            let j = b.var('j', VarKind::Nominal, rule)?;
            let m = b.var('m', VarKind::Conominal, rule)?;
            sh.premises.push(PremShape { ant: vec![], con: vec![Structure::pure_m(Term::BDiaN(j), m)?] });
            sh.concl.con_front.push(Structure::pure_j(j, Term::BoxC(m))?);
            sh.switch_edges.push((0, 0));
        }
        TopBox => {
            let j = b.var('j', VarKind::Nominal, rule)?;
            let m = b.var('m', VarKind::Conominal, rule)?;
            sh.premises.push(PremShape { ant: vec![], con: vec![Structure::LabM(Formula::Top, m)] });
            sh.concl.ant_front.push(Structure::LabJ(j, Formula::Top));
            sh.concl.con_front.push(Structure::pure_j(j, Term::BoxC(m))?);
            strict(&mut sh, j, "nominal introduced by TopBox");
        }
        BotDia => {
            let j = b.var('j', VarKind::Nominal, rule)?;
            let m = b.var('m', VarKind::Conominal, rule)?;
            sh.premises.push(PremShape { ant: vec![], con: vec![Structure::LabJ(j, Formula::Bot)] });
            sh.concl.ant_back.push(Structure::LabM(Formula::Bot, m));
            sh.concl.con_front.push(Structure::pure_m(Term::DiaN(j), m)?);
            strict(&mut sh, m, "conominal introduced by BotDia");
        }
        AndP => {
            let j = b.var('j', VarKind::Nominal, rule)?;
            let a = b.formula('A', rule)?;
            let bb = b.formula('B', rule)?;
            let i = b.index.ok_or_else(|| mismatch(rule, "And_P needs index 1 or 2"))?;
            let ai = match i {
                1 => a.clone(),
                2 => bb.clone(),
                _ => return Err(mismatch(rule, "index must be 1 or 2")),
            };
            sh.premises.push(PremShape { ant: vec![Structure::LabJ(j, ai)], con: vec![] });
            let principal = Structure::LabJ(j, Formula::and(a, bb));
            sh.concl.ant_front.push(principal.clone());
            sh.display_in_concl.push(principal);
        }
        AndPInv => {
            let j = b.var('j', VarKind::Nominal, rule)?;
            let a = b.formula('A', rule)?;
            let bb = b.formula('B', rule)?;
            sh.premises.push(PremShape {
                ant: vec![Structure::LabJ(j, a.clone()), Structure::LabJ(j, bb.clone())],
                con: vec![],
            });
            let principal = Structure::LabJ(j, Formula::and(a, bb));
            sh.concl.ant_front.push(principal.clone());
            sh.display_in_concl.push(principal);
        }
        AndS => {
            let j = b.var('j', VarKind::Nominal, rule)?;
            let a = b.formula('A', rule)?;
            let bb = b.formula('B', rule)?;
            sh.premises.push(PremShape { ant: vec![], con: vec![Structure::LabJ(j, a.clone())] });
            sh.premises.push(PremShape { ant: vec![], con: vec![Structure::LabJ(j, bb.clone())] });
            let principal = Structure::LabJ(j, Formula::and(a, bb));
            sh.concl.con_back.push(principal.clone());
            sh.display_in_concl.push(principal);
        }
        OrP => {
            let m = b.var('m', VarKind::Conominal, rule)?;
            let a = b.formula('A', rule)?;
            let bb = b.formula('B', rule)?;
            sh.premises.push(PremShape { ant: vec![], con: vec![Structure::LabM(a.clone(), m)] });
            sh.premises.push(PremShape { ant: vec![], con: vec![Structure::LabM(bb.clone(), m)] });
            let principal = Structure::LabM(Formula::or(a, bb), m);
            sh.concl.con_front.push(principal.clone());
            sh.display_in_concl.push(principal);
        }
        OrS => {
            let m = b.var('m', VarKind::Conominal, rule)?;
            let a = b.formula('A', rule)?;
            let bb = b.formula('B', rule)?;
            let i = b.index.ok_or_else(|| mismatch(rule, "Or_S needs index 1 or 2"))?;
            let ai = match i {
                1 => a.clone(),
                2 => bb.clone(),
                _ => return Err(mismatch(rule, "index must be 1 or 2")),
            };
            sh.premises.push(PremShape { ant: vec![Structure::LabM(ai, m)], con: vec![] });
            let principal = Structure::LabM(Formula::or(a, bb), m);
            sh.concl.ant_back.push(principal.clone());
            sh.display_in_concl.push(principal);
        }
        OrSInv => {
            let m = b.var('m', VarKind::Conominal, rule)?;
            let a = b.formula('A', rule)?;
            let bb = b.formula('B', rule)?;
            sh.premises.push(PremShape {
                ant: vec![Structure::LabM(a.clone(), m), Structure::LabM(bb.clone(), m)],
                con: vec![],
            });
            let principal = Structure::LabM(Formula::or(a, bb), m);
            sh.concl.ant_back.push(principal.clone());
            sh.display_in_concl.push(principal);
        }
        BoxP => {
            let j = b.var('j', VarKind::Nominal, rule)?;
            let m = b.var('m', VarKind::Conominal, rule)?;
            let a = b.formula('A', rule)?;
            sh.premises.push(PremShape { ant: vec![], con: vec![Structure::LabM(a.clone(), m)] });
            let principal = Structure::LabJ(j, Formula::box_(a));
            sh.concl.ant_front.push(principal.clone());
            sh.concl.con_back.push(Structure::pure_j(j, Term::BoxC(m))?);
            sh.display_in_concl.push(principal);
            strict(&mut sh, j, "nominal introduced by Box_P");
        }
        BoxPInv => {
            let j = b.var('j', VarKind::Nominal, rule)?;
            let m = b.var('m', VarKind::Conominal, rule)?;
            let a = b.formula('A', rule)?;
            sh.premises.push(PremShape { ant: vec![], con: vec![Structure::LabM(a.clone(), m)] });
            let principal = Structure::LabJ(j, Formula::box_(a));
            sh.require_in_ctx.push((Side::Ant, principal.clone()));
            sh.require_in_ctx.push((Side::Con, Structure::pure_j(j, Term::BoxC(m))?));
            sh.display_in_concl.push(principal);
        }
        BoxS => {
            let j = b.var('j', VarKind::Nominal, rule)?;
            let m = b.var('m', VarKind::Conominal, rule)?;
            let a = b.formula('A', rule)?;
            sh.premises.push(PremShape {
                ant: vec![Structure::LabM(a.clone(), m)],
                con: vec![Structure::pure_j(j, Term::BoxC(m))?],
            });
            let principal = Structure::LabJ(j, Formula::box_(a));
            sh.concl.con_front.push(principal.clone());
            sh.absent_in_concl.push((m, "must not occur in the conclusion of Box_S"));
            sh.display_in_concl.push(principal);
        }
        DiaP => {
            let j = b.var('j', VarKind::Nominal, rule)?;
            let m = b.var('m', VarKind::Conominal, rule)?;
            let a = b.formula('A', rule)?;
            sh.premises.push(PremShape {
                ant: vec![Structure::LabJ(j, a.clone())],
                con: vec![Structure::pure_m(Term::DiaN(j), m)?],
            });
            let principal = Structure::LabM(Formula::dia(a), m);
            sh.concl.con_back.push(principal.clone());
            sh.absent_in_concl.push((j, "must not occur in the conclusion of Dia_P"));
            sh.display_in_concl.push(principal);
        }
        DiaS => {
            let j = b.var('j', VarKind::Nominal, rule)?;
            let m = b.var('m', VarKind::Conominal, rule)?;
            let a = b.formula('A', rule)?;
            sh.premises.push(PremShape { ant: vec![], con: vec![Structure::LabJ(j, a.clone())] });
            let principal = Structure::LabM(Formula::dia(a), m);
            sh.concl.ant_back.push(principal.clone());
            sh.concl.con_front.push(Structure::pure_m(Term::DiaN(j), m)?);
            sh.display_in_concl.push(principal);
            strict(&mut sh, m, "conominal introduced by Dia_S");
        }
        DiaSInv => {
            let j = b.var('j', VarKind::Nominal, rule)?;
            let m = b.var('m', VarKind::Conominal, rule)?;
            let a = b.formula('A', rule)?;
            sh.premises.push(PremShape { ant: vec![], con: vec![Structure::LabJ(j, a.clone())] });
            let principal = Structure::LabM(Formula::dia(a), m);
            sh.require_in_ctx.push((Side::Ant, principal.clone()));
            sh.require_in_ctx.push((Side::Con, Structure::pure_m(Term::DiaN(j), m)?));
            sh.display_in_concl.push(principal);
        }
        Ax4 => {
            let j = b.var('j', VarKind::Nominal, rule)?;
            let m = b.var('m', VarKind::Conominal, rule)?;
            let h = b.var('h', VarKind::Nominal, rule)?;
            sh.premises.push(PremShape { ant: vec![], con: vec![Structure::pure_m(Term::DiaN(j), m)?] });
            sh.concl.ant_back.push(Structure::pure_j(h, Term::DiaN(j))?);
            sh.concl.con_front.push(Structure::pure_m(Term::DiaN(h), m)?);
            strict(&mut sh, h, "nominal introduced by rule 4");
        }
        AxT => {
            let j = b.var('j', VarKind::Nominal, rule)?;
            let m = b.var('m', VarKind::Conominal, rule)?;
            sh.premises.push(PremShape { ant: vec![], con: vec![Structure::pure_j(j, Term::BoxC(m))?] });
            sh.concl.con_front.push(Structure::pure_j(j, Term::CoNom(m))?);
        }
        AxB => {
            let j = b.var('j', VarKind::Nominal, rule)?;
            let m = b.var('m', VarKind::Conominal, rule)?;
            sh.premises.push(PremShape { ant: vec![], con: vec![Structure::pure_m(Term::DiaN(j), m)?] });
            sh.concl.con_front.push(Structure::pure_j(j, Term::BoxC(m))?);
        }
        AxD => {
            let j = b.var('j', VarKind::Nominal, rule)?;
            let m = b.var('m', VarKind::Conominal, rule)?;
            let k = b.var('k', VarKind::Nominal, rule)?;
            sh.premises.push(PremShape {
                ant: vec![Structure::pure_j(k, Term::BDiaN(j))?],
                con: vec![Structure::pure_m(Term::DiaN(k), m)?],
            });
            sh.concl.con_front.push(Structure::pure_j(j, Term::CoNom(m))?);
            strict(&mut sh, k, "eigenvariable of rule D");
        }
        AxC => {
            let j = b.var('j', VarKind::Nominal, rule)?;
            let m = b.var('m', VarKind::Conominal, rule)?;
            let k = b.var('k', VarKind::Nominal, rule)?;
            let h = b.var('h', VarKind::Nominal, rule)?;
            sh.premises.push(PremShape {
                ant: vec![Structure::pure_j(k, Term::BDiaN(j))?],
                con: vec![Structure::pure_m(Term::DiaN(k), m)?],
            });
            sh.concl.ant_back.push(Structure::pure_j(h, Term::DiaN(j))?);
            sh.concl.con_front.push(Structure::pure_m(Term::BDiaN(h), m)?);
            strict(&mut sh, k, "eigenvariable of rule C");
            strict(&mut sh, h, "nominal introduced by rule C");
        }
    }
    Ok(sh)
}

/// Locate and remove the nonparametric structures from a premise,
/// returning their locators and the residual context.
fn split_premise(
    rule: RuleId,
    prem: &Sequent,
    want: &PremShape,
) -> Result<(Vec<Loc>, Vec<Structure>, Vec<Structure>), RuleError> {
    let take = |side: &[Structure], want: &[Structure], mk: fn(usize) -> Loc| {
        let mut used = vec![false; side.len()];
        let mut locs = Vec::new();
        for w in want {
            let mut found = None;
            for (i, s) in side.iter().enumerate() {
                if !used[i] && s == w {
                    found = Some(i);
                    break;
                }
            }
            match found {
                Some(i) => {
                    used[i] = true;
                    locs.push(mk(i));
                }
                None => return Err(format!("premise lacks `{}`", w)),
            }
        }
        let ctx: Vec<Structure> =
            side.iter().enumerate().filter(|(i, _)| !used[*i]).map(|(_, s)| s.clone()).collect();
        Ok((locs, ctx))
    };
    let (ant_locs, ant_ctx) =
        take(&prem.ant, &want.ant, Loc::ant).map_err(|m| mismatch(rule, m))?;
    let (con_locs, con_ctx) =
        take(&prem.con, &want.con, Loc::con).map_err(|m| mismatch(rule, m))?;
    let mut locs = ant_locs;
    locs.extend(con_locs);
    Ok((locs, ant_ctx, con_ctx))
}

/// Applies `rule` to `premises` under `bindings`, validating every side
/// condition, and returns the instance with its conclusion computed and
/// nonparametric occurrences marked.
pub fn apply(
    cfg: &CalcConfig,
    rule: RuleId,
    premises: &[Sequent],
    bindings: &Bindings,
) -> Result<RuleInstance, RuleError> {
    if let Some(ax) = rule.sigma_requirement() {
        if !cfg.sigma.contains(&ax) {
            return Err(RuleError::SigmaDisabled { rule: rule.name().into(), axiom: ax.to_string() });
        }
    }
    let sh = shape(cfg, rule, bindings)?;
    if premises.len() != rule.arity() {
        return Err(mismatch(rule, format!("expected {} premise(s), got {}", rule.arity(), premises.len())));
    }

    // Split each premise into nonparametric occurrences and context.
    let mut np_prem = Vec::new();
    let mut ctxs: Vec<(Vec<Structure>, Vec<Structure>)> = Vec::new();
    for (i, prem) in premises.iter().enumerate() {
        let (locs, ant_ctx, con_ctx) = split_premise(rule, prem, &sh.premises[i])?;
        np_prem.push(locs);
        ctxs.push((ant_ctx, con_ctx));
    }

    // Contexts of initial rules come from the bindings (invertible mode)
    // or are empty (strict mode).
    let (ctx_ant, ctx_con): (Vec<Structure>, Vec<Structure>) = if rule.arity() == 0 {
        match (&bindings.ctx, cfg.mode) {
            (Some((a, c)), Mode::Invertible) => (a.clone(), c.clone()),
            (Some((a, c)), Mode::NonInvertible) if a.is_empty() && c.is_empty() => (vec![], vec![]),
            (Some(_), Mode::NonInvertible) => {
                return Err(mismatch(rule, "initial rules carry empty contexts in non-invertible mode"))
            }
            (None, _) => (vec![], vec![]),
        }
    } else if rule.is_cut() {
        let (a0, c0) = &ctxs[0];
        let (a1, c1) = &ctxs[1];
        let mut ant = a0.clone();
        ant.extend(a1.clone());
        let mut con = c1.clone();
        con.extend(c0.clone());
        (ant, con)
    } else if rule.arity() == 2 {
        // And_S / Or_P: shared context, premise order preserved.
        let (a0, c0) = &ctxs[0];
        let (a1, c1) = &ctxs[1];
        let ms = |v: &[Structure]| {
            let mut v = v.to_vec();
            v.sort();
            v
        };
        if ms(a0) != ms(a1) || ms(c0) != ms(c1) {
            return Err(mismatch(rule, "premises must share their context"));
        }
        (a0.clone(), c0.clone())
    } else {
        ctxs[0].clone()
    };

    // Invertible variants that keep their principal in the context.
    for (side, s) in &sh.require_in_ctx {
        let present = match side {
            Side::Ant => ctx_ant.contains(s),
            Side::Con => ctx_con.contains(s),
        };
        if !present {
            return Err(mismatch(rule, format!("`{}` must occur in the context", s)));
        }
    }

    // Freshness side conditions.
    let cvars = ctx_vars(&ctx_ant, &ctx_con);
    for (v, what) in &sh.fresh_in_ctx {
        if cvars.contains(v) {
            return Err(RuleError::FreshnessViolation {
                rule: rule.name().into(),
                var: *v,
                cond: format!("{}: must not appear in the context", what),
            });
        }
    }

    // Conclusion.
    let mut ant = sh.concl.ant_front.clone();
    ant.extend(ctx_ant.iter().cloned());
    ant.extend(sh.concl.ant_back.iter().cloned());
    let mut con = sh.concl.con_front.clone();
    con.extend(ctx_con.iter().cloned());
    con.extend(sh.concl.con_back.iter().cloned());
    let conclusion = Sequent::new(ant, con);

    for (v, cond) in &sh.absent_in_concl {
        if conclusion.contains_var(*v) {
            return Err(RuleError::FreshnessViolation {
                rule: rule.name().into(),
                var: *v,
                cond: (*cond).to_string(),
            });
        }
    }

    // Display side conditions.
    let find_loc = |seq: &Sequent, s: &Structure| -> Option<Loc> {
        seq.locs().into_iter().find(|&l| seq.get(l) == Some(s))
    };
    for s in &sh.display_in_concl {
        let loc = find_loc(&conclusion, s).expect("principal occurs in conclusion");
        if !in_display(&conclusion, loc) {
            return Err(RuleError::DisplayViolation {
                rule: rule.name().into(),
                msg: format!("`{}` is not in display in the conclusion", s),
            });
        }
    }
    for (i, s) in &sh.display_in_prem {
        let loc = find_loc(&premises[*i], s).expect("cut formula occurs in premise");
        if !in_display(&premises[*i], loc) {
            return Err(RuleError::DisplayViolation {
                rule: rule.name().into(),
                msg: format!("`{}` is not in display in premise {}", s, i),
            });
        }
    }

    // Nonparametric locators in the conclusion (front structures first,
    // then back ones).
    let mut np_concl = Vec::new();
    for i in 0..sh.concl.ant_front.len() {
        np_concl.push(Loc::ant(i));
    }
    let back0 = sh.concl.ant_front.len() + ctx_ant.len();
    for i in 0..sh.concl.ant_back.len() {
        np_concl.push(Loc::ant(back0 + i));
    }
    for i in 0..sh.concl.con_front.len() {
        np_concl.push(Loc::con(i));
    }
    let cback0 = sh.concl.con_front.len() + ctx_con.len();
    for i in 0..sh.concl.con_back.len() {
        np_concl.push(Loc::con(cback0 + i));
    }

    // Parameter flow: context occurrences map premise -> conclusion.
    let mut param_map: Vec<(Loc, Vec<(usize, Loc)>)> = Vec::new();
    {
        // For each premise, recompute which of its locators were context.
        let mut prem_ctx_locs: Vec<Vec<Loc>> = Vec::new();
        for (i, prem) in premises.iter().enumerate() {
            let np: &[Loc] = &np_prem[i];
            let locs: Vec<Loc> = prem.locs().into_iter().filter(|l| !np.contains(l)).collect();
            prem_ctx_locs.push(locs);
        }
        // Conclusion context locators, in the same order the context was
        // assembled.
        let concl_ctx_ant: Vec<Loc> =
            (0..ctx_ant.len()).map(|i| Loc::ant(sh.concl.ant_front.len() + i)).collect();
        let concl_ctx_con: Vec<Loc> =
            (0..ctx_con.len()).map(|i| Loc::con(sh.concl.con_front.len() + i)).collect();
        let concl_ctx: Vec<Loc> = concl_ctx_ant.into_iter().chain(concl_ctx_con).collect();

        if rule.is_cut() {
            // Left contexts then right contexts in the antecedent; right
            // then left in the consequent.
            let (a0, c0) = (&ctxs[0].0, &ctxs[0].1);
            let (a1, c1) = (&ctxs[1].0, &ctxs[1].1);
            let order: Vec<(usize, usize)> = (0..a0.len())
                .map(|k| (0usize, k))
                .chain((0..a1.len()).map(|k| (1usize, k)))
                .chain((0..c1.len()).map(|k| (1usize, a1.len() + k)))
                .chain((0..c0.len()).map(|k| (0usize, a0.len() + k)))
                .collect();
            for (cl, (p, k)) in concl_ctx.iter().zip(order) {
                param_map.push((*cl, vec![(p, prem_ctx_locs[p][k])]));
            }
        } else if rule.arity() == 2 {
            // Shared context: a conclusion occurrence is congruent to one
            // occurrence in each premise. Premise 0's order defines the
            // conclusion; premise 1's occurrences are aligned by value.
            let (a0, c0) = (&ctxs[0].0, &ctxs[0].1);
            let all0: Vec<&Structure> = a0.iter().chain(c0.iter()).collect();
            let mut used1 = vec![false; prem_ctx_locs[1].len()];
            for (idx, cl) in concl_ctx.iter().enumerate() {
                let mut parents = vec![(0usize, prem_ctx_locs[0][idx])];
                let val = all0[idx];
                for (k, l1) in prem_ctx_locs[1].iter().enumerate() {
                    if !used1[k] && premises[1].get(*l1) == Some(val) {
                        used1[k] = true;
                        parents.push((1, *l1));
                        break;
                    }
                }
                param_map.push((*cl, parents));
            }
        } else if rule.arity() == 1 {
            for (idx, cl) in concl_ctx.iter().enumerate() {
                param_map.push((*cl, vec![(0, prem_ctx_locs[0][idx])]));
            }
        }
    }

    // Switch / adjunction congruence between nonparametric occurrences.
    let mut switch_map = Vec::new();
    for (cn, pn) in &sh.switch_edges {
        switch_map.push((np_concl[*cn], (0usize, np_prem[0][*pn])));
    }

    Ok(RuleInstance {
        rule,
        premises: premises.to_vec(),
        conclusion,
        bindings: bindings.clone(),
        np_concl,
        np_prem,
        param_map,
        switch_map,
    })
}

/// A violation found when validating an externally supplied instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Rule(RuleError),
    ConclusionMismatch { expected: String, got: String },
    Marking(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Rule(e) => write!(f, "{}", e),
            Violation::ConclusionMismatch { expected, got } => {
                write!(f, "conclusion mismatch: expected `{}`, got `{}`", expected, got)
            }
            Violation::Marking(m) => write!(f, "nonparametric marking: {}", m),
        }
    }
}

/// Validates an instance whose conclusion may be an arbitrary permutation
/// of the computed one. On success returns the instance re-aligned to the
/// given conclusion, so locators refer to it.
pub fn check_instance_aligned(
    cfg: &CalcConfig,
    rule: RuleId,
    premises: &[Sequent],
    conclusion: &Sequent,
    bindings: &Bindings,
    np_concl_marks: Option<&[Loc]>,
) -> Result<RuleInstance, Vec<Violation>> {
    let inst = apply(cfg, rule, premises, bindings).map_err(|e| vec![Violation::Rule(e)])?;
    if !inst.conclusion.multiset_eq(conclusion) {
        return Err(vec![Violation::ConclusionMismatch {
            expected: inst.conclusion.to_string(),
            got: conclusion.to_string(),
        }]);
    }
    // Alignment permutation: computed conclusion loc -> given conclusion
    // loc, matching equal structures in order.
    let mut perm: BTreeMap<Loc, Loc> = BTreeMap::new();
    for side in [Side::Ant, Side::Con] {
        let comp = inst.conclusion.side(side);
        let given = conclusion.side(side);
        let mut used = vec![false; given.len()];
        for (i, s) in comp.iter().enumerate() {
            let mut placed = false;
            for (k, g) in given.iter().enumerate() {
                if !used[k] && g == s {
                    used[k] = true;
                    perm.insert(Loc { side, index: i }, Loc { side, index: k });
                    placed = true;
                    break;
                }
            }
            debug_assert!(placed);
        }
    }
    let mut aligned = inst.clone();
    aligned.conclusion = conclusion.clone();
    aligned.np_concl = inst.np_concl.iter().map(|l| perm[l]).collect();
    aligned.param_map = inst.param_map.iter().map(|(l, ps)| (perm[l], ps.clone())).collect();
    aligned.switch_map = inst.switch_map.iter().map(|(l, p)| (perm[l], *p)).collect();

    if let Some(marks) = np_concl_marks {
        let mut want: Vec<&Structure> =
            aligned.np_concl.iter().map(|l| conclusion.get(*l).unwrap()).collect();
        if marks.len() != want.len() {
            return Err(vec![Violation::Marking(format!(
                "expected {} conclusion marking(s), got {}",
                want.len(),
                marks.len()
            ))]);
        }
        for mark in marks {
            let Some(s) = conclusion.get(*mark) else {
                return Err(vec![Violation::Marking(format!("locator {} out of range", mark))]);
            };
            match want.iter().position(|w| *w == s) {
                Some(i) => {
                    want.remove(i);
                }
                None => {
                    return Err(vec![Violation::Marking(format!(
                        "`{}` at {} is not a nonparametric structure of {}",
                        s, mark, rule
                    ))])
                }
            }
        }
    }
    Ok(aligned)
}

/// Validates an externally supplied instance. Empty result means ok.
///
/// The derivation-level side condition on cut formulas (j-/m-labelledness)
/// cannot be decided on an isolated instance; it is deferred to the proof
/// checker.
pub fn check_instance(cfg: &CalcConfig, inst: &RuleInstance) -> Vec<Violation> {
    match check_instance_aligned(
        cfg,
        inst.rule,
        &inst.premises,
        &inst.conclusion,
        &inst.bindings,
        Some(&inst.np_concl),
    ) {
        Ok(_) => Vec::new(),
        Err(v) => v,
    }
}

/// One entry of a backward enumeration.
#[derive(Debug, Clone)]
pub struct BackwardStep {
    pub rule: RuleId,
    pub premises: Vec<Sequent>,
    pub bindings: Bindings,
}

/// Enumerates every rule instance (cuts excluded) whose conclusion matches
/// `goal` modulo permutation. Fresh premise variables are drawn above the
/// goal's variables. Deterministic: rule order, then leftmost match.
pub fn backward(cfg: &CalcConfig, goal: &Sequent) -> Vec<BackwardStep> {
    let mut out = Vec::new();
    for &rule in RuleId::ALL {
        if rule.is_cut() || !rule.available_in(cfg.mode) {
            continue;
        }
        if let Some(ax) = rule.sigma_requirement() {
            if !cfg.sigma.contains(&ax) {
                continue;
            }
        }
        backward_rule(cfg, rule, goal, &mut out);
    }
    out
}

fn replace_at(seq: &Sequent, loc: Loc, with: Option<Structure>) -> Sequent {
    let mut s = seq.clone();
    match loc.side {
        Side::Ant => {
            s.ant.remove(loc.index);
            if let Some(w) = with {
                s.ant.insert(loc.index, w);
            }
        }
        Side::Con => {
            s.con.remove(loc.index);
            if let Some(w) = with {
                s.con.insert(loc.index, w);
            }
        }
    }
    s
}

fn push_if_valid(cfg: &CalcConfig, rule: RuleId, prem: Vec<Sequent>, b: Bindings, goal: &Sequent, out: &mut Vec<BackwardStep>) {
    if let Ok(inst) = apply(cfg, rule, &prem, &b) {
        if inst.conclusion.multiset_eq(goal) {
            out.push(BackwardStep { rule, premises: prem, bindings: b });
        }
    }
}

fn backward_rule(cfg: &CalcConfig, rule: RuleId, goal: &Sequent, out: &mut Vec<BackwardStep>) {
    use RuleId::*;
    let gvars = goal.term_vars();
    let fresh_nom = || FreshGen::above(&gvars).fresh(VarKind::Nominal);
    let fresh_conom = || FreshGen::above(&gvars).fresh(VarKind::Conominal);

    match rule {
        IdJp | IdPm | IdBot | IdTop | BotJ | BotM | TopM | TopJ => {
            // Closure: find a matching antecedent/consequent pair; in
            // strict mode the contexts must be empty.
            for la in goal.locs().into_iter().filter(|l| l.side == Side::Ant) {
                for lc in goal.locs().into_iter().filter(|l| l.side == Side::Con) {
                    let (sa, sc) = (goal.get(la).unwrap().clone(), goal.get(lc).unwrap().clone());
                    let b = match (rule, &sa, &sc) {
                        (IdJp, Structure::LabJ(j, a), Structure::LabJ(j2, a2))
                            if j == j2 && a == a2 && matches!(a, Formula::Atom(_)) =>
                        {
                            Bindings::new().v('j', *j).f('A', a.clone())
                        }
                        (IdPm, Structure::LabM(a, m), Structure::LabM(a2, m2))
                            if m == m2 && a == a2 && matches!(a, Formula::Atom(_)) =>
                        {
                            Bindings::new().v('m', *m).f('A', a.clone())
                        }
                        (IdBot, Structure::LabM(Formula::Bot, m), Structure::LabM(Formula::Bot, m2))
                            if m == m2 =>
                        {
                            Bindings::new().v('m', *m)
                        }
                        (IdTop, Structure::LabJ(j, Formula::Top), Structure::LabJ(j2, Formula::Top))
                            if j == j2 =>
                        {
                            Bindings::new().v('j', *j)
                        }
                        (BotJ, Structure::LabJ(j, Formula::Bot), Structure::LabJ(j2, a))
                            if j == j2 && restricted_j(a) =>
                        {
                            Bindings::new().v('j', *j).f('A', a.clone())
                        }
                        (TopJ, Structure::LabJ(j, a), Structure::LabJ(j2, Formula::Top))
                            if j == j2 && restricted_j(a) =>
                        {
                            Bindings::new().v('j', *j).f('A', a.clone())
                        }
                        (BotM, Structure::LabM(a, m), Structure::LabM(Formula::Bot, m2))
                            if m == m2 && restricted_m(a) =>
                        {
                            Bindings::new().v('m', *m).f('B', a.clone())
                        }
                        (TopM, Structure::LabM(Formula::Top, m), Structure::LabM(a, m2))
                            if m == m2 && restricted_m(a) =>
                        {
                            Bindings::new().v('m', *m).f('B', a.clone())
                        }
                        _ => continue,
                    };
                    let mut ant = goal.ant.clone();
                    let mut con = goal.con.clone();
                    ant.remove(la.index);
                    con.remove(lc.index);
                    match cfg.mode {
                        Mode::NonInvertible => {
                            if ant.is_empty() && con.is_empty() {
                                push_if_valid(cfg, rule, vec![], b, goal, out);
                            }
                        }
                        Mode::Invertible => {
                            let b = Bindings { ctx: Some((ant, con)), ..b };
                            push_if_valid(cfg, rule, vec![], b, goal, out);
                        }
                    }
                }
            }
        }
        CutJ | CutM => {}
        SM | SJ => {
            // Conclusion `Γ ⊢ A <= m, Δ` (S_m) or `Γ ⊢ j <= A, Δ` (S_j);
            // the premise re-introduces a fresh variable.
            for lc in goal.locs().into_iter().filter(|l| l.side == Side::Con) {
                match (rule, goal.get(lc).unwrap().clone()) {
                    (SM, Structure::LabM(a, m)) => {
                        let j = fresh_nom();
                        let mut prem = replace_at(goal, lc, Structure::pure_j(j, Term::CoNom(m)).ok());
                        prem.ant.insert(0, Structure::LabJ(j, a.clone()));
                        let b = Bindings::new().v('j', j).v('m', m).f('A', a);
                        push_if_valid(cfg, rule, vec![prem], b, goal, out);
                    }
                    (SJ, Structure::LabJ(j, a)) => {
                        let m = fresh_conom();
                        let mut prem = replace_at(goal, lc, Structure::pure_j(j, Term::CoNom(m)).ok());
                        prem.ant.insert(0, Structure::LabM(a.clone(), m));
                        let b = Bindings::new().v('j', j).v('m', m).f('A', a);
                        push_if_valid(cfg, rule, vec![prem], b, goal, out);
                    }
                    _ => {}
                }
            }
        }
        SMm | SMT | STm | STTm | SJj | SJT | STj | SJTT => {
            backward_switch(cfg, rule, goal, out);
        }
        AdjDiaBb | AdjDiaBbInv | AdjBdBox | AdjBdBoxInv => {
            for lc in goal.locs().into_iter().filter(|l| l.side == Side::Con) {
                let (prem_np, b) = match (rule, goal.get(lc).unwrap()) {
                    (AdjDiaBb, Structure::PureJ(j, Term::BBoxC(m))) => (
                        Structure::pure_m(Term::DiaN(*j), *m),
                        Bindings::new().v('j', *j).v('m', *m),
                    ),
                    (AdjDiaBbInv, Structure::PureM(Term::DiaN(j), m)) => (
                        Structure::pure_j(*j, Term::BBoxC(*m)),
                        Bindings::new().v('j', *j).v('m', *m),
                    ),
                    (AdjBdBox, Structure::PureM(Term::BDiaN(j), m)) => (
                        Structure::pure_j(*j, Term::BoxC(*m)),
                        Bindings::new().v('j', *j).v('m', *m),
                    ),
                    (AdjBdBoxInv, Structure::PureJ(j, Term::BoxC(m))) => (
                        Structure::pure_m(Term::BDiaN(*j), *m),
                        Bindings::new().v('j', *j).v('m', *m),
                    ),
                    _ => continue,
                };
                let Ok(np) = prem_np else { continue };
                let prem = replace_at(goal, lc, Some(np));
                push_if_valid(cfg, rule, vec![prem], b, goal, out);
            }
        }
        TopBox => {
            // Conclusion `j <= T, Γ ⊢ j <= []m, Δ`.
            for la in goal.locs().into_iter().filter(|l| l.side == Side::Ant) {
                let Structure::LabJ(j, Formula::Top) = goal.get(la).unwrap() else { continue };
                for lc in goal.locs().into_iter().filter(|l| l.side == Side::Con) {
                    let Structure::PureJ(j2, Term::BoxC(m)) = goal.get(lc).unwrap() else { continue };
                    if j2 != j {
                        continue;
                    }
                    let prem = replace_at(
                        &replace_at(goal, lc, Some(Structure::LabM(Formula::Top, *m))),
                        la,
                        None,
                    );
                    let b = Bindings::new().v('j', *j).v('m', *m);
                    push_if_valid(cfg, rule, vec![prem], b, goal, out);
                }
            }
        }
        BotDia => {
            for la in goal.locs().into_iter().filter(|l| l.side == Side::Ant) {
                let Structure::LabM(Formula::Bot, m) = goal.get(la).unwrap() else { continue };
                for lc in goal.locs().into_iter().filter(|l| l.side == Side::Con) {
                    let Structure::PureM(Term::DiaN(j), m2) = goal.get(lc).unwrap() else { continue };
                    if m2 != m {
                        continue;
                    }
                    let prem = replace_at(
                        &replace_at(goal, lc, Some(Structure::LabJ(*j, Formula::Bot))),
                        la,
                        None,
                    );
                    let b = Bindings::new().v('j', *j).v('m', *m);
                    push_if_valid(cfg, rule, vec![prem], b, goal, out);
                }
            }
        }
        AndP | OrS => {
            for l in goal.locs().into_iter().filter(|l| l.side == Side::Ant) {
                let b0 = match (rule, goal.get(l).unwrap()) {
                    (AndP, Structure::LabJ(j, Formula::And(a, bb))) => {
                        Bindings::new().v('j', *j).f('A', (**a).clone()).f('B', (**bb).clone())
                    }
                    (OrS, Structure::LabM(Formula::Or(a, bb), m)) => {
                        Bindings::new().v('m', *m).f('A', (**a).clone()).f('B', (**bb).clone())
                    }
                    _ => continue,
                };
                for i in [1u8, 2u8] {
                    let s = goal.get(l).unwrap().clone();
                    let np = match (&s, rule) {
                        (Structure::LabJ(j, Formula::And(a, bb)), AndP) => {
                            Structure::LabJ(*j, if i == 1 { (**a).clone() } else { (**bb).clone() })
                        }
                        (Structure::LabM(Formula::Or(a, bb), m), OrS) => {
                            Structure::LabM(if i == 1 { (**a).clone() } else { (**bb).clone() }, *m)
                        }
                        _ => unreachable!(),
                    };
                    let prem = replace_at(goal, l, Some(np));
                    push_if_valid(cfg, rule, vec![prem], b0.clone().i(i), goal, out);
                }
            }
        }
        AndPInv | OrSInv => {
            for l in goal.locs().into_iter().filter(|l| l.side == Side::Ant) {
                match (rule, goal.get(l).unwrap().clone()) {
                    (AndPInv, Structure::LabJ(j, Formula::And(a, bb))) => {
                        let mut prem = replace_at(goal, l, Some(Structure::LabJ(j, (*a).clone())));
                        prem.ant.insert(l.index + 1, Structure::LabJ(j, (*bb).clone()));
                        let b = Bindings::new().v('j', j).f('A', (*a).clone()).f('B', (*bb).clone());
                        push_if_valid(cfg, rule, vec![prem], b, goal, out);
                    }
                    (OrSInv, Structure::LabM(Formula::Or(a, bb), m)) => {
                        let mut prem = replace_at(goal, l, Some(Structure::LabM((*a).clone(), m)));
                        prem.ant.insert(l.index + 1, Structure::LabM((*bb).clone(), m));
                        let b = Bindings::new().v('m', m).f('A', (*a).clone()).f('B', (*bb).clone());
                        push_if_valid(cfg, rule, vec![prem], b, goal, out);
                    }
                    _ => {}
                }
            }
        }
        AndS | OrP => {
            for l in goal.locs().into_iter().filter(|l| l.side == Side::Con) {
                match (rule, goal.get(l).unwrap().clone()) {
                    (AndS, Structure::LabJ(j, Formula::And(a, bb))) => {
                        let p1 = replace_at(goal, l, Some(Structure::LabJ(j, (*a).clone())));
                        let p2 = replace_at(goal, l, Some(Structure::LabJ(j, (*bb).clone())));
                        let b = Bindings::new().v('j', j).f('A', (*a).clone()).f('B', (*bb).clone());
                        push_if_valid(cfg, rule, vec![p1, p2], b, goal, out);
                    }
                    (OrP, Structure::LabM(Formula::Or(a, bb), m)) => {
                        let p1 = replace_at(goal, l, Some(Structure::LabM((*a).clone(), m)));
                        let p2 = replace_at(goal, l, Some(Structure::LabM((*bb).clone(), m)));
                        let b = Bindings::new().v('m', m).f('A', (*a).clone()).f('B', (*bb).clone());
                        push_if_valid(cfg, rule, vec![p1, p2], b, goal, out);
                    }
                    _ => {}
                }
            }
        }
        BoxP => {
            // Conclusion `j <= []A, Γ ⊢ Δ, j <= []m`.
            for la in goal.locs().into_iter().filter(|l| l.side == Side::Ant) {
                let Structure::LabJ(j, Formula::Box_(a)) = goal.get(la).unwrap() else { continue };
                for lc in goal.locs().into_iter().filter(|l| l.side == Side::Con) {
                    let Structure::PureJ(j2, Term::BoxC(m)) = goal.get(lc).unwrap() else { continue };
                    if j2 != j {
                        continue;
                    }
                    let b = Bindings::new().v('j', *j).v('m', *m).f('A', (**a).clone());
                    let prem = replace_at(
                        &replace_at(goal, lc, Some(Structure::LabM((**a).clone(), *m))),
                        la,
                        None,
                    );
                    push_if_valid(cfg, rule, vec![prem], b, goal, out);
                }
            }
        }
        BoxPInv => {
            for la in goal.locs().into_iter().filter(|l| l.side == Side::Ant) {
                let Structure::LabJ(j, Formula::Box_(a)) = goal.get(la).unwrap() else { continue };
                for lc in goal.locs().into_iter().filter(|l| l.side == Side::Con) {
                    let Structure::PureJ(j2, Term::BoxC(m)) = goal.get(lc).unwrap() else { continue };
                    if j2 != j {
                        continue;
                    }
                    let mut prem = goal.clone();
                    prem.con.insert(0, Structure::LabM((**a).clone(), *m));
                    let b = Bindings::new().v('j', *j).v('m', *m).f('A', (**a).clone());
                    push_if_valid(cfg, rule, vec![prem], b, goal, out);
                }
            }
        }
        BoxS => {
            for lc in goal.locs().into_iter().filter(|l| l.side == Side::Con) {
                let Structure::LabJ(j, Formula::Box_(a)) = goal.get(lc).unwrap() else { continue };
                let m = fresh_conom();
                let mut prem =
                    replace_at(goal, lc, Structure::pure_j(*j, Term::BoxC(m)).ok());
                prem.ant.push(Structure::LabM((**a).clone(), m));
                let b = Bindings::new().v('j', *j).v('m', m).f('A', (**a).clone());
                push_if_valid(cfg, rule, vec![prem], b, goal, out);
            }
        }
        DiaP => {
            for lc in goal.locs().into_iter().filter(|l| l.side == Side::Con) {
                let Structure::LabM(Formula::Dia(a), m) = goal.get(lc).unwrap() else { continue };
                let j = fresh_nom();
                let mut prem =
                    replace_at(goal, lc, Structure::pure_m(Term::DiaN(j), *m).ok());
                prem.ant.insert(0, Structure::LabJ(j, (**a).clone()));
                let b = Bindings::new().v('j', j).v('m', *m).f('A', (**a).clone());
                push_if_valid(cfg, rule, vec![prem], b, goal, out);
            }
        }
        DiaS => {
            for la in goal.locs().into_iter().filter(|l| l.side == Side::Ant) {
                let Structure::LabM(Formula::Dia(a), m) = goal.get(la).unwrap() else { continue };
                for lc in goal.locs().into_iter().filter(|l| l.side == Side::Con) {
                    let Structure::PureM(Term::DiaN(j), m2) = goal.get(lc).unwrap() else { continue };
                    if m2 != m {
                        continue;
                    }
                    let b = Bindings::new().v('j', *j).v('m', *m).f('A', (**a).clone());
                    let prem = replace_at(
                        &replace_at(goal, lc, Some(Structure::LabJ(*j, (**a).clone()))),
                        la,
                        None,
                    );
                    push_if_valid(cfg, rule, vec![prem], b, goal, out);
                }
            }
        }
        DiaSInv => {
            for la in goal.locs().into_iter().filter(|l| l.side == Side::Ant) {
                let Structure::LabM(Formula::Dia(a), m) = goal.get(la).unwrap() else { continue };
                for lc in goal.locs().into_iter().filter(|l| l.side == Side::Con) {
                    let Structure::PureM(Term::DiaN(j), m2) = goal.get(lc).unwrap() else { continue };
                    if m2 != m {
                        continue;
                    }
                    let mut prem = goal.clone();
                    prem.con.insert(0, Structure::LabJ(*j, (**a).clone()));
                    let b = Bindings::new().v('j', *j).v('m', *m).f('A', (**a).clone());
                    push_if_valid(cfg, rule, vec![prem], b, goal, out);
                }
            }
        }
        Ax4 => {
            // Conclusion `Γ, h <= <>j ⊢ <>h <= m, Δ`.
            for la in goal.locs().into_iter().filter(|l| l.side == Side::Ant) {
                let Structure::PureJ(h, Term::DiaN(j)) = goal.get(la).unwrap() else { continue };
                for lc in goal.locs().into_iter().filter(|l| l.side == Side::Con) {
                    let Structure::PureM(Term::DiaN(h2), m) = goal.get(lc).unwrap() else { continue };
                    if h2 != h {
                        continue;
                    }
                    let b = Bindings::new().v('j', *j).v('m', *m).v('h', *h);
                    let prem = replace_at(
                        &replace_at(goal, lc, Structure::pure_m(Term::DiaN(*j), *m).ok()),
                        la,
                        None,
                    );
                    push_if_valid(cfg, rule, vec![prem], b, goal, out);
                }
            }
        }
        AxT => {
            for lc in goal.locs().into_iter().filter(|l| l.side == Side::Con) {
                let Structure::PureJ(j, Term::CoNom(m)) = goal.get(lc).unwrap() else { continue };
                let b = Bindings::new().v('j', *j).v('m', *m);
                let prem = replace_at(goal, lc, Structure::pure_j(*j, Term::BoxC(*m)).ok());
                push_if_valid(cfg, rule, vec![prem], b, goal, out);
            }
        }
        AxB => {
            for lc in goal.locs().into_iter().filter(|l| l.side == Side::Con) {
                let Structure::PureJ(j, Term::BoxC(m)) = goal.get(lc).unwrap() else { continue };
                let b = Bindings::new().v('j', *j).v('m', *m);
                let prem = replace_at(goal, lc, Structure::pure_m(Term::DiaN(*j), *m).ok());
                push_if_valid(cfg, rule, vec![prem], b, goal, out);
            }
        }
        AxD => {
            for lc in goal.locs().into_iter().filter(|l| l.side == Side::Con) {
                let Structure::PureJ(j, Term::CoNom(m)) = goal.get(lc).unwrap() else { continue };
                let k = fresh_nom();
                let mut prem = replace_at(goal, lc, Structure::pure_m(Term::DiaN(k), *m).ok());
                if let Ok(s) = Structure::pure_j(k, Term::BDiaN(*j)) {
                    prem.ant.insert(0, s);
                }
                let b = Bindings::new().v('j', *j).v('m', *m).v('k', k);
                push_if_valid(cfg, rule, vec![prem], b, goal, out);
            }
        }
        AxC => {
            for la in goal.locs().into_iter().filter(|l| l.side == Side::Ant) {
                let Structure::PureJ(h, Term::DiaN(j)) = goal.get(la).unwrap() else { continue };
                for lc in goal.locs().into_iter().filter(|l| l.side == Side::Con) {
                    let Structure::PureM(Term::BDiaN(h2), m) = goal.get(lc).unwrap() else { continue };
                    if h2 != h {
                        continue;
                    }
                    let k = fresh_nom();
                    let mut prem = replace_at(
                        &replace_at(goal, lc, Structure::pure_m(Term::DiaN(k), *m).ok()),
                        la,
                        None,
                    );
                    if let Ok(s) = Structure::pure_j(k, Term::BDiaN(*j)) {
                        prem.ant.insert(0, s);
                    }
                    let b = Bindings::new().v('j', *j).v('m', *m).v('k', k).v('h', *h);
                    push_if_valid(cfg, rule, vec![prem], b, goal, out);
                }
            }
        }
    }
}

/// Backward steps for the eight pairing switch rules: pick the conclusion
/// nonparametric pair, flip it, introduce a fresh premise variable.
fn backward_switch(cfg: &CalcConfig, rule: RuleId, goal: &Sequent, out: &mut Vec<BackwardStep>) {
    use RuleId::*;
    let gvars = goal.term_vars();
    let fresh = |kind: VarKind| FreshGen::above(&gvars).fresh(kind);
    for la in goal.locs().into_iter().filter(|l| l.side == Side::Ant) {
        for lc in goal.locs().into_iter().filter(|l| l.side == Side::Con) {
            let (sa, sc) = (goal.get(la).unwrap().clone(), goal.get(lc).unwrap().clone());
            // The conclusion pair shares its approximant.
            if sa.approximant() != sc.approximant() {
                continue;
            }
            let entry: Option<(Bindings, Structure, Structure)> = match (rule, &sa, &sc) {
                (SMm, Structure::LabM(bf, m), Structure::LabM(af, _)) => {
                    let j = fresh(VarKind::Nominal);
                    Some((
                        Bindings::new().v('j', j).v('m', *m).f('A', af.clone()).f('B', bf.clone()),
                        Structure::LabJ(j, af.clone()),
                        Structure::LabJ(j, bf.clone()),
                    ))
                }
                (SJj, Structure::LabJ(j, bf), Structure::LabJ(_, af)) => {
                    let m = fresh(VarKind::Conominal);
                    Some((
                        Bindings::new().v('j', *j).v('m', m).f('A', af.clone()).f('B', bf.clone()),
                        Structure::LabM(af.clone(), m),
                        Structure::LabM(bf.clone(), m),
                    ))
                }
                (SMT, Structure::LabM(af, m), Structure::PureM(t, _)) => {
                    let j = fresh(VarKind::Nominal);
                    Structure::pure_j(j, *t).ok().map(|pa| {
                        (
                            Bindings::new().v('j', j).v('m', *m).f('A', af.clone()).t('T', *t),
                            pa,
                            Structure::LabJ(j, af.clone()),
                        )
                    })
                }
                (STm, Structure::PureM(t, m), Structure::LabM(af, _)) => {
                    let j = fresh(VarKind::Nominal);
                    Structure::pure_j(j, *t).ok().map(|pc| {
                        (
                            Bindings::new().v('j', j).v('m', *m).f('A', af.clone()).t('T', *t),
                            Structure::LabJ(j, af.clone()),
                            pc,
                        )
                    })
                }
                (SJT, Structure::LabJ(j, af), Structure::PureJ(_, t)) => {
                    let m = fresh(VarKind::Conominal);
                    Structure::pure_m(*t, m).ok().map(|pa| {
                        (
                            Bindings::new().v('j', *j).v('m', m).f('A', af.clone()).t('T', *t),
                            pa,
                            Structure::LabM(af.clone(), m),
                        )
                    })
                }
                (STj, Structure::PureJ(j, t), Structure::LabJ(_, af)) => {
                    let m = fresh(VarKind::Conominal);
                    Structure::pure_m(*t, m).ok().map(|pc| {
                        (
                            Bindings::new().v('j', *j).v('m', m).f('A', af.clone()).t('T', *t),
                            Structure::LabM(af.clone(), m),
                            pc,
                        )
                    })
                }
                (STTm, Structure::PureM(t, m), Structure::PureM(u, _)) => {
                    let j = fresh(VarKind::Nominal);
                    match (Structure::pure_j(j, *u), Structure::pure_j(j, *t)) {
                        (Ok(pa), Ok(pc)) => Some((
                            Bindings::new().v('j', j).v('m', *m).t('T', *t).t('U', *u),
                            pa,
                            pc,
                        )),
                        _ => None,
                    }
                }
                (SJTT, Structure::PureJ(j, t), Structure::PureJ(_, u)) => {
                    let m = fresh(VarKind::Conominal);
                    match (Structure::pure_m(*u, m), Structure::pure_m(*t, m)) {
                        (Ok(pa), Ok(pc)) => Some((
                            Bindings::new().v('j', *j).v('m', m).t('T', *t).t('U', *u),
                            pa,
                            pc,
                        )),
                        _ => None,
                    }
                }
                _ => None,
            };
            let Some((b, prem_ant_np, prem_con_np)) = entry else { continue };
            let prem = {
                let without_con = replace_at(goal, lc, Some(prem_con_np));
                replace_at(&without_con, la, Some(prem_ant_np))
            };
            push_if_valid(cfg, rule, vec![prem], b, goal, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_sequent;

    fn seq(s: &str) -> Sequent {
        parse_sequent(s).unwrap()
    }

    fn cfg() -> CalcConfig {
        CalcConfig::default()
    }

    #[test]
    fn apply_box_p_yields_t_derivation_step() {
        let prem = seq("p0 <= m0 |- p0 <= m0");
        let b = Bindings::new()
            .f('A', Formula::atom(0))
            .v('m', VarId::conom(0))
            .v('j', VarId::nom(1));
        let inst = apply(&cfg(), RuleId::BoxP, &[prem], &b).unwrap();
        assert!(inst.conclusion.multiset_eq(&seq("j1 <= []p0, p0 <= m0 |- j1 <= []m0")));
    }

    #[test]
    fn apply_s_j_final_t_step() {
        let prem = seq("j1 <= []p0, p0 <= m0 |- j1 <= m0");
        let b = Bindings::new()
            .f('A', Formula::atom(0))
            .v('j', VarId::nom(1))
            .v('m', VarId::conom(0));
        let inst = apply(&cfg(), RuleId::SJ, &[prem], &b).unwrap();
        assert!(inst.conclusion.multiset_eq(&seq("j1 <= []p0 |- j1 <= p0")));
    }

    #[test]
    fn apply_box_s_rejects_stale_eigenvariable() {
        // m0 would survive into the conclusion.
        let prem = seq("p0 <= m0 |- j1 <= []m0, <>p0 <= m0");
        let b = Bindings::new()
            .f('A', Formula::atom(0))
            .v('j', VarId::nom(1))
            .v('m', VarId::conom(0));
        let e = apply(&cfg(), RuleId::BoxS, &[prem], &b).unwrap_err();
        assert!(matches!(e, RuleError::FreshnessViolation { .. }), "{e}");
    }

    #[test]
    fn apply_ax4_adds_approximation_pair() {
        let prem = seq("j1 <= p0, <>p0 <= m0 |- <>j1 <= m0");
        let b = Bindings::new()
            .v('j', VarId::nom(1))
            .v('m', VarId::conom(0))
            .v('h', VarId::nom(3));
        let sigma4 = CalcConfig::with_sigma(&[Axiom::Four]);
        let inst = apply(&sigma4, RuleId::Ax4, &[prem.clone()], &b).unwrap();
        assert!(inst
            .conclusion
            .multiset_eq(&seq("j1 <= p0, <>p0 <= m0, j3 <= <>j1 |- <>j3 <= m0")));
        // Same application without sigma is rejected.
        let e = apply(&cfg(), RuleId::Ax4, &[prem], &b).unwrap_err();
        assert!(matches!(e, RuleError::SigmaDisabled { .. }));
    }

    #[test]
    fn apply_cut_requires_display() {
        // Left premise: j1 <= p0 in the consequent but j1 buried in a term
        // of the antecedent, so the cut formula is not in display.
        let left = seq("j3 <= <>j1, j1 <= p0 |- <>j3 <= m0, j1 <= p0");
        let right = seq("j1 <= p0 |- j1 <= T");
        let b = Bindings::new().v('j', VarId::nom(1)).f('A', Formula::atom(0));
        let e = apply(&cfg(), RuleId::CutJ, &[left, right], &b).unwrap_err();
        assert!(matches!(e, RuleError::DisplayViolation { .. }), "{e}");
    }

    #[test]
    fn check_instance_roundtrip() {
        let prem = seq("p0 <= m0 |- p0 <= m0");
        let b = Bindings::new()
            .f('A', Formula::atom(0))
            .v('m', VarId::conom(0))
            .v('j', VarId::nom(1));
        let inst = apply(&cfg(), RuleId::BoxP, &[prem], &b).unwrap();
        assert!(check_instance(&cfg(), &inst).is_empty());
    }

    #[test]
    fn backward_finds_s_j_premise_for_t_goal() {
        let goal = seq("j1 <= []p0 |- j1 <= p0");
        let steps = backward(&CalcConfig::with_sigma(&[Axiom::T]), &goal);
        let hit = steps.iter().find(|s| {
            s.rule == RuleId::SJ
                && s.premises[0].multiset_eq(&seq("j1 <= []p0, p0 <= m0 |- j1 <= m0"))
        });
        assert!(hit.is_some(), "steps: {:?}", steps.iter().map(|s| (s.rule, s.premises[0].to_string())).collect::<Vec<_>>());
    }

    #[test]
    fn backward_on_empty_goal_is_empty() {
        let goal = Sequent::default();
        assert!(backward(&cfg(), &goal).is_empty());
    }

    #[test]
    fn backward_finds_and_p_for_projection() {
        let goal = seq("j1 <= p0&q0 |- j1 <= p0");
        let steps = backward(&cfg(), &goal);
        let hit = steps
            .iter()
            .find(|s| s.rule == RuleId::AndP && s.premises[0].multiset_eq(&seq("j1 <= p0 |- j1 <= p0")));
        assert!(hit.is_some());
    }

    #[test]
    fn switch_inversion_is_alpha_identity() {
        // S_TTm then S_jTT returns an alpha-variant of the premise.
        let prem = seq("j3 <= []p0, j1 <= <#>j3 |- j1 <= []m0");
        let b = Bindings::new()
            .v('j', VarId::nom(1))
            .v('m', VarId::conom(2))
            .t('T', Term::BoxC(VarId::conom(0)))
            .t('U', Term::BDiaN(VarId::nom(3)));
        let down = apply(&cfg(), RuleId::STTm, &[prem.clone()], &b).unwrap();
        assert!(down.conclusion.multiset_eq(&seq("j3 <= []p0, []m0 <= m2 |- <#>j3 <= m2")));
        // The inverse switch swaps the roles of the two terms.
        let b_inv = Bindings::new()
            .v('j', VarId::nom(1))
            .v('m', VarId::conom(2))
            .t('T', Term::BDiaN(VarId::nom(3)))
            .t('U', Term::BoxC(VarId::conom(0)));
        let up = apply(&cfg(), RuleId::SJTT, &[down.conclusion.clone()], &b_inv).unwrap();
        assert!(up.conclusion.alpha_eq(&prem));
        // And backward on the conclusion re-discovers the S_TTm premise.
        let steps = backward(&cfg(), &down.conclusion);
        assert!(steps
            .iter()
            .any(|s| s.rule == RuleId::STTm && s.premises[0].alpha_eq(&prem)));
    }

    #[test]
    fn adjunction_inversion_is_identity() {
        let prem = seq("j1 <= []p0 |- <#>j1 <= m0");
        let b = Bindings::new().v('j', VarId::nom(1)).v('m', VarId::conom(0));
        let up = apply(&cfg(), RuleId::AdjBdBoxInv, &[prem.clone()], &b).unwrap();
        let down = apply(&cfg(), RuleId::AdjBdBox, &[up.conclusion.clone()], &b).unwrap();
        assert_eq!(down.conclusion, prem);
    }

    #[test]
    fn exact_two_preserved_by_application() {
        let prem = seq("j1 <= p0, <>p0 <= m0 |- <>j1 <= m0");
        assert!(prem.exact_two().is_ok());
        let b = Bindings::new()
            .v('j', VarId::nom(1))
            .v('m', VarId::conom(0))
            .v('h', VarId::nom(3));
        let sigma4 = CalcConfig::with_sigma(&[Axiom::Four]);
        let inst = apply(&sigma4, RuleId::Ax4, &[prem], &b).unwrap();
        assert!(inst.conclusion.exact_two().is_ok());
    }

    #[test]
    fn invertible_mode_swaps_logical_rules() {
        let goal = seq("j1 <= p0&q0 |- j1 <= p0");
        let inv = CalcConfig::default().invertible();
        let steps = backward(&inv, &goal);
        assert!(steps.iter().all(|s| s.rule != RuleId::AndP));
        assert!(steps.iter().any(|s| s.rule == RuleId::AndPInv));
    }
}

#[cfg(test)]
mod coverage_tests {
    use super::*;
    use crate::syntax::parse_sequent;

    fn seq(s: &str) -> Sequent {
        parse_sequent(s).unwrap()
    }

    /// One valid application per rule not exercised by the corpus, each
    /// rediscovered by backward enumeration.
    #[test]
    fn every_rule_applies_and_backward_finds_it() {
        let strict = CalcConfig::with_sigma(&[Axiom::T, Axiom::Four, Axiom::B, Axiom::D, Axiom::C]);
        let inv = CalcConfig { mode: Mode::Invertible, ..strict.clone() };
        let p0 = Formula::atom(0);
        let q0 = Formula::Atom(VarId::prop_q(0));
        let j1 = VarId::nom(1);
        let j3 = VarId::nom(3);
        let m0 = VarId::conom(0);
        let m2 = VarId::conom(2);
        let cases: Vec<(&CalcConfig, RuleId, Vec<Sequent>, Bindings)> = vec![
            (&strict, RuleId::IdTop, vec![], Bindings::new().v('j', j1)),
            (&strict, RuleId::IdBot, vec![], Bindings::new().v('m', m0)),
            (&strict, RuleId::BotJ, vec![], Bindings::new().v('j', j1).f('A', p0.clone())),
            (&strict, RuleId::TopJ, vec![], Bindings::new().v('j', j1).f('A', p0.clone())),
            (&strict, RuleId::BotM, vec![], Bindings::new().v('m', m0).f('B', Formula::dia(p0.clone()))),
            (&strict, RuleId::TopM, vec![], Bindings::new().v('m', m0).f('B', Formula::or(p0.clone(), q0.clone()))),
            (
                &strict,
                RuleId::TopBox,
                vec![seq("T <= m0 |- T <= m0")],
                Bindings::new().v('j', j1).v('m', m0),
            ),
            (
                &strict,
                RuleId::SMT,
                vec![seq("j1 <= <#>j3, j3 <= p0 |- j1 <= q0")],
                Bindings::new().v('j', j1).v('m', m0).f('A', q0.clone()).t('T', Term::BDiaN(j3)),
            ),
            (
                &strict,
                RuleId::SJTT,
                vec![seq("[]m0 <= m2 |- [#]m0 <= m2")],
                Bindings::new()
                    .v('j', j1)
                    .v('m', m2)
                    .t('T', Term::BBoxC(m0))
                    .t('U', Term::BoxC(m0)),
            ),
            (
                &strict,
                RuleId::AndP,
                vec![seq("j1 <= p0 |- j1 <= p0")],
                Bindings::new().v('j', j1).f('A', p0.clone()).f('B', q0.clone()).i(1),
            ),
            (
                &strict,
                RuleId::AndS,
                vec![seq("j1 <= p0&q0 |- j1 <= p0"), seq("j1 <= p0&q0 |- j1 <= q0")],
                Bindings::new().v('j', j1).f('A', p0.clone()).f('B', q0.clone()),
            ),
            (
                &inv,
                RuleId::AndPInv,
                vec![seq("j1 <= p0, j1 <= q0 |- j1 <= p0")],
                Bindings::new().v('j', j1).f('A', p0.clone()).f('B', q0.clone()),
            ),
            (
                &inv,
                RuleId::OrSInv,
                vec![seq("p0 <= m0, q0 <= m0 |- p0 <= m0")],
                Bindings::new().v('m', m0).f('A', p0.clone()).f('B', q0.clone()),
            ),
            (
                &inv,
                RuleId::BoxPInv,
                vec![seq("j1 <= []p0 |- p0 <= m0, j1 <= []m0")],
                Bindings::new().v('j', j1).v('m', m0).f('A', p0.clone()),
            ),
            (
                &inv,
                RuleId::DiaSInv,
                vec![seq("<>p0 <= m0 |- j1 <= p0, <>j1 <= m0")],
                Bindings::new().v('j', j1).v('m', m0).f('A', p0.clone()),
            ),
        ];
        for (cfg, rule, premises, bindings) in cases {
            let inst = apply(cfg, rule, &premises, &bindings)
                .unwrap_or_else(|e| panic!("{}: {}", rule, e));
            assert!(check_instance(cfg, &inst).is_empty(), "{}", rule);
            assert!(inst.conclusion.exact_two().is_ok() || cfg.mode == Mode::Invertible, "{}", rule);
            let steps = backward(cfg, &inst.conclusion);
            let hit = steps.iter().any(|s| {
                s.rule == rule
                    && s.premises.len() == premises.len()
                    && s.premises.iter().zip(&premises).all(|(a, b)| a.alpha_eq(b))
            });
            assert!(hit, "backward misses {} concluding `{}`", rule, inst.conclusion);
        }
    }

    /// Relaxed mode drops only the conclusion-side switch freshness.
    #[test]
    fn relaxed_switch_drops_conclusion_side_only() {
        // Premise with j1 fresh, but the chosen conclusion conominal m0
        // already occurs in the context.
        let prem = seq("p0 <= m0, j1 <= q0 |- j1 <= p0");
        let b = Bindings::new()
            .v('j', VarId::nom(1))
            .v('m', VarId::conom(0))
            .f('A', Formula::Atom(VarId::prop_q(0)))
            .f('B', Formula::atom(0));
        let strict = CalcConfig::default();
        let e = apply(&strict, RuleId::SMm, &[prem.clone()], &b).unwrap_err();
        assert!(matches!(e, RuleError::FreshnessViolation { .. }));
        let relaxed = CalcConfig { relaxed_switch: true, ..CalcConfig::default() };
        assert!(apply(&relaxed, RuleId::SMm, &[prem.clone()], &b).is_ok());
        // The premise-side condition stays: j1 occurring in the context
        // is rejected in both modes.
        let prem2 = seq("<>j1 <= m2, j1 <= q0 |- j1 <= p0");
        let b2 = Bindings::new()
            .v('j', VarId::nom(1))
            .v('m', VarId::conom(0))
            .f('A', Formula::Atom(VarId::prop_q(0)))
            .f('B', Formula::atom(0));
        assert!(apply(&relaxed, RuleId::SMm, &[prem2], &b2).is_err());
    }
}
