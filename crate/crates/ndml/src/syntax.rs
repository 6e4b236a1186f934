//! The object language: formulas of the base modal language, terms of the
//! extended language, labelled formulas, pure structures, and sequents,
//! together with parsing, printing, positions, variable profiles, and
//! renaming.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

use crate::error::{SyntaxError, WfError};

/// Kind of a term variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VarKind {
    Prop,
    Nominal,
    Conominal,
}

/// A variable: a proposition variable `p<k>`, a nominal `j<k>`, or a
/// conominal `m<k>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VarId {
    pub kind: VarKind,
    pub index: u32,
}

impl VarId {
    /// Proposition variable `p<k>`. The `q<k>` family shares the Prop
    /// namespace via odd internal indices.
    pub fn prop(k: u32) -> Self {
        VarId { kind: VarKind::Prop, index: 2 * k }
    }
    /// Proposition variable `q<k>`.
    pub fn prop_q(k: u32) -> Self {
        VarId { kind: VarKind::Prop, index: 2 * k + 1 }
    }
    pub fn nom(index: u32) -> Self {
        VarId { kind: VarKind::Nominal, index }
    }
    pub fn conom(index: u32) -> Self {
        VarId { kind: VarKind::Conominal, index }
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            VarKind::Prop => {
                let c = if self.index % 2 == 0 { 'p' } else { 'q' };
                write!(f, "{}{}", c, self.index / 2)
            }
            VarKind::Nominal => write!(f, "j{}", self.index),
            VarKind::Conominal => write!(f, "m{}", self.index),
        }
    }
}

/// Formula of the base language.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Atom(VarId),
    Top,
    Bot,
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Box_(Box<Formula>),
    Dia(Box<Formula>),
}

impl Formula {
    pub fn atom(i: u32) -> Self {
        Formula::Atom(VarId::prop(i))
    }
    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }
    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }
    pub fn box_(a: Formula) -> Self {
        Formula::Box_(Box::new(a))
    }
    pub fn dia(a: Formula) -> Self {
        Formula::Dia(Box::new(a))
    }

    /// All subformulas, including the formula itself.
    pub fn subformulas(&self) -> Vec<&Formula> {
        let mut out = vec![self];
        match self {
            Formula::And(a, b) | Formula::Or(a, b) => {
                out.extend(a.subformulas());
                out.extend(b.subformulas());
            }
            Formula::Box_(a) | Formula::Dia(a) => out.extend(a.subformulas()),
            _ => {}
        }
        out
    }

    pub fn props(&self) -> Vec<VarId> {
        let mut out = Vec::new();
        for s in self.subformulas() {
            if let Formula::Atom(v) = s {
                if !out.contains(v) {
                    out.push(*v);
                }
            }
        }
        out
    }

    fn needs_parens_under(&self, parent: BinOp) -> bool {
        match (self, parent) {
            (Formula::And(_, _), BinOp::Or) | (Formula::Or(_, _), BinOp::And) => true,
            _ => false,
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum BinOp {
    And,
    Or,
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // Binary operators print left-associatively: a right child that
        // is itself binary always needs parentheses, a left child only
        // when it mixes the other operator.
        let binary = |f: &mut fmt::Formatter<'_>, a: &Formula, op: char, b: &Formula, here: BinOp| {
            if a.needs_parens_under(here) {
                write!(f, "({})", a)?;
            } else {
                write!(f, "{}", a)?;
            }
            write!(f, "{}", op)?;
            if matches!(b, Formula::And(_, _) | Formula::Or(_, _)) {
                write!(f, "({})", b)
            } else {
                write!(f, "{}", b)
            }
        };
        match self {
            Formula::Atom(v) => write!(f, "{}", v),
            Formula::Top => write!(f, "T"),
            Formula::Bot => write!(f, "F"),
            Formula::And(a, b) => binary(f, a, '&', b, BinOp::And),
            Formula::Or(a, b) => binary(f, a, '|', b, BinOp::Or),
            Formula::Box_(a) => match **a {
                Formula::And(_, _) | Formula::Or(_, _) => write!(f, "[]({})", a),
                _ => write!(f, "[]{}", a),
            },
            Formula::Dia(a) => match **a {
                Formula::And(_, _) | Formula::Or(_, _) => write!(f, "<>({})", a),
                _ => write!(f, "<>{}", a),
            },
        }
    }
}

/// A term of the extended language: modal depth at most one over a nominal
/// or a conominal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    /// `j`
    Nom(VarId),
    /// `<>j`
    DiaN(VarId),
    /// `<#>j`
    BDiaN(VarId),
    /// `m`
    CoNom(VarId),
    /// `[]m`
    BoxC(VarId),
    /// `[#]m`
    BBoxC(VarId),
}

impl Term {
    pub fn var(&self) -> VarId {
        match *self {
            Term::Nom(v) | Term::DiaN(v) | Term::BDiaN(v) => v,
            Term::CoNom(v) | Term::BoxC(v) | Term::BBoxC(v) => v,
        }
    }

    /// True for `j`, `<>j`, `<#>j`.
    pub fn is_nominal_term(&self) -> bool {
        matches!(self, Term::Nom(_) | Term::DiaN(_) | Term::BDiaN(_))
    }

    pub fn is_bare(&self) -> bool {
        matches!(self, Term::Nom(_) | Term::CoNom(_))
    }

    pub fn rename(&self, map: &BTreeMap<VarId, VarId>) -> Term {
        let sub = |v: VarId| *map.get(&v).unwrap_or(&v);
        match *self {
            Term::Nom(v) => Term::Nom(sub(v)),
            Term::DiaN(v) => Term::DiaN(sub(v)),
            Term::BDiaN(v) => Term::BDiaN(sub(v)),
            Term::CoNom(v) => Term::CoNom(sub(v)),
            Term::BoxC(v) => Term::BoxC(sub(v)),
            Term::BBoxC(v) => Term::BBoxC(sub(v)),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Nom(v) | Term::CoNom(v) => write!(f, "{}", v),
            Term::DiaN(v) => write!(f, "<>{}", v),
            Term::BDiaN(v) => write!(f, "<#>{}", v),
            Term::BoxC(v) => write!(f, "[]{}", v),
            Term::BBoxC(v) => write!(f, "[#]{}", v),
        }
    }
}

/// A structure: a labelled formula or a pure structure.
///
/// `PureJ(j, t)` is only well-formed when `j` does not occur in `t`, and
/// dually for `PureM`. Use [`Structure::pure_j`] / [`Structure::pure_m`]
/// to construct checked values.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Structure {
    /// `j <= A`
    LabJ(VarId, Formula),
    /// `A <= m`
    LabM(Formula, VarId),
    /// `j <= T`
    PureJ(VarId, Term),
    /// `T <= m`
    PureM(Term, VarId),
}

impl Structure {
    pub fn pure_j(j: VarId, t: Term) -> Result<Structure, WfError> {
        debug_assert_eq!(j.kind, VarKind::Nominal);
        if t.var() == j {
            return Err(WfError::VarInOwnTerm { var: j, term: t.to_string() });
        }
        Ok(Structure::PureJ(j, t))
    }

    pub fn pure_m(t: Term, m: VarId) -> Result<Structure, WfError> {
        debug_assert_eq!(m.kind, VarKind::Conominal);
        if t.var() == m {
            return Err(WfError::VarInOwnTerm { var: m, term: t.to_string() });
        }
        // `j <= m` with both sides bare has one canonical reading.
        if let Term::Nom(j) = t {
            return Ok(Structure::PureJ(j, Term::CoNom(m)));
        }
        Ok(Structure::PureM(t, m))
    }

    /// The canonical pure structure for `j <= m` with both sides bare is
    /// `PureJ(j, m)`.
    pub fn pure(lhs: Term, rhs: Term) -> Result<Structure, WfError> {
        match (lhs, rhs) {
            (Term::Nom(j), t) => Structure::pure_j(j, t),
            (t, Term::CoNom(m)) => Structure::pure_m(t, m),
            (l, r) => Err(WfError::BadPure { lhs: l.to_string(), rhs: r.to_string() }),
        }
    }

    pub fn is_labelled(&self) -> bool {
        matches!(self, Structure::LabJ(_, _) | Structure::LabM(_, _))
    }

    /// The nominal or conominal that approximates this structure: the `j`
    /// of `j <= A` / `j <= T`, the `m` of `A <= m` / `T <= m`.
    pub fn approximant(&self) -> VarId {
        match self {
            Structure::LabJ(j, _) | Structure::PureJ(j, _) => *j,
            Structure::LabM(_, m) | Structure::PureM(_, m) => *m,
        }
    }

    pub fn formula(&self) -> Option<&Formula> {
        match self {
            Structure::LabJ(_, a) | Structure::LabM(a, _) => Some(a),
            _ => None,
        }
    }

    pub fn term(&self) -> Option<Term> {
        match self {
            Structure::PureJ(_, t) | Structure::PureM(t, _) => Some(*t),
            _ => None,
        }
    }

    /// Nominals and conominals occurring in this structure, with a flag
    /// that is true when the occurrence is the approximant.
    pub fn term_vars(&self) -> Vec<(VarId, bool)> {
        match self {
            Structure::LabJ(j, _) => vec![(*j, true)],
            Structure::LabM(_, m) => vec![(*m, true)],
            Structure::PureJ(j, t) => vec![(*j, true), (t.var(), false)],
            Structure::PureM(t, m) => vec![(*m, true), (t.var(), false)],
        }
    }

    pub fn props(&self) -> Vec<VarId> {
        self.formula().map(|f| f.props()).unwrap_or_default()
    }

    pub fn rename(&self, map: &BTreeMap<VarId, VarId>) -> Structure {
        let sub = |v: VarId| *map.get(&v).unwrap_or(&v);
        match self {
            Structure::LabJ(j, a) => Structure::LabJ(sub(*j), a.clone()),
            Structure::LabM(a, m) => Structure::LabM(a.clone(), sub(*m)),
            Structure::PureJ(j, t) => Structure::PureJ(sub(*j), t.rename(map)),
            Structure::PureM(t, m) => Structure::PureM(t.rename(map), sub(*m)),
        }
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Structure::LabJ(j, a) => write!(f, "{} <= {}", j, a),
            Structure::LabM(a, m) => write!(f, "{} <= {}", a, m),
            Structure::PureJ(j, t) => write!(f, "{} <= {}", j, t),
            Structure::PureM(t, m) => write!(f, "{} <= {}", t, m),
        }
    }
}

/// Side of a sequent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Side {
    Ant,
    Con,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::Ant => Side::Con,
            Side::Con => Side::Ant,
        }
    }
}

/// Locator of a structure occurrence inside a sequent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Loc {
    pub side: Side,
    pub index: usize,
}

impl Loc {
    pub fn ant(index: usize) -> Loc {
        Loc { side: Side::Ant, index }
    }
    pub fn con(index: usize) -> Loc {
        Loc { side: Side::Con, index }
    }
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.side {
            Side::Ant => write!(f, "ant:{}", self.index),
            Side::Con => write!(f, "con:{}", self.index),
        }
    }
}

impl std::str::FromStr for Loc {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (side, idx) = s.split_once(':').ok_or_else(|| format!("bad locator `{}`", s))?;
        let index: usize = idx.trim().parse().map_err(|_| format!("bad locator index `{}`", idx))?;
        match side.trim() {
            "ant" => Ok(Loc::ant(index)),
            "con" => Ok(Loc::con(index)),
            _ => Err(format!("bad locator side `{}`", side)),
        }
    }
}

/// Position of an occurrence: precedent or succedent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Position {
    Precedent,
    Succedent,
}

impl Position {
    pub fn flip(self) -> Position {
        match self {
            Position::Precedent => Position::Succedent,
            Position::Succedent => Position::Precedent,
        }
    }
}

/// A sequent: ordered lists of structures around the turnstile. Order is
/// significant for canonical-form operations; rule matching treats both
/// sides as multisets.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Sequent {
    pub ant: Vec<Structure>,
    pub con: Vec<Structure>,
}

impl Sequent {
    pub fn new(ant: Vec<Structure>, con: Vec<Structure>) -> Sequent {
        Sequent { ant, con }
    }

    pub fn get(&self, loc: Loc) -> Option<&Structure> {
        match loc.side {
            Side::Ant => self.ant.get(loc.index),
            Side::Con => self.con.get(loc.index),
        }
    }

    pub fn side(&self, side: Side) -> &[Structure] {
        match side {
            Side::Ant => &self.ant,
            Side::Con => &self.con,
        }
    }

    pub fn len(&self) -> usize {
        self.ant.len() + self.con.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn locs(&self) -> Vec<Loc> {
        let mut out: Vec<Loc> = (0..self.ant.len()).map(Loc::ant).collect();
        out.extend((0..self.con.len()).map(Loc::con));
        out
    }

    /// Position of the structure occurrence at `loc`.
    pub fn position_of(&self, loc: Loc) -> Option<Position> {
        let s = self.get(loc)?;
        Some(position_of_structure(s, loc.side))
    }

    /// Every nominal/conominal occurrence, grouped by variable, with its
    /// locator and computed polarity. Approximant occurrences carry the
    /// position of their structure; occurrences inside the term of a pure
    /// structure carry the opposite.
    pub fn var_profile(&self) -> BTreeMap<VarId, Vec<(Loc, Position)>> {
        let mut out: BTreeMap<VarId, Vec<(Loc, Position)>> = BTreeMap::new();
        for loc in self.locs() {
            let s = self.get(loc).unwrap();
            let pos = position_of_structure(s, loc.side);
            for (v, is_approx) in s.term_vars() {
                let p = if is_approx { pos } else { pos.flip() };
                out.entry(v).or_default().push((loc, p));
            }
        }
        out
    }

    /// Every nominal or conominal occurs exactly twice, with opposite
    /// polarity.
    pub fn exact_two(&self) -> Result<(), String> {
        for (v, occ) in self.var_profile() {
            if occ.len() != 2 {
                return Err(format!("{} occurs {} time(s), expected 2", v, occ.len()));
            }
            if occ[0].1 == occ[1].1 {
                return Err(format!("both occurrences of {} are {:?}", v, occ[0].1));
            }
        }
        Ok(())
    }

    pub fn term_vars(&self) -> Vec<VarId> {
        let mut out = Vec::new();
        for loc in self.locs() {
            for (v, _) in self.get(loc).unwrap().term_vars() {
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        out
    }

    pub fn props(&self) -> Vec<VarId> {
        let mut out = Vec::new();
        for loc in self.locs() {
            for v in self.get(loc).unwrap().props() {
                if !out.contains(&v) {
                    out.push(v);
                }
            }
        }
        out
    }

    pub fn contains_var(&self, v: VarId) -> bool {
        self.term_vars().contains(&v)
    }

    pub fn rename(&self, map: &BTreeMap<VarId, VarId>) -> Sequent {
        Sequent {
            ant: self.ant.iter().map(|s| s.rename(map)).collect(),
            con: self.con.iter().map(|s| s.rename(map)).collect(),
        }
    }

    /// Multiset equality of both sides.
    pub fn multiset_eq(&self, other: &Sequent) -> bool {
        let sorted = |v: &[Structure]| {
            let mut v = v.to_vec();
            v.sort();
            v
        };
        sorted(&self.ant) == sorted(&other.ant) && sorted(&self.con) == sorted(&other.con)
    }

    /// Renames nominals and conominals to a canonical numbering determined
    /// by first occurrence over the sorted multiset. Two sequents are
    /// alpha-equivalent iff their canonicalizations are multiset-equal.
    pub fn alpha_canonical(&self) -> Sequent {
        let mut sorted = self.clone();
        sorted.ant.sort();
        sorted.con.sort();
        let mut map = BTreeMap::new();
        let mut next_j = 1u32;
        let mut next_m = 0u32;
        for loc in sorted.locs() {
            for (v, _) in sorted.get(loc).unwrap().term_vars() {
                map.entry(v).or_insert_with(|| match v.kind {
                    VarKind::Nominal => {
                        let id = VarId::nom(next_j);
                        next_j += 2;
                        id
                    }
                    VarKind::Conominal => {
                        let id = VarId::conom(next_m);
                        next_m += 2;
                        id
                    }
                    VarKind::Prop => v,
                });
            }
        }
        let mut out = sorted.rename(&map);
        out.ant.sort();
        out.con.sort();
        out
    }

    pub fn alpha_eq(&self, other: &Sequent) -> bool {
        self.alpha_canonical() == other.alpha_canonical()
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |xs: &[Structure]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(", ");
        if self.ant.is_empty() {
            write!(f, "|- {}", join(&self.con))
        } else if self.con.is_empty() {
            write!(f, "{} |-", join(&self.ant))
        } else {
            write!(f, "{} |- {}", join(&self.ant), join(&self.con))
        }
    }
}

/// Position table from the structure kind and the side it occurs on.
pub fn position_of_structure(s: &Structure, side: Side) -> Position {
    match (s, side) {
        (Structure::LabJ(_, _), Side::Ant) => Position::Precedent,
        (Structure::LabJ(_, _), Side::Con) => Position::Succedent,
        (Structure::LabM(_, _), Side::Con) => Position::Precedent,
        (Structure::LabM(_, _), Side::Ant) => Position::Succedent,
        (Structure::PureJ(_, _), Side::Ant) => Position::Precedent,
        (Structure::PureJ(_, _), Side::Con) => Position::Succedent,
        (Structure::PureM(_, _), Side::Ant) => Position::Succedent,
        (Structure::PureM(_, _), Side::Con) => Position::Precedent,
    }
}

/// Checked renaming of a sequent: `map` must be kind-preserving and
/// injective, and must not map onto a variable that occurs in the sequent
/// but is not itself renamed.
pub fn rename_sequent(s: &Sequent, map: &BTreeMap<VarId, VarId>) -> Result<Sequent, WfError> {
    check_renaming(&s.term_vars(), map)?;
    Ok(s.rename(map))
}

pub fn check_renaming(vars: &[VarId], map: &BTreeMap<VarId, VarId>) -> Result<(), WfError> {
    let mut targets = Vec::new();
    for (from, to) in map {
        if from.kind != to.kind {
            return Err(WfError::KindChange { from: *from, to: *to });
        }
        if targets.contains(to) {
            return Err(WfError::RenameCollision { var: *to });
        }
        targets.push(*to);
    }
    for v in vars {
        if map.contains_key(v) {
            continue;
        }
        if targets.contains(v) {
            return Err(WfError::RenameCollision { var: *v });
        }
    }
    Ok(())
}

/// Generator of fresh term variables: nominals get odd indices, conominals
/// even indices, each strictly increasing.
#[derive(Debug, Clone, Default)]
pub struct FreshGen {
    next_nom: u32,
    next_conom: u32,
}

impl FreshGen {
    pub fn new() -> FreshGen {
        FreshGen { next_nom: 1, next_conom: 0 }
    }

    /// Generator whose next outputs avoid everything in `vars`.
    pub fn above(vars: &[VarId]) -> FreshGen {
        let mut g = FreshGen::new();
        for v in vars {
            g.note(*v);
        }
        g
    }

    pub fn note(&mut self, v: VarId) {
        match v.kind {
            VarKind::Nominal => self.next_nom = self.next_nom.max(v.index + 2),
            VarKind::Conominal => self.next_conom = self.next_conom.max(v.index + 2),
            VarKind::Prop => {}
        }
    }

    pub fn fresh(&mut self, kind: VarKind) -> VarId {
        match kind {
            VarKind::Nominal => {
                let v = VarId::nom(self.next_nom);
                self.next_nom += 2;
                v
            }
            VarKind::Conominal => {
                let v = VarId::conom(self.next_conom);
                self.next_conom += 2;
                v
            }
            VarKind::Prop => unreachable!("fresh proposition variables are never needed"),
        }
    }
}

/// Smallest variable of `kind` not occurring in `avoid` (nominals odd,
/// conominals even).
pub fn smallest_compatible(kind: VarKind, avoid: &[VarId]) -> VarId {
    let start = match kind {
        VarKind::Nominal => 1,
        VarKind::Conominal => 0,
        VarKind::Prop => unreachable!(),
    };
    let mut i = start;
    loop {
        let v = VarId { kind, index: i };
        if !avoid.contains(&v) {
            return v;
        }
        i += 2;
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Parser<'a> {
        Parser { src: src.as_bytes(), pos: 0 }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(s.as_bytes()) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), SyntaxError> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(self.err(&format!("expected `{}`", s)))
        }
    }

    fn err(&self, msg: &str) -> SyntaxError {
        SyntaxError { pos: self.pos, msg: msg.to_string() }
    }

    fn index(&mut self) -> Result<u32, SyntaxError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected a variable index"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| self.err("variable index out of range"))
    }

    fn var(&mut self) -> Result<VarId, SyntaxError> {
        self.skip_ws();
        let c = self.src.get(self.pos).copied();
        self.pos += 1;
        match c {
            Some(b'p') => Ok(VarId::prop(self.index()?)),
            Some(b'q') => Ok(VarId::prop_q(self.index()?)),
            Some(b'j') => Ok(VarId { kind: VarKind::Nominal, index: self.index()? }),
            Some(b'm') => Ok(VarId { kind: VarKind::Conominal, index: self.index()? }),
            _ => {
                self.pos -= 1;
                Err(self.err("expected a variable"))
            }
        }
    }

    /// A primary operand: unary-prefixed, parenthesized, or atomic; no
    /// binary tail.
    fn primary(&mut self) -> Result<Operand, SyntaxError> {
        self.skip_ws();
        let p = self.pos;
        if self.eat("<#>") {
            let v = self.var()?;
            if v.kind != VarKind::Nominal {
                return Err(SyntaxError { pos: p, msg: format!("<#> applies to a nominal, got {}", v) });
            }
            return Ok(Operand::Term(Term::BDiaN(v)));
        }
        if self.eat("[#]") {
            let v = self.var()?;
            if v.kind != VarKind::Conominal {
                return Err(SyntaxError { pos: p, msg: format!("[#] applies to a conominal, got {}", v) });
            }
            return Ok(Operand::Term(Term::BBoxC(v)));
        }
        if self.eat("<>") {
            return match self.primary()? {
                Operand::Term(Term::Nom(v)) => Ok(Operand::Term(Term::DiaN(v))),
                Operand::Term(t) => Err(SyntaxError { pos: p, msg: format!("<> on term {} exceeds depth one", t) }),
                Operand::Formula(f) => Ok(Operand::Formula(Formula::dia(f))),
            };
        }
        if self.eat("[]") {
            return match self.primary()? {
                Operand::Term(Term::CoNom(v)) => Ok(Operand::Term(Term::BoxC(v))),
                Operand::Term(t) => Err(SyntaxError { pos: p, msg: format!("[] on term {} exceeds depth one", t) }),
                Operand::Formula(f) => Ok(Operand::Formula(Formula::box_(f))),
            };
        }
        if self.eat("(") {
            let f = self.formula()?;
            self.expect(")")?;
            return Ok(Operand::Formula(f));
        }
        match self.peek() {
            Some(b'T') => {
                self.pos += 1;
                Ok(Operand::Formula(Formula::Top))
            }
            Some(b'F') => {
                self.pos += 1;
                Ok(Operand::Formula(Formula::Bot))
            }
            Some(b'p') | Some(b'q') => {
                let v = self.var()?;
                Ok(Operand::Formula(Formula::Atom(v)))
            }
            Some(b'j') => {
                let v = self.var()?;
                Ok(Operand::Term(Term::Nom(v)))
            }
            Some(b'm') => {
                let v = self.var()?;
                Ok(Operand::Term(Term::CoNom(v)))
            }
            _ => Err(self.err("expected a formula or a term")),
        }
    }

    /// One side of a structure: either a formula (with binary tail) or a
    /// term.
    fn operand(&mut self) -> Result<Operand, SyntaxError> {
        match self.primary()? {
            Operand::Formula(f) => self.binop_tail(f).map(Operand::Formula),
            t => Ok(t),
        }
    }

    fn binop_tail(&mut self, first: Formula) -> Result<Formula, SyntaxError> {
        let mut acc = first;
        let op = match self.peek() {
            Some(b'&') => Some(BinOp::And),
            Some(b'|') if !self.src[self.pos..].starts_with(b"|-") => Some(BinOp::Or),
            _ => None,
        };
        let Some(op) = op else { return Ok(acc) };
        loop {
            match (op, self.peek()) {
                (BinOp::And, Some(b'&')) => {
                    self.pos += 1;
                    let rhs = self.formula_factor()?;
                    acc = Formula::and(acc, rhs);
                }
                (BinOp::Or, Some(b'|')) if !self.src[self.pos..].starts_with(b"|-") => {
                    self.pos += 1;
                    let rhs = self.formula_factor()?;
                    acc = Formula::or(acc, rhs);
                }
                (BinOp::And, Some(b'|')) if !self.src[self.pos..].starts_with(b"|-") => {
                    return Err(self.err("mixing & and | requires parentheses"));
                }
                (BinOp::Or, Some(b'&')) => {
                    return Err(self.err("mixing & and | requires parentheses"));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn formula_factor(&mut self) -> Result<Formula, SyntaxError> {
        let p = self.pos;
        match self.primary()? {
            Operand::Formula(f) => Ok(f),
            Operand::Term(t) => Err(SyntaxError { pos: p, msg: format!("expected a formula, got term {}", t) }),
        }
    }

    fn formula(&mut self) -> Result<Formula, SyntaxError> {
        let f = self.formula_factor()?;
        self.binop_tail(f)
    }

    fn structure(&mut self) -> Result<Structure, crate::error::ParseError> {
        let lhs = self.operand()?;
        self.expect("<=")?;
        let rhs = self.operand()?;
        Ok(classify_structure(lhs, rhs)?)
    }

    fn structures(&mut self) -> Result<Vec<Structure>, crate::error::ParseError> {
        let mut out = vec![self.structure()?];
        while self.eat(",") {
            out.push(self.structure()?);
        }
        Ok(out)
    }

    fn sequent(&mut self) -> Result<Sequent, crate::error::ParseError> {
        let ant = if matches!(self.peek(), Some(b'|')) && self.src[self.pos..].starts_with(b"|-") {
            Vec::new()
        } else {
            self.structures()?
        };
        self.expect("|-")?;
        let con = if self.peek().is_none() { Vec::new() } else { self.structures()? };
        self.skip_ws();
        if self.pos != self.src.len() {
            return Err(self.err("trailing input").into());
        }
        Ok(Sequent::new(ant, con))
    }
}

enum Operand {
    Formula(Formula),
    Term(Term),
}

fn classify_structure(lhs: Operand, rhs: Operand) -> Result<Structure, WfError> {
    match (lhs, rhs) {
        (Operand::Term(Term::Nom(j)), Operand::Formula(a)) => Ok(Structure::LabJ(j, a)),
        (Operand::Formula(a), Operand::Term(Term::CoNom(m))) => Ok(Structure::LabM(a, m)),
        (Operand::Term(l), Operand::Term(r)) => Structure::pure(l, r),
        (Operand::Formula(a), Operand::Formula(b)) => {
            Err(WfError::BadPure { lhs: a.to_string(), rhs: b.to_string() })
        }
        (Operand::Formula(a), Operand::Term(t)) => {
            Err(WfError::BadPure { lhs: a.to_string(), rhs: t.to_string() })
        }
        (Operand::Term(t), Operand::Formula(a)) => {
            Err(WfError::BadPure { lhs: t.to_string(), rhs: a.to_string() })
        }
    }
}

/// Parse a sequent from its textual form.
pub fn parse_sequent(text: &str) -> Result<Sequent, crate::error::ParseError> {
    let mut p = Parser::new(text);
    p.sequent()
}

/// Parse a single structure, e.g. `j1 <= []p0`.
pub fn parse_structure(text: &str) -> Result<Structure, crate::error::ParseError> {
    let mut p = Parser::new(text);
    let s = p.structure()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("trailing input").into());
    }
    Ok(s)
}

/// Parse a formula, e.g. `<>(p0|q0)`. Used by the correspondence engine.
pub fn parse_formula(text: &str) -> Result<Formula, crate::error::ParseError> {
    let mut p = Parser::new(text);
    let f = p.formula()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("trailing input").into());
    }
    Ok(f)
}

/// Parse an inequality `A <= B` between formulas.
pub fn parse_inequality(text: &str) -> Result<(Formula, Formula), crate::error::ParseError> {
    let mut p = Parser::new(text);
    let lhs = p.formula()?;
    p.expect("<=")?;
    let rhs = p.formula()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("trailing input").into());
    }
    Ok((lhs, rhs))
}

/// Parse a term, e.g. `<#>j1`.
pub fn parse_term(text: &str) -> Result<Term, crate::error::ParseError> {
    let mut p = Parser::new(text);
    match p.operand()? {
        Operand::Term(t) => {
            p.skip_ws();
            if p.pos != p.src.len() {
                return Err(p.err("trailing input").into());
            }
            Ok(t)
        }
        Operand::Formula(f) => Err(SyntaxError { pos: 0, msg: format!("expected a term, got formula {}", f) }.into()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(s: &str) -> Sequent {
        parse_sequent(s).unwrap()
    }

    #[test]
    fn parses_identity_sequent() {
        let s = seq("j1 <= []p0 |- j1 <= []p0");
        assert_eq!(s.ant, vec![Structure::LabJ(VarId::nom(1), Formula::box_(Formula::atom(0)))]);
        assert_eq!(s.ant, s.con);
    }

    #[test]
    fn parses_box_p_conclusion() {
        let s = seq("j1 <= []p0, p0 <= m0 |- j1 <= []m0");
        assert_eq!(s.ant.len(), 2);
        assert_eq!(s.ant[1], Structure::LabM(Formula::atom(0), VarId::conom(0)));
        assert_eq!(s.con, vec![Structure::PureJ(VarId::nom(1), Term::BoxC(VarId::conom(0)))]);
    }

    #[test]
    fn rejects_variable_in_own_term() {
        let e = parse_sequent("j1 <= <>j1 |- j1 <= m0").unwrap_err();
        assert!(matches!(e, crate::error::ParseError::WellFormedness(_)), "{e}");
    }

    #[test]
    fn syntax_error_carries_position() {
        let e = parse_sequent("j1 <= ( |- j1 <= p0").unwrap_err();
        match e {
            crate::error::ParseError::Syntax(se) => assert!(se.pos > 0),
            other => panic!("expected syntax error, got {other}"),
        }
    }

    #[test]
    fn mixing_and_or_requires_parens() {
        assert!(parse_formula("p0 & q0 | p1").is_err());
        assert!(parse_formula("(p0 & q0) | p1").is_ok());
    }

    #[test]
    fn print_dia_distribution_end_sequent() {
        let s = Sequent::new(
            vec![Structure::LabM(Formula::dia(Formula::atom(0)), VarId::conom(0))],
            vec![Structure::LabM(Formula::dia(Formula::dia(Formula::atom(0))), VarId::conom(0))],
        );
        assert_eq!(s.to_string(), "<>p0 <= m0 |- <><>p0 <= m0");
    }

    #[test]
    fn print_empty_antecedent() {
        let s = Sequent::new(vec![], vec![Structure::LabJ(VarId::nom(1), Formula::Top)]);
        assert_eq!(s.to_string(), "|- j1 <= T");
    }

    #[test]
    fn position_table_all_eight_cases() {
        use Position::*;
        let labj = Structure::LabJ(VarId::nom(1), Formula::box_(Formula::atom(0)));
        let labm = Structure::LabM(Formula::atom(0), VarId::conom(0));
        let purej = Structure::PureJ(VarId::nom(1), Term::CoNom(VarId::conom(0)));
        let purem = Structure::PureM(Term::DiaN(VarId::nom(1)), VarId::conom(0));
        let cases = [
            (labj.clone(), Side::Ant, Precedent),
            (labj, Side::Con, Succedent),
            (labm.clone(), Side::Con, Precedent),
            (labm, Side::Ant, Succedent),
            (purej.clone(), Side::Ant, Precedent),
            (purej, Side::Con, Succedent),
            (purem.clone(), Side::Ant, Succedent),
            (purem, Side::Con, Precedent),
        ];
        for (s, side, want) in cases {
            assert_eq!(position_of_structure(&s, side), want, "{s} on {side:?}");
        }
    }

    #[test]
    fn var_profile_identity() {
        let s = seq("j1 <= p0 |- j1 <= p0");
        let prof = s.var_profile();
        assert_eq!(
            prof[&VarId::nom(1)],
            vec![(Loc::ant(0), Position::Precedent), (Loc::con(0), Position::Succedent)]
        );
    }

    #[test]
    fn var_profile_rule4_conclusion() {
        // h <= <>j in the antecedent pairs with <>h <= m in the consequent.
        let s = seq("j1 <= p0, <>p0 <= m0, j3 <= <>j1 |- <>j3 <= m0");
        let prof = s.var_profile();
        let h = &prof[&VarId::nom(3)];
        assert_eq!(h.len(), 2);
        assert_ne!(h[0].1, h[1].1);
        assert!(s.exact_two().is_ok());
    }

    #[test]
    fn exact_two_rejects_same_polarity() {
        let s = seq("j1 <= p0, j1 <= q0 |- p0 <= m0");
        assert!(s.exact_two().is_err());
    }

    #[test]
    fn rename_simple_and_swap() {
        let s = seq("j3 <= []p0 |- p0 <= m0");
        let mut map = BTreeMap::new();
        map.insert(VarId::nom(3), VarId::nom(1));
        assert_eq!(rename_sequent(&s, &map).unwrap().to_string(), "j1 <= []p0 |- p0 <= m0");

        let s2 = seq("j1 <= <#>j3, j3 <= p0 |- j1 <= m0");
        let mut swap = BTreeMap::new();
        swap.insert(VarId::nom(1), VarId::nom(3));
        swap.insert(VarId::nom(3), VarId::nom(1));
        let r = rename_sequent(&s2, &swap).unwrap();
        assert_eq!(r.to_string(), "j3 <= <#>j1, j1 <= p0 |- j3 <= m0");
    }

    #[test]
    fn rename_rejects_capture() {
        let s = seq("j1 <= p0, j3 <= <>j1 |- <>j3 <= m0");
        let mut map = BTreeMap::new();
        map.insert(VarId::nom(1), VarId::nom(3));
        assert!(rename_sequent(&s, &map).is_err());
    }

    #[test]
    fn fresh_generator_parity() {
        let mut g = FreshGen::new();
        assert_eq!(g.fresh(VarKind::Nominal), VarId::nom(1));
        assert_eq!(g.fresh(VarKind::Nominal), VarId::nom(3));
        assert_eq!(g.fresh(VarKind::Conominal), VarId::conom(0));
        assert_eq!(g.fresh(VarKind::Conominal), VarId::conom(2));
    }

    #[test]
    fn bare_pure_structure_is_canonicalized() {
        // `j1 <= m0` has two readings; the parser fixes PureJ.
        let s = seq("j1 <= m0 |- p0 <= m0");
        assert_eq!(s.ant[0], Structure::PureJ(VarId::nom(1), Term::CoNom(VarId::conom(0))));
    }
}
