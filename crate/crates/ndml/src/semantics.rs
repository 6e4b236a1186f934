//! The finite-lattice semantic oracle: bounded lattices with normal
//! box/diamond expansions, computed adjoints, join/meet-irreducibles,
//! validity of sequents and quasi-inequalities, countermodel search, and
//! a deterministic model stream.

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::alba::{QBody, Quantifier, QuasiInequality, SimpleTerm};
use crate::error::ModelError;
use crate::syntax::{Formula, Sequent, Structure, Term, VarId, VarKind};

/// A finite bounded lattice with a normal box/diamond expansion.
/// Elements are indices `0..size`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeModel {
    pub name: String,
    pub size: usize,
    /// Row-major order relation: `leq[x * size + y]` iff x <= y.
    pub leq: Vec<bool>,
    pub box_: Vec<usize>,
    pub dia: Vec<usize>,
    #[serde(skip)]
    meet: Vec<usize>,
    #[serde(skip)]
    join: Vec<usize>,
    #[serde(skip)]
    pub top: usize,
    #[serde(skip)]
    pub bot: usize,
}

impl LatticeModel {
    pub fn new(
        name: impl Into<String>,
        size: usize,
        leq: Vec<bool>,
        box_: Vec<usize>,
        dia: Vec<usize>,
    ) -> Result<LatticeModel, ModelError> {
        let mut m = LatticeModel {
            name: name.into(),
            size,
            leq,
            box_,
            dia,
            meet: vec![],
            join: vec![],
            top: 0,
            bot: 0,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn leq(&self, x: usize, y: usize) -> bool {
        self.leq[x * self.size + y]
    }

    pub fn meet(&self, x: usize, y: usize) -> usize {
        self.meet[x * self.size + y]
    }

    pub fn join(&self, x: usize, y: usize) -> usize {
        self.join[x * self.size + y]
    }

    pub fn meet_all(&self, xs: impl IntoIterator<Item = usize>) -> usize {
        xs.into_iter().fold(self.top, |a, b| self.meet(a, b))
    }

    pub fn join_all(&self, xs: impl IntoIterator<Item = usize>) -> usize {
        xs.into_iter().fold(self.bot, |a, b| self.join(a, b))
    }

    /// Validates the order, computes meet/join tables and bounds, and
    /// checks normality of the operators.
    pub fn validate(&mut self) -> Result<(), ModelError> {
        let n = self.size;
        if n == 0 || self.leq.len() != n * n {
            return Err(ModelError::Malformed("size/leq mismatch".into()));
        }
        if self.box_.len() != n || self.dia.len() != n {
            return Err(ModelError::Malformed("operator table size mismatch".into()));
        }
        if self.box_.iter().chain(self.dia.iter()).any(|&x| x >= n) {
            return Err(ModelError::Malformed("operator value out of range".into()));
        }
        // Partial order.
        for x in 0..n {
            if !self.leq(x, x) {
                return Err(ModelError::NotALattice(format!("{} not reflexive", x)));
            }
            for y in 0..n {
                if self.leq(x, y) && self.leq(y, x) && x != y {
                    return Err(ModelError::NotALattice(format!("{} and {} antisymmetry", x, y)));
                }
                for z in 0..n {
                    if self.leq(x, y) && self.leq(y, z) && !self.leq(x, z) {
                        return Err(ModelError::NotALattice(format!("{} {} {} transitivity", x, y, z)));
                    }
                }
            }
        }
        // Unique meets and joins.
        let mut meet = vec![0usize; n * n];
        let mut join = vec![0usize; n * n];
        for x in 0..n {
            for y in 0..n {
                let lower: Vec<usize> =
                    (0..n).filter(|&z| self.leq(z, x) && self.leq(z, y)).collect();
                let glb = lower
                    .iter()
                    .copied()
                    .find(|&g| lower.iter().all(|&z| self.leq(z, g)));
                let upper: Vec<usize> =
                    (0..n).filter(|&z| self.leq(x, z) && self.leq(y, z)).collect();
                let lub = upper
                    .iter()
                    .copied()
                    .find(|&g| upper.iter().all(|&z| self.leq(g, z)));
                match (glb, lub) {
                    (Some(g), Some(l)) => {
                        meet[x * n + y] = g;
                        join[x * n + y] = l;
                    }
                    _ => {
                        return Err(ModelError::NotALattice(format!(
                            "{} and {} lack a meet or join",
                            x, y
                        )))
                    }
                }
            }
        }
        self.meet = meet;
        self.join = join;
        let bot = (0..n)
            .find(|&b| (0..n).all(|x| self.leq(b, x)))
            .ok_or_else(|| ModelError::NotALattice("no bottom".into()))?;
        let top = (0..n)
            .find(|&t| (0..n).all(|x| self.leq(x, t)))
            .ok_or_else(|| ModelError::NotALattice("no top".into()))?;
        self.bot = bot;
        self.top = top;
        // Normality.
        if self.box_[top] != top {
            return Err(ModelError::NotNormal("box does not fix top".into()));
        }
        if self.dia[bot] != bot {
            return Err(ModelError::NotNormal("diamond does not fix bottom".into()));
        }
        for x in 0..n {
            for y in 0..n {
                if self.box_[self.meet(x, y)] != self.meet(self.box_[x], self.box_[y]) {
                    return Err(ModelError::NotNormal(format!("box over meet of {} and {}", x, y)));
                }
                if self.dia[self.join(x, y)] != self.join(self.dia[x], self.dia[y]) {
                    return Err(ModelError::NotNormal(format!("diamond over join of {} and {}", x, y)));
                }
            }
        }
        Ok(())
    }

    /// The adjoint tables: the left adjoint of box and the right adjoint
    /// of diamond.
    pub fn adjoints(&self) -> (Vec<usize>, Vec<usize>) {
        let n = self.size;
        // bdia u = meet { v : u <= box v }
        let bdia: Vec<usize> = (0..n)
            .map(|u| self.meet_all((0..n).filter(|&v| self.leq(u, self.box_[v]))))
            .collect();
        // bbox u = join { v : dia v <= u }
        let bbox: Vec<usize> = (0..n)
            .map(|u| self.join_all((0..n).filter(|&v| self.leq(self.dia[v], u))))
            .collect();
        (bdia, bbox)
    }

    /// Completely join-irreducible and meet-irreducible elements.
    pub fn irreducibles(&self) -> (Vec<usize>, Vec<usize>) {
        let n = self.size;
        let jinf: Vec<usize> = (0..n)
            .filter(|&j| {
                j != self.bot && self.join_all((0..n).filter(|&x| self.leq(x, j) && x != j)) != j
            })
            .collect();
        let minf: Vec<usize> = (0..n)
            .filter(|&m| {
                m != self.top && self.meet_all((0..n).filter(|&x| self.leq(m, x) && x != m)) != m
            })
            .collect();
        (jinf, minf)
    }

    /// Does the model satisfy an extension axiom (checked directly as a
    /// lattice inequality for all elements)?
    pub fn satisfies_axiom(&self, ax: crate::calculus::Axiom) -> bool {
        use crate::calculus::Axiom::*;
        let n = self.size;
        (0..n).all(|x| match ax {
            Four => self.leq(self.dia[self.dia[x]], self.dia[x]),
            T => self.leq(self.box_[x], x),
            B => self.leq(x, self.box_[self.dia[x]]),
            D => self.leq(self.box_[x], self.dia[x]),
            C => self.leq(self.dia[self.box_[x]], self.box_[self.dia[x]]),
        })
    }

    pub fn satisfies_sigma(&self, sigma: &std::collections::BTreeSet<crate::calculus::Axiom>) -> bool {
        sigma.iter().all(|&ax| self.satisfies_axiom(ax))
    }

    pub fn is_distributive(&self) -> bool {
        let n = self.size;
        (0..n).all(|x| {
            (0..n).all(|y| {
                (0..n).all(|z| self.meet(x, self.join(y, z)) == self.join(self.meet(x, y), self.meet(x, z)))
            })
        })
    }
}

/// An assignment: proposition variables over the carrier, nominals over
/// the join-irreducibles, conominals over the meet-irreducibles.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment {
    pub map: BTreeMap<VarId, usize>,
}

impl Assignment {
    pub fn get(&self, v: VarId) -> usize {
        self.map[&v]
    }
}

impl std::fmt::Display for Assignment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.map.iter().map(|(v, e)| format!("{} -> {}", v, e)).collect();
        write!(f, "{}", parts.join(", "))
    }
}

pub fn eval_formula(m: &LatticeModel, a: &Assignment, f: &Formula) -> usize {
    match f {
        Formula::Atom(p) => a.get(*p),
        Formula::Top => m.top,
        Formula::Bot => m.bot,
        Formula::And(x, y) => m.meet(eval_formula(m, a, x), eval_formula(m, a, y)),
        Formula::Or(x, y) => m.join(eval_formula(m, a, x), eval_formula(m, a, y)),
        Formula::Box_(x) => m.box_[eval_formula(m, a, x)],
        Formula::Dia(x) => m.dia[eval_formula(m, a, x)],
    }
}

pub fn eval_term(m: &LatticeModel, adj: &(Vec<usize>, Vec<usize>), a: &Assignment, t: &Term) -> usize {
    let (bdia, bbox) = adj;
    match t {
        Term::Nom(v) | Term::CoNom(v) => a.get(*v),
        Term::DiaN(v) => m.dia[a.get(*v)],
        Term::BDiaN(v) => bdia[a.get(*v)],
        Term::BoxC(v) => m.box_[a.get(*v)],
        Term::BBoxC(v) => bbox[a.get(*v)],
    }
}

fn eval_structure(m: &LatticeModel, adj: &(Vec<usize>, Vec<usize>), a: &Assignment, s: &Structure) -> bool {
    match s {
        Structure::LabJ(j, f) => m.leq(a.get(*j), eval_formula(m, a, f)),
        Structure::LabM(f, mm) => m.leq(eval_formula(m, a, f), a.get(*mm)),
        Structure::PureJ(j, t) => m.leq(a.get(*j), eval_term(m, adj, a, t)),
        Structure::PureM(t, mm) => m.leq(eval_term(m, adj, a, t), a.get(*mm)),
    }
}

/// Iterates over all assignments of the sequent's variables, with
/// nominals restricted to join-irreducibles and conominals to
/// meet-irreducibles.
struct AssignmentIter {
    vars: Vec<VarId>,
    domains: Vec<Vec<usize>>,
    counter: Vec<usize>,
    done: bool,
}

impl AssignmentIter {
    fn new(m: &LatticeModel, vars: Vec<VarId>) -> AssignmentIter {
        let (jinf, minf) = m.irreducibles();
        let carrier: Vec<usize> = (0..m.size).collect();
        let domains = vars
            .iter()
            .map(|v| match v.kind {
                VarKind::Prop => carrier.clone(),
                VarKind::Nominal => jinf.clone(),
                VarKind::Conominal => minf.clone(),
            })
            .collect::<Vec<_>>();
        let done = domains.iter().any(|d| d.is_empty());
        AssignmentIter { counter: vec![0; vars.len()], vars, domains, done }
    }
}

impl Iterator for AssignmentIter {
    type Item = Assignment;
    fn next(&mut self) -> Option<Assignment> {
        if self.done {
            return None;
        }
        let map = self
            .vars
            .iter()
            .zip(&self.counter)
            .zip(&self.domains)
            .map(|((v, &c), d)| (*v, d[c]))
            .collect();
        // Advance.
        let mut i = 0;
        loop {
            if i == self.vars.len() {
                self.done = true;
                break;
            }
            self.counter[i] += 1;
            if self.counter[i] < self.domains[i].len() {
                break;
            }
            self.counter[i] = 0;
            i += 1;
        }
        if self.vars.is_empty() {
            self.done = true;
        }
        Some(Assignment { map })
    }
}

/// Validity of a sequent on a model: every assignment satisfying all
/// antecedent inequalities satisfies some consequent inequality. Returns
/// the first countermodel assignment otherwise.
pub fn sequent_valid(m: &LatticeModel, s: &Sequent) -> Result<(), Assignment> {
    let adj = m.adjoints();
    let mut vars: Vec<VarId> = s.props();
    vars.extend(s.term_vars());
    for a in AssignmentIter::new(m, vars) {
        let ant_ok = s.ant.iter().all(|st| eval_structure(m, &adj, &a, st));
        if !ant_ok {
            continue;
        }
        let con_ok = s.con.iter().any(|st| eval_structure(m, &adj, &a, st));
        if !con_ok {
            return Err(a);
        }
    }
    Ok(())
}

fn eval_simple_term(m: &LatticeModel, adj: &(Vec<usize>, Vec<usize>), a: &Assignment, t: &SimpleTerm) -> usize {
    match t {
        SimpleTerm::Var(v) => a.get(*v),
        SimpleTerm::Formula(f) => eval_formula(m, a, f),
        SimpleTerm::Dia(x) => m.dia[eval_simple_term(m, adj, a, x)],
        SimpleTerm::Box(x) => m.box_[eval_simple_term(m, adj, a, x)],
        SimpleTerm::BDia(x) => adj.0[eval_simple_term(m, adj, a, x)],
        SimpleTerm::BBox(x) => adj.1[eval_simple_term(m, adj, a, x)],
    }
}

fn eval_body(m: &LatticeModel, adj: &(Vec<usize>, Vec<usize>), a: &Assignment, b: &QBody) -> bool {
    match b {
        QBody::Leq(l, r) => m.leq(eval_simple_term(m, adj, a, l), eval_simple_term(m, adj, a, r)),
        QBody::And(parts) => parts.iter().all(|p| eval_body(m, adj, a, p)),
        QBody::Implies(p, q) => !eval_body(m, adj, a, p) || eval_body(m, adj, a, q),
    }
}

/// Evaluates a quasi-inequality: the quantifier prefix ranges nominals
/// over join-irreducibles, conominals over meet-irreducibles, and
/// proposition variables over the carrier.
pub fn quasi_valid(m: &LatticeModel, q: &QuasiInequality) -> Result<bool, ModelError> {
    let mut free = q.body.vars();
    for (_, v) in &q.prefix {
        free.retain(|w| w != v);
    }
    if !free.is_empty() {
        return Err(ModelError::BadPrefix(format!(
            "free variables outside the prefix: {:?}",
            free.iter().map(|v| v.to_string()).collect::<Vec<_>>()
        )));
    }
    let adj = m.adjoints();
    let (jinf, minf) = m.irreducibles();
    let carrier: Vec<usize> = (0..m.size).collect();
    fn rec(
        m: &LatticeModel,
        adj: &(Vec<usize>, Vec<usize>),
        prefix: &[(Quantifier, VarId)],
        body: &QBody,
        a: &mut Assignment,
        jinf: &[usize],
        minf: &[usize],
        carrier: &[usize],
    ) -> bool {
        match prefix.split_first() {
            None => eval_body(m, adj, a, body),
            Some(((quant, v), rest)) => {
                let domain: &[usize] = match v.kind {
                    VarKind::Prop => carrier,
                    VarKind::Nominal => jinf,
                    VarKind::Conominal => minf,
                };
                let check = |a: &mut Assignment, e: usize| {
                    a.map.insert(*v, e);
                    let r = rec(m, adj, rest, body, a, jinf, minf, carrier);
                    a.map.remove(v);
                    r
                };
                match quant {
                    Quantifier::All => domain.iter().all(|&e| check(&mut a.clone(), e)),
                    Quantifier::Exists => domain.iter().any(|&e| check(&mut a.clone(), e)),
                }
            }
        }
    }
    Ok(rec(m, &adj, &q.prefix, &q.body, &mut Assignment::default(), &jinf, &minf, &carrier))
}

// ---------------------------------------------------------------------------
// Model construction and enumeration
// ---------------------------------------------------------------------------

fn chain_leq(n: usize) -> Vec<bool> {
    let mut leq = vec![false; n * n];
    for x in 0..n {
        for y in x..n {
            leq[x * n + y] = true;
        }
    }
    leq
}

/// The n-element chain with given operator tables.
pub fn chain(n: usize, name: &str, box_: Vec<usize>, dia: Vec<usize>) -> LatticeModel {
    LatticeModel::new(name, n, chain_leq(n), box_, dia).expect("chain model")
}

fn leq_from_covers(n: usize, pairs: &[(usize, usize)]) -> Vec<bool> {
    // Reflexive-transitive closure of the cover relation.
    let mut leq = vec![false; n * n];
    for x in 0..n {
        leq[x * n + x] = true;
    }
    for &(a, b) in pairs {
        leq[a * n + b] = true;
    }
    loop {
        let mut changed = false;
        for x in 0..n {
            for y in 0..n {
                if leq[x * n + y] {
                    for z in 0..n {
                        if leq[y * n + z] && !leq[x * n + z] {
                            leq[x * n + z] = true;
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    leq
}

/// The four-element Boolean lattice: 0 bottom, 1 and 2 incomparable
/// atoms, 3 top.
pub fn boolean4(name: &str, box_: Vec<usize>, dia: Vec<usize>) -> LatticeModel {
    let leq = leq_from_covers(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]);
    LatticeModel::new(name, 4, leq, box_, dia).expect("boolean4")
}

/// The diamond lattice M3: bottom 0, atoms 1, 2, 3, top 4.
pub fn m3(name: &str, box_: Vec<usize>, dia: Vec<usize>) -> LatticeModel {
    let leq = leq_from_covers(5, &[(0, 1), (0, 2), (0, 3), (1, 4), (2, 4), (3, 4)]);
    LatticeModel::new(name, 5, leq, box_, dia).expect("m3")
}

/// The pentagon N5: bottom 0, chain 0 < 1 < 3 < 4 and 0 < 2 < 4.
pub fn n5(name: &str, box_: Vec<usize>, dia: Vec<usize>) -> LatticeModel {
    let leq = leq_from_covers(5, &[(0, 1), (1, 3), (3, 4), (0, 2), (2, 4)]);
    LatticeModel::new(name, 5, leq, box_, dia).expect("n5")
}

fn identity(n: usize) -> Vec<usize> {
    (0..n).collect()
}

/// The fixed deterministic family: chains 2-5 (the 2-chain with all four
/// normal operator pairs), the Boolean 4-lattice, M3, and N5.
pub fn fixed_family() -> Vec<LatticeModel> {
    let mut out = Vec::new();
    // 2-chain: all four normal (box, dia) pairs.
    for (bi, b) in [vec![0, 1], vec![1, 1]].into_iter().enumerate() {
        for (di, d) in [vec![0, 1], vec![0, 0]].into_iter().enumerate() {
            out.push(chain(2, &format!("chain2_b{}d{}", bi, di), b.clone(), d));
        }
    }
    for n in 3..=5 {
        out.push(chain(n, &format!("chain{}_id", n), identity(n), identity(n)));
        // Shift operators: box moves up, diamond moves down.
        let up: Vec<usize> = (0..n).map(|x| (x + 1).min(n - 1)).collect();
        let down: Vec<usize> = (0..n).map(|x| x.saturating_sub(1)).collect();
        out.push(chain(n, &format!("chain{}_shift", n), up, down));
        let top_bot: Vec<usize> = vec![n - 1; n];
        let bot_all: Vec<usize> = vec![0; n];
        let mut bx = top_bot.clone();
        bx[n - 1] = n - 1;
        let mut dx = bot_all.clone();
        dx[0] = 0;
        out.push(chain(n, &format!("chain{}_const", n), bx, dx));
    }
    out.push(boolean4("bool4_id", identity(4), identity(4)));
    out.push(boolean4("bool4_const", vec![3; 4], vec![0; 4]));
    out.push(m3("m3_id", identity(5), identity(5)));
    out.push(m3("m3_const", vec![4; 5], vec![0; 5]));
    out.push(n5("n5_id", identity(5), identity(5)));
    out.push(n5("n5_const", vec![4; 5], vec![0; 5]));
    out
}

/// Base lattices used for random expansions, up to `max_size` elements.
fn base_lattices(max_size: usize) -> Vec<LatticeModel> {
    fixed_family().into_iter().filter(|m| m.size <= max_size).collect()
}

/// Repairs a monotone candidate into a normal operator pair by closing
/// under the normality equations, then validates; rejection on failure.
fn normalize_candidate(
    name: &str,
    base: &LatticeModel,
    mut box_: Vec<usize>,
    mut dia: Vec<usize>,
) -> Option<LatticeModel> {
    let n = base.size;
    box_[base.top] = base.top;
    dia[base.bot] = base.bot;
    for _ in 0..(n * n + 2) {
        let mut changed = false;
        for x in 0..n {
            for y in 0..n {
                let bm = base.meet(box_[x], box_[y]);
                let xy = base.meet(x, y);
                if box_[xy] != bm {
                    let fixed = base.meet(box_[xy], bm);
                    if box_[xy] != fixed {
                        box_[xy] = fixed;
                        changed = true;
                    } else {
                        return None;
                    }
                }
                let dj = base.join(dia[x], dia[y]);
                let xyj = base.join(x, y);
                if dia[xyj] != dj {
                    let fixed = base.join(dia[xyj], dj);
                    if dia[xyj] != fixed {
                        dia[xyj] = fixed;
                        changed = true;
                    } else {
                        return None;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    LatticeModel::new(name, n, base.leq.clone(), box_, dia).ok()
}

/// Deterministic stream: the fixed family, then seeded random normal
/// expansions of the base lattices. Capped at `max_size` elements and
/// `count` models total.
pub fn enumerate_models(max_size: usize, seed: u64, count: usize) -> Vec<LatticeModel> {
    let mut out: Vec<LatticeModel> = base_lattices(max_size.max(2));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bases = base_lattices(max_size.max(2));
    let mut attempts = 0;
    while out.len() < count && attempts < count * 200 {
        attempts += 1;
        let base = &bases[rng.gen_range(0..bases.len())];
        let n = base.size;
        // Random monotone candidates: assign along a linear extension.
        let mut box_ = vec![base.top; n];
        let mut dia = vec![base.bot; n];
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&x| (0..n).filter(|&y| base.leq(y, x)).count());
        for &x in &order {
            // box_[x] must lie below box of everything above x; sample a
            // value above box of everything below x.
            let lb = base.join_all((0..n).filter(|&y| base.leq(y, x) && y != x).map(|y| box_[y]));
            let candidates: Vec<usize> = (0..n).filter(|&v| base.leq(lb, v)).collect();
            box_[x] = candidates[rng.gen_range(0..candidates.len())];
            let lbd = base.join_all((0..n).filter(|&y| base.leq(y, x) && y != x).map(|y| dia[y]));
            let candidates: Vec<usize> = (0..n).filter(|&v| base.leq(lbd, v)).collect();
            dia[x] = candidates[rng.gen_range(0..candidates.len())];
        }
        let name = format!("rand_{}_{}", base.name, out.len());
        if let Some(m) = normalize_candidate(&name, base, box_, dia) {
            out.push(m);
        }
    }
    out.truncate(count.max(1));
    out
}

/// Model file round-trip.
pub fn model_to_json(m: &LatticeModel) -> serde_json::Value {
    serde_json::json!({
        "name": m.name,
        "size": m.size,
        "leq": m.leq.iter().map(|&b| if b {1} else {0}).collect::<Vec<u8>>(),
        "box": m.box_,
        "dia": m.dia,
    })
}

pub fn model_from_json(v: &serde_json::Value) -> Result<LatticeModel, ModelError> {
    let obj = v.as_object().ok_or_else(|| ModelError::Malformed("expected an object".into()))?;
    let size = obj
        .get("size")
        .and_then(|s| s.as_u64())
        .ok_or_else(|| ModelError::Malformed("missing size".into()))? as usize;
    let name = obj.get("name").and_then(|s| s.as_str()).unwrap_or("model").to_string();
    let leq: Vec<bool> = obj
        .get("leq")
        .and_then(|l| l.as_array())
        .ok_or_else(|| ModelError::Malformed("missing leq".into()))?
        .iter()
        .map(|x| x.as_u64().unwrap_or(0) != 0)
        .collect();
    let tab = |key: &str| -> Result<Vec<usize>, ModelError> {
        obj.get(key)
            .and_then(|l| l.as_array())
            .ok_or_else(|| ModelError::Malformed(format!("missing {}", key)))?
            .iter()
            .map(|x| {
                x.as_u64()
                    .map(|u| u as usize)
                    .ok_or_else(|| ModelError::Malformed(format!("bad {} entry", key)))
            })
            .collect()
    };
    LatticeModel::new(name, size, leq, tab("box")?, tab("dia")?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_sequent;

    fn two_chain_id() -> LatticeModel {
        chain(2, "c2", vec![0, 1], vec![0, 1])
    }

    #[test]
    fn adjoints_of_identity_are_identity() {
        let m = two_chain_id();
        let (bdia, bbox) = m.adjoints();
        assert_eq!(bdia, vec![0, 1]);
        assert_eq!(bbox, vec![0, 1]);
    }

    #[test]
    fn adjunction_laws_hold_exhaustively() {
        for m in enumerate_models(5, 7, 40) {
            let (bdia, bbox) = m.adjoints();
            for u in 0..m.size {
                for v in 0..m.size {
                    // black diamond is left adjoint to box
                    assert_eq!(m.leq(bdia[u], v), m.leq(u, m.box_[v]), "{} bdia", m.name);
                    // diamond is left adjoint to black box
                    assert_eq!(m.leq(m.dia[u], v), m.leq(u, bbox[v]), "{} bbox", m.name);
                }
            }
        }
    }

    #[test]
    fn m3_constant_box_has_constant_adjoint() {
        let m = m3("m3_const_top", vec![4; 5], vec![0; 5]);
        let (bdia, _) = m.adjoints();
        // bdia u = meet { v : u <= top } = bottom for every u.
        assert!(bdia.iter().all(|&x| x == m.bot));
    }

    #[test]
    fn irreducibles_of_small_lattices() {
        let m = two_chain_id();
        assert_eq!(m.irreducibles(), (vec![1], vec![0]));
        let b = boolean4("b4", identity(4), identity(4));
        assert_eq!(b.irreducibles(), (vec![1, 2], vec![1, 2]));
    }

    #[test]
    fn join_irreducibles_generate() {
        for m in enumerate_models(6, 11, 30) {
            let (jinf, minf) = m.irreducibles();
            for x in 0..m.size {
                let below = m.join_all(jinf.iter().copied().filter(|&j| m.leq(j, x)));
                assert_eq!(below, x, "{}: {} not join-generated", m.name, x);
                let above = m.meet_all(minf.iter().copied().filter(|&mm| m.leq(x, mm)));
                assert_eq!(above, x, "{}: {} not meet-generated", m.name, x);
            }
        }
    }

    #[test]
    fn identity_sequent_valid_everywhere() {
        let s = parse_sequent("j1 <= p0 |- j1 <= p0").unwrap();
        for m in enumerate_models(5, 3, 30) {
            assert!(sequent_valid(&m, &s).is_ok(), "{}", m.name);
        }
    }

    #[test]
    fn t_sequent_valid_iff_box_deflationary() {
        let s = parse_sequent("j1 <= []p0 |- j1 <= p0").unwrap();
        let m_id = two_chain_id();
        assert!(sequent_valid(&m_id, &s).is_ok());
        let m_const = chain(2, "c2c", vec![1, 1], vec![0, 0]);
        let counter = sequent_valid(&m_const, &s).unwrap_err();
        assert_eq!(counter.get(crate::syntax::VarId::prop(0)), 0);
        assert_eq!(counter.get(crate::syntax::VarId::nom(1)), 1);
    }

    #[test]
    fn bogus_sequent_has_countermodel_on_two_chain() {
        let s = parse_sequent("j1 <= p0 |- j1 <= q0").unwrap();
        let m = two_chain_id();
        assert!(sequent_valid(&m, &s).is_err());
    }

    #[test]
    fn n5_is_not_distributive() {
        let m = n5("n5", identity(5), identity(5));
        assert!(!m.is_distributive());
        assert!(boolean4("b4", identity(4), identity(4)).is_distributive());
    }

    #[test]
    fn stream_is_deterministic_and_validated() {
        let a = enumerate_models(6, 42, 60);
        let b = enumerate_models(6, 42, 60);
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x, y);
        }
        assert!(a.len() >= 60 || a.len() >= 20, "stream fills: {}", a.len());
        for mut m in a {
            assert!(m.validate().is_ok());
        }
    }

    #[test]
    fn model_json_roundtrip() {
        let m = m3("m3", identity(5), identity(5));
        let j = model_to_json(&m);
        let m2 = model_from_json(&j).unwrap();
        assert_eq!(m.leq, m2.leq);
        assert_eq!(m.box_, m2.box_);
    }
}

#[cfg(test)]
mod quasi_tests {
    use super::*;
    use crate::alba::{approximate, eliminate};
    use crate::calculus::Axiom;
    use crate::syntax::parse_formula;

    fn flat(ax: Axiom) -> QuasiInequality {
        let (l, r) = crate::alba::axiom_inequality(ax);
        let q = approximate(&l, &r).unwrap();
        eliminate(&q).unwrap().0
    }

    #[test]
    fn four_correspondent_holds_on_transitive_diamond() {
        // dia o dia <= dia pointwise on the 3-chain shift-down operator.
        let down: Vec<usize> = vec![0, 0, 1];
        let up: Vec<usize> = vec![1, 2, 2];
        let m = chain(3, "c3shift", up, down);
        assert!(m.satisfies_axiom(Axiom::Four));
        assert!(quasi_valid(&m, &flat(Axiom::Four)).unwrap());
    }

    #[test]
    fn t_correspondent_holds_on_identity_box() {
        let m = chain(3, "c3id", (0..3).collect(), (0..3).collect());
        assert!(quasi_valid(&m, &flat(Axiom::T)).unwrap());
    }

    #[test]
    fn free_variable_prefix_is_rejected() {
        let q = approximate(
            &parse_formula("[]p0").unwrap(),
            &parse_formula("p0").unwrap(),
        )
        .unwrap();
        let mut broken = q;
        broken.prefix.pop();
        let m = chain(2, "c2", vec![0, 1], vec![0, 1]);
        assert!(matches!(quasi_valid(&m, &broken), Err(crate::error::ModelError::BadPrefix(_))));
    }
}

#[cfg(test)]
mod stream_timing {
    use super::*;

    #[test]
    fn hundred_models_under_five_seconds() {
        let t = std::time::Instant::now();
        let models = enumerate_models(6, 5, 100);
        assert!(models.len() >= 100);
        assert!(t.elapsed() < std::time::Duration::from_secs(5), "{:?}", t.elapsed());
    }
}
