//! Derivation trees, whole-proof checking, the congruence analysis that
//! the derivation-level side conditions depend on, and the derivation
//! file format.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::calculus::{
    apply, check_instance_aligned, Bindings, CalcConfig, Mode, RuleId, RuleInstance, Violation,
};
use crate::error::RuleError;
use crate::syntax::{
    check_renaming, parse_formula, parse_sequent, parse_structure, parse_term, FreshGen, Loc,
    Position, Sequent, Structure, VarId,
};

/// A derivation: a rule instance together with subproofs of its premises,
/// order-matched.
#[derive(Debug, Clone)]
pub struct Derivation {
    pub inst: RuleInstance,
    pub children: Vec<Derivation>,
}

impl Derivation {
    pub fn new(inst: RuleInstance, children: Vec<Derivation>) -> Derivation {
        Derivation { inst, children }
    }

    pub fn leaf(inst: RuleInstance) -> Derivation {
        Derivation { inst, children: Vec::new() }
    }

    pub fn end(&self) -> &Sequent {
        &self.inst.conclusion
    }

    pub fn rule(&self) -> RuleId {
        self.inst.rule
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(|c| c.node_count()).sum::<usize>()
    }

    pub fn height(&self) -> usize {
        1 + self.children.iter().map(|c| c.height()).max().unwrap_or(0)
    }

    pub fn has_cut(&self) -> bool {
        self.inst.rule.is_cut() || self.children.iter().any(|c| c.has_cut())
    }

    /// All nominals and conominals occurring anywhere in the tree.
    pub fn all_vars(&self) -> BTreeSet<VarId> {
        let mut out: BTreeSet<VarId> = self.end().term_vars().into_iter().collect();
        for c in &self.children {
            out.extend(c.all_vars());
        }
        out
    }

    /// Applies a checked renaming to the whole tree.
    pub fn rename(&self, map: &BTreeMap<VarId, VarId>) -> Result<Derivation, RuleError> {
        let vars: Vec<VarId> = self.all_vars().into_iter().collect();
        check_renaming(&vars, map)?;
        Ok(self.rename_unchecked(map))
    }

    pub(crate) fn rename_unchecked(&self, map: &BTreeMap<VarId, VarId>) -> Derivation {
        let sub = |v: VarId| *map.get(&v).unwrap_or(&v);
        let mut inst = self.inst.clone();
        inst.conclusion = inst.conclusion.rename(map);
        inst.premises = inst.premises.iter().map(|p| p.rename(map)).collect();
        for v in inst.bindings.vars.values_mut() {
            *v = sub(*v);
        }
        for t in inst.bindings.terms.values_mut() {
            *t = t.rename(map);
        }
        if let Some((a, c)) = &mut inst.bindings.ctx {
            *a = a.iter().map(|s| s.rename(map)).collect();
            *c = c.iter().map(|s| s.rename(map)).collect();
        }
        Derivation {
            inst,
            children: self.children.iter().map(|c| c.rename_unchecked(map)).collect(),
        }
    }

    /// Pre-order flattening; node 0 is the root.
    pub fn flatten(&self) -> Vec<&Derivation> {
        let mut out = Vec::new();
        fn go<'a>(d: &'a Derivation, out: &mut Vec<&'a Derivation>) {
            out.push(d);
            for c in &d.children {
                go(c, out);
            }
        }
        go(self, &mut out);
        out
    }

    /// Pre-order node ids of each node's children.
    pub fn child_ids(&self) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        fn go(d: &Derivation, next: &mut usize, out: &mut Vec<Vec<usize>>) -> usize {
            let me = *next;
            *next += 1;
            out.push(Vec::new());
            for c in &d.children {
                let cid = go(c, next, out);
                out[me].push(cid);
            }
            me
        }
        let mut next = 0;
        go(self, &mut next, &mut out);
        out
    }
}

/// An occurrence of a structure: node id (pre-order) plus locator into
/// that node's conclusion.
pub type Occ = (usize, Loc);

/// Union-find over structure occurrences; classes are the history trees
/// of the proof-congruence relation.
#[derive(Debug, Clone)]
pub struct CongruenceForest {
    parent: BTreeMap<Occ, Occ>,
}

impl CongruenceForest {
    fn find(&self, mut o: Occ) -> Occ {
        while let Some(&p) = self.parent.get(&o) {
            if p == o {
                break;
            }
            o = p;
        }
        o
    }

    pub fn congruent(&self, a: Occ, b: Occ) -> bool {
        self.find(a) == self.find(b)
    }

    pub fn class_of(&self, o: Occ) -> Vec<Occ> {
        let r = self.find(o);
        self.parent.keys().copied().filter(|&k| self.find(k) == r).collect()
    }

    pub fn classes(&self) -> Vec<Vec<Occ>> {
        let mut by_root: BTreeMap<Occ, Vec<Occ>> = BTreeMap::new();
        for &k in self.parent.keys() {
            by_root.entry(self.find(k)).or_default().push(k);
        }
        by_root.into_values().collect()
    }
}

/// Builds the congruence forest of a derivation: parameter edges within
/// each instance, plus the switch (and adjunction) nonparametric pairs.
pub fn congruence(d: &Derivation) -> CongruenceForest {
    let nodes = d.flatten();
    let children = d.child_ids();
    let mut parent: BTreeMap<Occ, Occ> = BTreeMap::new();
    for (n, node) in nodes.iter().enumerate() {
        for loc in node.end().locs() {
            parent.entry((n, loc)).or_insert((n, loc));
        }
    }
    let mut uf = CongruenceForest { parent };
    fn union(uf: &mut CongruenceForest, a: Occ, b: Occ) {
        let (ra, rb) = (uf.find(a), uf.find(b));
        if ra != rb {
            uf.parent.insert(ra, rb);
        }
    }
    for (n, node) in nodes.iter().enumerate() {
        for (cl, parents) in &node.inst.param_map {
            for (pi, pl) in parents {
                let child = children[n][*pi];
                union(&mut uf, (n, *cl), (child, *pl));
            }
        }
        // Switch nonparametric pairs are locally congruent; the
        // adjunction pairs recorded on instances are image bookkeeping
        // only and flip position.
        if node.inst.rule.is_switch() {
            for (cl, (pi, pl)) in &node.inst.switch_map {
                let child = children[n][*pi];
                union(&mut uf, (n, *cl), (child, *pl));
            }
        }
    }
    uf
}

/// Label classification of a labelled-formula occurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelClass {
    JLabelled,
    MLabelled,
    Mixed,
}

/// Occurrences of the class of `occ` that have no congruent occurrence
/// above them, together with the rule that introduced each.
pub fn uppermost_introductions(d: &Derivation, forest: &CongruenceForest, occ: Occ) -> Vec<(Occ, RuleId)> {
    let nodes = d.flatten();
    forest
        .class_of(occ)
        .into_iter()
        .filter(|&(n, l)| nodes[n].inst.parents_of(l).is_empty())
        .map(|o| (o, nodes[o.0].inst.rule))
        .collect()
}

/// Classifies a labelled-formula occurrence per the uppermost congruent
/// introductions.
pub fn classify_label(d: &Derivation, occ: Occ) -> LabelClass {
    let forest = congruence(d);
    classify_with(d, &forest, &[occ])
}

pub(crate) fn classify_with(d: &Derivation, forest: &CongruenceForest, occs: &[Occ]) -> LabelClass {
    let mut rules = Vec::new();
    for &o in occs {
        rules.extend(uppermost_introductions(d, forest, o).into_iter().map(|(_, r)| r));
    }
    if rules.is_empty() {
        return LabelClass::Mixed;
    }
    if rules.iter().all(|r| r.introduces_j_labelled()) {
        LabelClass::JLabelled
    } else if rules.iter().all(|r| r.introduces_m_labelled()) {
        LabelClass::MLabelled
    } else {
        LabelClass::Mixed
    }
}

/// One violation in a checked derivation, addressed by the pre-order node
/// path.
#[derive(Debug, Clone)]
pub struct ProofViolation {
    pub node: usize,
    pub detail: String,
}

impl fmt::Display for ProofViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "node {}: {}", self.node, self.detail)
    }
}

/// Report of a whole-proof check.
#[derive(Debug, Clone, Default)]
pub struct CheckReport {
    pub violations: Vec<ProofViolation>,
}

impl CheckReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks a derivation: every instance, the deferred cut conditions, the
/// exact-two lint (non-invertible mode), C3 non-proliferation, and C4
/// position-alikeness along congruence classes.
pub fn check_derivation(cfg: &CalcConfig, d: &Derivation) -> CheckReport {
    let mut report = CheckReport::default();
    let nodes = d.flatten();
    let children = d.child_ids();

    // Structural shape first: child end-sequents must equal the premises
    // positionally.
    for (n, node) in nodes.iter().enumerate() {
        if node.children.len() != node.inst.premises.len() {
            report.violations.push(ProofViolation {
                node: n,
                detail: format!(
                    "{} premises but {} subproofs",
                    node.inst.premises.len(),
                    node.children.len()
                ),
            });
            continue;
        }
        for (i, c) in node.children.iter().enumerate() {
            if c.end() != &node.inst.premises[i] {
                report.violations.push(ProofViolation {
                    node: n,
                    detail: format!(
                        "premise {} is `{}` but its subproof ends in `{}`",
                        i,
                        node.inst.premises[i],
                        c.end()
                    ),
                });
            }
        }
    }
    if !report.ok() {
        return report;
    }

    // Instance-level checks.
    for (n, node) in nodes.iter().enumerate() {
        for v in crate::calculus::check_instance(cfg, &node.inst) {
            report.violations.push(ProofViolation { node: n, detail: v.to_string() });
        }
    }
    if !report.ok() {
        return report;
    }

    let forest = congruence(d);

    // Deferred cut side condition: the cut formula must be uniformly
    // j-labelled (Cut_j) or m-labelled (Cut_m) across both premises.
    for (n, node) in nodes.iter().enumerate() {
        if !node.inst.rule.is_cut() {
            continue;
        }
        let occs: Vec<Occ> = node
            .inst
            .np_prem
            .iter()
            .enumerate()
            .flat_map(|(i, locs)| {
                let child = children[n][i];
                locs.iter().map(move |l| (child, *l))
            })
            .collect();
        let class = classify_with(d, &forest, &occs);
        let want = if node.inst.rule == RuleId::CutJ { LabelClass::JLabelled } else { LabelClass::MLabelled };
        if class != want {
            report.violations.push(ProofViolation {
                node: n,
                detail: format!(
                    "cut formula is {:?}, {} requires {:?}",
                    class,
                    node.inst.rule,
                    want
                ),
            });
        }
    }

    // Exact-two lint, meaningful for the non-invertible configuration.
    if cfg.mode == Mode::NonInvertible {
        for (n, node) in nodes.iter().enumerate() {
            if let Err(e) = node.end().exact_two() {
                report.violations.push(ProofViolation { node: n, detail: format!("exact-two: {}", e) });
            }
        }
    }

    // C4: congruent occurrences are position-alike.
    for class in forest.classes() {
        let mut positions: Vec<Position> = Vec::new();
        for &(n, l) in &class {
            if let Some(p) = nodes[n].end().position_of(l) {
                positions.push(p);
            }
        }
        if positions.windows(2).any(|w| w[0] != w[1]) {
            let (n, l) = class[0];
            report.violations.push(ProofViolation {
                node: n,
                detail: format!("congruence class of {} is not position-alike", l),
            });
        }
    }

    // C3: each premise occurrence is congruent to at most one conclusion
    // occurrence within its instance.
    for (n, node) in nodes.iter().enumerate() {
        let mut seen: BTreeMap<(usize, Loc), usize> = BTreeMap::new();
        for (_, parents) in &node.inst.param_map {
            for p in parents {
                *seen.entry(*p).or_insert(0) += 1;
            }
        }
        for (p, count) in seen {
            if count > 1 {
                report.violations.push(ProofViolation {
                    node: n,
                    detail: format!("premise occurrence {}:{} proliferates into {} conclusion occurrences", p.0, p.1, count),
                });
            }
        }
    }

    report
}

/// Finding of the single-conclusion lint.
#[derive(Debug, Clone)]
pub enum SingleConclusionLint {
    Ok,
    Skipped(&'static str),
    Finding { node: usize, sequent: String, detail: String },
}

/// Every sequent of a strict-mode derivation is single-conclusion and
/// carries exactly two labelled formulas, one per position.
pub fn lint_single_conclusion(cfg: &CalcConfig, d: &Derivation) -> SingleConclusionLint {
    if cfg.mode != Mode::NonInvertible {
        return SingleConclusionLint::Skipped("only meaningful for non-invertible empty-context proofs");
    }
    for (n, node) in d.flatten().iter().enumerate() {
        let s = node.end();
        if s.con.len() != 1 {
            return SingleConclusionLint::Finding {
                node: n,
                sequent: s.to_string(),
                detail: format!("consequent has {} structures", s.con.len()),
            };
        }
        let mut prec = 0;
        let mut succ = 0;
        for loc in s.locs() {
            if s.get(loc).unwrap().is_labelled() {
                match s.position_of(loc).unwrap() {
                    Position::Precedent => prec += 1,
                    Position::Succedent => succ += 1,
                }
            }
        }
        if (prec, succ) != (1, 1) {
            return SingleConclusionLint::Finding {
                node: n,
                sequent: s.to_string(),
                detail: format!("{} precedent / {} succedent labelled formulas, expected 1/1", prec, succ),
            };
        }
    }
    SingleConclusionLint::Ok
}

// ---------------------------------------------------------------------------
// Derivation files
// ---------------------------------------------------------------------------

fn bindings_to_json(b: &Bindings) -> serde_json::Value {
    let mut map = serde_json::Map::new();
    for (k, v) in &b.formulas {
        map.insert(k.to_string(), serde_json::Value::String(v.to_string()));
    }
    for (k, v) in &b.terms {
        map.insert(k.to_string(), serde_json::Value::String(v.to_string()));
    }
    for (k, v) in &b.vars {
        map.insert(k.to_string(), serde_json::Value::String(v.to_string()));
    }
    if let Some(i) = b.index {
        map.insert("i".to_string(), serde_json::Value::String(i.to_string()));
    }
    if let Some((a, c)) = &b.ctx {
        map.insert(
            "ctx_ant".to_string(),
            serde_json::Value::Array(a.iter().map(|s| serde_json::Value::String(s.to_string())).collect()),
        );
        map.insert(
            "ctx_con".to_string(),
            serde_json::Value::Array(c.iter().map(|s| serde_json::Value::String(s.to_string())).collect()),
        );
    }
    serde_json::Value::Object(map)
}

fn bindings_from_json(v: &serde_json::Value) -> Result<Bindings, String> {
    let obj = v.as_object().ok_or("bindings must be an object")?;
    let mut b = Bindings::new();
    for (k, val) in obj {
        match k.as_str() {
            "A" | "B" => {
                let s = val.as_str().ok_or("formula binding must be a string")?;
                b.formulas.insert(k.chars().next().unwrap(), parse_formula(s).map_err(|e| e.to_string())?);
            }
            "T" | "U" => {
                let s = val.as_str().ok_or("term binding must be a string")?;
                b.terms.insert(k.chars().next().unwrap(), parse_term(s).map_err(|e| e.to_string())?);
            }
            "j" | "m" | "h" | "k" => {
                let s = val.as_str().ok_or("variable binding must be a string")?;
                let st = parse_term(s).map_err(|e| e.to_string())?;
                if !st.is_bare() {
                    return Err(format!("binding {} must be a bare variable, got {}", k, s));
                }
                b.vars.insert(k.chars().next().unwrap(), st.var());
            }
            "i" => {
                let s = val.as_str().ok_or("index binding must be a string")?;
                b.index = Some(s.parse().map_err(|_| "bad index binding")?);
            }
            "ctx_ant" | "ctx_con" => {
                let arr = val.as_array().ok_or("context binding must be an array")?;
                let mut structs = Vec::new();
                for x in arr {
                    let s = x.as_str().ok_or("context entries must be strings")?;
                    structs.push(parse_structure(s).map_err(|e| e.to_string())?);
                }
                let (a, c) = b.ctx.get_or_insert((Vec::new(), Vec::new()));
                if k == "ctx_ant" {
                    *a = structs;
                } else {
                    *c = structs;
                }
            }
            other => return Err(format!("unknown binding key `{}`", other)),
        }
    }
    Ok(b)
}

/// Serializes a derivation to the node-object file format.
pub fn to_json(d: &Derivation) -> serde_json::Value {
    let mut map = serde_json::Map::new();
    map.insert("rule".into(), serde_json::Value::String(d.inst.rule.name().into()));
    map.insert("conclusion".into(), serde_json::Value::String(d.end().to_string()));
    map.insert("bindings".into(), bindings_to_json(&d.inst.bindings));
    let np = serde_json::json!({
        "conclusion": d.inst.np_concl.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
        "premises": d.inst.np_prem.iter().map(|ls| ls.iter().map(|l| l.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
    });
    map.insert("nonparametric".into(), np);
    map.insert(
        "premises".into(),
        serde_json::Value::Array(d.children.iter().map(to_json).collect()),
    );
    serde_json::Value::Object(map)
}

/// Report of a derivation load: the applied per-cut renamings, if any.
#[derive(Debug, Clone, Default)]
pub struct LoadReport {
    /// (node path description, substitution) applied to restore exact-two
    /// across a cut.
    pub renamings: Vec<(String, BTreeMap<VarId, VarId>)>,
}

/// Reads a derivation from the file format, verifying the node structure
/// against the calculus as it goes. Cut premises whose variables collide
/// are alpha-renamed eagerly (recorded in the report).
pub fn from_json(
    cfg: &CalcConfig,
    v: &serde_json::Value,
    report: &mut LoadReport,
) -> Result<Derivation, String> {
    let obj = v.as_object().ok_or("derivation node must be an object")?;
    let rule: RuleId = obj
        .get("rule")
        .and_then(|r| r.as_str())
        .ok_or("missing rule")?
        .parse()?;
    let conclusion = parse_sequent(
        obj.get("conclusion").and_then(|c| c.as_str()).ok_or("missing conclusion")?,
    )
    .map_err(|e| e.to_string())?;
    let bindings = bindings_from_json(obj.get("bindings").ok_or("missing bindings")?)?;
    let prem_json = obj
        .get("premises")
        .and_then(|p| p.as_array())
        .cloned()
        .unwrap_or_default();
    let mut children = Vec::new();
    for p in &prem_json {
        children.push(from_json(cfg, p, report)?);
    }
    let mut bindings = bindings;

    // Eager per-cut renaming: the right subproof's variables that collide
    // with the left (other than the cut approximant) move to fresh
    // indices.
    if rule.is_cut() && children.len() == 2 {
        let cut_var = bindings
            .vars
            .values()
            .copied()
            .next()
            .ok_or("cut without an approximant binding")?;
        let left_vars: BTreeSet<VarId> = children[0].end().term_vars().into_iter().collect();
        let right_vars: BTreeSet<VarId> = children[1].end().term_vars().into_iter().collect();
        let clashes: Vec<VarId> =
            left_vars.intersection(&right_vars).copied().filter(|v| *v != cut_var).collect();
        if !clashes.is_empty() {
            let mut avoid: Vec<VarId> = children[0].all_vars().into_iter().collect();
            avoid.extend(children[1].all_vars());
            let mut gen = FreshGen::above(&avoid);
            let map: BTreeMap<VarId, VarId> =
                clashes.iter().map(|v| (*v, gen.fresh(v.kind))).collect();
            children[1] = children[1].rename(&map).map_err(|e| e.to_string())?;
            report.renamings.push(("cut premise".into(), map));
        }
    }

    let premises: Vec<Sequent> = children.iter().map(|c| c.end().clone()).collect();
    let marks: Option<Vec<Loc>> = obj
        .get("nonparametric")
        .and_then(|np| np.get("conclusion"))
        .and_then(|c| c.as_array())
        .map(|arr| {
            arr.iter()
                .map(|x| x.as_str().unwrap_or("").parse::<Loc>())
                .collect::<Result<Vec<_>, _>>()
        })
        .transpose()?;

    // Invertible-mode initial rules: recover the context from the
    // conclusion if it was not spelled out.
    if rule.is_initial() && cfg.mode == Mode::Invertible && bindings.ctx.is_none() {
        if let Ok(inst) = apply(cfg, rule, &[], &bindings) {
            if !inst.conclusion.multiset_eq(&conclusion) {
                // Derive the residual context from the conclusion.
                let probe = inst.conclusion;
                let strip = |side: &[Structure], np: &[Structure]| {
                    let mut rest = side.to_vec();
                    for n in np {
                        if let Some(i) = rest.iter().position(|s| s == n) {
                            rest.remove(i);
                        }
                    }
                    rest
                };
                bindings.ctx = Some((
                    strip(&conclusion.ant, &probe.ant),
                    strip(&conclusion.con, &probe.con),
                ));
            }
        }
    }

    let inst = check_instance_aligned(cfg, rule, &premises, &conclusion, &bindings, marks.as_deref())
        .map_err(|vs: Vec<Violation>| {
            vs.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
        })?;

    // Premise markings, when present, must name the nonparametric
    // occurrences the schema determined.
    if let Some(prem_marks) = obj
        .get("nonparametric")
        .and_then(|np| np.get("premises"))
        .and_then(|p| p.as_array())
    {
        for (i, marks) in prem_marks.iter().enumerate() {
            let Some(arr) = marks.as_array() else { continue };
            let mut given: Vec<Loc> = arr
                .iter()
                .map(|x| x.as_str().unwrap_or("").parse::<Loc>())
                .collect::<Result<_, _>>()?;
            let mut want = inst.np_prem.get(i).cloned().unwrap_or_default();
            given.sort();
            want.sort();
            if given != want {
                return Err(format!(
                    "premise {} markings {:?} disagree with the schema's {:?}",
                    i,
                    given.iter().map(|l| l.to_string()).collect::<Vec<_>>(),
                    want.iter().map(|l| l.to_string()).collect::<Vec<_>>()
                ));
            }
        }
    }
    Ok(Derivation { inst, children })
}

/// Convenience: build a node by applying a rule to subproofs.
pub fn by_rule(
    cfg: &CalcConfig,
    rule: RuleId,
    children: Vec<Derivation>,
    bindings: Bindings,
) -> Result<Derivation, RuleError> {
    let premises: Vec<Sequent> = children.iter().map(|c| c.end().clone()).collect();
    let inst = apply(cfg, rule, &premises, &bindings)?;
    Ok(Derivation { inst, children })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::Axiom;
    use crate::corpus;
    use crate::syntax::{Formula, VarKind};

    #[test]
    fn t_axiom_derivation_checks() {
        let cfg = CalcConfig::with_sigma(&[Axiom::T]);
        let d = corpus::axiom_t(&cfg);
        let report = check_derivation(&cfg, &d);
        assert!(report.ok(), "{:?}", report.violations);
        assert_eq!(d.end().to_string(), "j1 <= []p0 |- j1 <= p0");
    }

    #[test]
    fn congruence_tracks_parameter_through_box_p() {
        let cfg = CalcConfig::with_sigma(&[Axiom::T]);
        let d = corpus::axiom_t(&cfg);
        // Nodes pre-order: S_j root (0), AxT (1), Box_P (2), Id_pm (3).
        let forest = congruence(&d);
        // p0 <= m0 in Box_P's conclusion is congruent to Id's occurrence.
        let boxp_node = 2;
        let id_node = 3;
        let loc_in_boxp = d.flatten()[boxp_node]
            .end()
            .locs()
            .into_iter()
            .find(|&l| {
                d.flatten()[boxp_node].end().get(l)
                    == Some(&Structure::LabM(Formula::atom(0), VarId::conom(0)))
            })
            .unwrap();
        let loc_in_id = Loc::ant(0);
        assert!(forest.congruent((boxp_node, loc_in_boxp), (id_node, loc_in_id)));
    }

    #[test]
    fn single_node_axiom_classes_are_singletons() {
        let cfg = CalcConfig::default();
        let b = Bindings::new().v('j', VarId::nom(1)).f('A', Formula::atom(0));
        let d = by_rule(&cfg, RuleId::IdJp, vec![], b).unwrap();
        let forest = congruence(&d);
        for class in forest.classes() {
            assert_eq!(class.len(), 1);
        }
    }

    #[test]
    fn classify_id_pm_is_m_labelled() {
        let cfg = CalcConfig::default();
        let b = Bindings::new().v('m', VarId::conom(0)).f('A', Formula::atom(0));
        let d = by_rule(&cfg, RuleId::IdPm, vec![], b).unwrap();
        assert_eq!(classify_label(&d, (0, Loc::con(0))), LabelClass::MLabelled);
    }

    #[test]
    fn lint_single_conclusion_on_corpus() {
        let cfg = CalcConfig::with_sigma(&[Axiom::B]);
        let d = corpus::axiom_b(&cfg);
        assert!(matches!(lint_single_conclusion(&cfg, &d), SingleConclusionLint::Ok));
        let inv = CalcConfig::default().invertible();
        assert!(matches!(lint_single_conclusion(&inv, &d), SingleConclusionLint::Skipped(_)));
    }

    #[test]
    fn json_roundtrip_t_derivation() {
        let cfg = CalcConfig::with_sigma(&[Axiom::T]);
        let d = corpus::axiom_t(&cfg);
        let j = to_json(&d);
        let mut report = LoadReport::default();
        let d2 = from_json(&cfg, &j, &mut report).unwrap();
        assert!(report.renamings.is_empty());
        assert_eq!(d2.end(), d.end());
        assert!(check_derivation(&cfg, &d2).ok());
    }

    #[test]
    fn fresh_generator_respects_existing() {
        let mut g = FreshGen::above(&[VarId::nom(3), VarId::conom(0)]);
        assert_eq!(g.fresh(VarKind::Nominal), VarId::nom(5));
        assert_eq!(g.fresh(VarKind::Conominal), VarId::conom(2));
    }
}
