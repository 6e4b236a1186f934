//! Bounded backward proof search: iterative deepening over the backward
//! rule enumeration, with alpha-equivalence loop detection, failure
//! memoization, and sound semantic pruning on small lattice models.

use std::collections::{HashMap, HashSet};

use crate::calculus::{backward, BackwardStep, CalcConfig, Mode, RuleId};
use crate::proof::{by_rule, Derivation};
use crate::semantics::{fixed_family, sequent_valid, LatticeModel};
use crate::syntax::Sequent;

/// Search options.
#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub max_depth: usize,
    /// Prune goals refuted on small models satisfying sigma.
    pub semantic_pruning: bool,
    /// Hard cap on expanded nodes per `prove` call.
    pub node_budget: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { max_depth: 12, semantic_pruning: true, node_budget: 2_000_000 }
    }
}

struct Searcher<'a> {
    cfg: &'a CalcConfig,
    opts: &'a SearchConfig,
    /// Alpha-canonical goal -> remaining depth at which it failed.
    failed: HashMap<String, usize>,
    pruned: HashSet<String>,
    models: Vec<LatticeModel>,
    nodes: usize,
}

fn canonical_key(s: &Sequent) -> String {
    s.alpha_canonical().to_string()
}

fn step_priority(rule: RuleId) -> u8 {
    use RuleId::*;
    match rule {
        IdJp | IdPm | IdBot | IdTop | BotJ | BotM | TopM | TopJ => 0,
        AndPInv | OrSInv | AndP | OrS | AndS | OrP => 1,
        BoxS | DiaP => 2,
        BoxPInv | DiaSInv | BoxP | DiaS => 3,
        AxT | AxB | Ax4 | AxD | AxC | TopBox | BotDia => 4,
        AdjDiaBb | AdjDiaBbInv | AdjBdBox | AdjBdBoxInv => 5,
        SM | SJ | SMm | SJj | SMT | SJT | STm | STj | STTm | SJTT => 6,
        CutJ | CutM => 7,
    }
}

impl<'a> Searcher<'a> {
    fn prove(&mut self, goal: &Sequent, depth: usize, path: &mut Vec<String>) -> Option<Derivation> {
        if self.nodes >= self.opts.node_budget {
            return None;
        }
        self.nodes += 1;
        let key = canonical_key(goal);
        if let Some(&d) = self.failed.get(&key) {
            if depth <= d {
                return None;
            }
        }
        if self.opts.semantic_pruning {
            if self.pruned.contains(&key) {
                return None;
            }
            if goal.props().len() <= 3 && goal.term_vars().len() <= 5 {
                for m in &self.models {
                    if sequent_valid(m, goal).is_err() {
                        self.pruned.insert(key.clone());
                        return None;
                    }
                }
            }
        }
        if path.iter().any(|k| k == &key) {
            return None;
        }
        if depth == 0 {
            return None;
        }

        let mut steps: Vec<BackwardStep> = backward(self.cfg, goal);
        steps.retain(|s| !useless_step(goal, s));
        steps.sort_by_key(|s| step_priority(s.rule));

        path.push(key.clone());
        for step in steps {
            if step.rule.arity() == 0 {
                path.pop();
                return by_rule(self.cfg, step.rule, vec![], step.bindings).ok();
            }
            let mut children = Vec::new();
            let mut ok = true;
            for prem in &step.premises {
                match self.prove(prem, depth - 1, path) {
                    Some(d) => children.push(d),
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                if let Ok(d) = by_rule(self.cfg, step.rule, children, step.bindings.clone()) {
                    if d.end().multiset_eq(goal) {
                        path.pop();
                        return Some(d);
                    }
                }
            }
        }
        path.pop();
        let entry = self.failed.entry(key).or_insert(0);
        *entry = (*entry).max(depth);
        None
    }
}

/// The invertible additive rules only ever need one copy of the structure
/// they surface; re-adding an existing one cannot help.
fn useless_step(goal: &Sequent, step: &BackwardStep) -> bool {
    use RuleId::*;
    match step.rule {
        BoxPInv | DiaSInv => {
            // The premise adds one consequent structure; skip the step
            // when the goal already carries a copy of it.
            let prem = &step.premises[0];
            prem.con.iter().any(|s| {
                let in_prem = prem.con.iter().filter(|p| *p == s).count();
                let in_goal = goal.con.iter().filter(|g| *g == s).count();
                in_prem > in_goal && in_goal > 0
            })
        }
        _ => false,
    }
}

/// Iterative-deepening backward search for a derivation of `goal`.
/// Returns the derivation found at the smallest depth, if any.
pub fn prove(cfg: &CalcConfig, goal: &Sequent, opts: &SearchConfig) -> Option<Derivation> {
    let models: Vec<LatticeModel> = if opts.semantic_pruning {
        fixed_family()
            .into_iter()
            .filter(|m| m.size <= 4 && m.satisfies_sigma(&cfg.sigma))
            .take(6)
            .collect()
    } else {
        Vec::new()
    };
    let mut searcher = Searcher {
        cfg,
        opts,
        failed: HashMap::new(),
        pruned: HashSet::new(),
        models,
        nodes: 0,
    };
    for depth in 1..=opts.max_depth {
        let mut path = Vec::new();
        if let Some(d) = searcher.prove(goal, depth, &mut path) {
            return Some(d);
        }
        // Failure entries from shallower iterations stay valid.
    }
    None
}

/// Convenience wrapper: invertible-mode search as the prover default.
/// Invertible search runs with the relaxed switch side condition (only
/// the premise-side freshness), which non-empty contexts require.
pub fn prove_invertible(cfg: &CalcConfig, goal: &Sequent, max_depth: usize) -> Option<Derivation> {
    let inv = invertible_search_config(cfg);
    prove(&inv, goal, &SearchConfig { max_depth, ..Default::default() })
}

/// The calculus configuration invertible-mode search runs under.
pub fn invertible_search_config(cfg: &CalcConfig) -> CalcConfig {
    CalcConfig { mode: Mode::Invertible, relaxed_switch: true, ..cfg.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calculus::{Axiom, CalcConfig};
    use crate::proof::check_derivation;
    use crate::syntax::parse_sequent;

    fn try_prove(sigma: &[Axiom], goal: &str, depth: usize) -> Derivation {
        let cfg = CalcConfig::with_sigma(sigma);
        let goal = parse_sequent(goal).unwrap();
        let d = prove_invertible(&cfg, &goal, depth)
            .unwrap_or_else(|| panic!("no proof of {} within {}", goal, depth));
        let inv = invertible_search_config(&cfg);
        let report = check_derivation(&inv, &d);
        assert!(report.ok(), "{:?}", report.violations);
        assert!(d.end().multiset_eq(&goal));
        d
    }

    #[test]
    fn proves_identity_and_projections() {
        try_prove(&[], "j1 <= p0 |- j1 <= p0", 3);
        try_prove(&[], "j1 <= F |- j1 <= p0", 3);
        try_prove(&[], "j1 <= p0 |- j1 <= T", 3);
        try_prove(&[], "p0|q0 <= m0 |- p0 <= m0", 3);
        try_prove(&[], "j1 <= p0&q0 |- j1 <= p0", 3);
    }

    #[test]
    fn proves_t_axiom_sequent() {
        let d = try_prove(&[Axiom::T], "j1 <= []p0 |- j1 <= p0", 8);
        assert!(d.node_count() >= 3);
    }

    #[test]
    fn no_proof_of_bogus_goal() {
        let cfg = CalcConfig::default();
        let goal = parse_sequent("j1 <= p0 |- j1 <= q0").unwrap();
        assert!(prove_invertible(&cfg, &goal, 6).is_none());
    }
}
