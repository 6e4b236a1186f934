//! Acceptance suite: one test per criterion, each printing a pass/fail
//! line. Run with `cargo test --test acceptance -- --nocapture`.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use ndml::alba;
use ndml::calculus::{Axiom, CalcConfig, Mode};
use ndml::corpus;
use ndml::proof::{check_derivation, from_json, Derivation, LoadReport};
use ndml::search::prove_invertible;
use ndml::semantics::{enumerate_models, fixed_family, quasi_valid, sequent_valid};
use ndml::syntax::{parse_sequent, FreshGen, Sequent, VarId, VarKind};
use ndml::transform::{
    canonical_form, cut_eliminate, display, is_canonical, parametric_step, rotate_step, Direction,
    Policy,
};

fn corpus_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus")
}

fn load_corpus() -> Vec<(String, CalcConfig, Derivation)> {
    let mut out = Vec::new();
    let mut paths: Vec<_> = std::fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.extension().map(|x| x == "json").unwrap_or(false))
        .collect();
    paths.sort();
    for path in paths {
        let name = path.file_stem().unwrap().to_string_lossy().to_string();
        let text = std::fs::read_to_string(&path).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let sigma: BTreeSet<Axiom> = v["sigma"]
            .as_array()
            .map(|a| a.iter().map(|x| x.as_str().unwrap().parse().unwrap()).collect())
            .unwrap_or_default();
        let cfg = CalcConfig { sigma, mode: Mode::NonInvertible, relaxed_switch: false };
        let mut report = LoadReport::default();
        let d = from_json(&cfg, &v["derivation"], &mut report)
            .unwrap_or_else(|e| panic!("{}: {}", name, e));
        out.push((name, cfg, d));
    }
    assert_eq!(out.len(), 11, "eleven shipped derivations");
    out
}

fn verdict(name: &str, ok: bool, detail: String) {
    println!("[{}] criterion {}: {}", if ok { "PASS" } else { "FAIL" }, name, detail);
    assert!(ok, "criterion {} failed: {}", name, detail);
}

#[test]
fn criterion_1_corpus_fidelity() {
    let t = Instant::now();
    let corpus = load_corpus();
    let mut violations = 0;
    for (name, cfg, d) in &corpus {
        let report = check_derivation(cfg, d);
        if !report.ok() {
            eprintln!("{}: {:?}", name, report.violations);
            violations += report.violations.len();
        }
    }
    let elapsed = t.elapsed();
    verdict(
        "1 (corpus fidelity)",
        violations == 0 && elapsed < Duration::from_secs(1),
        format!("{} derivations, {} violations, {:.2?}", corpus.len(), violations, elapsed),
    );
}

#[test]
fn criterion_2_syntactic_completeness_by_search() {
    let mut worst = Duration::ZERO;
    let mut failed = Vec::new();
    for (name, sigma, text) in corpus::characteristic_sequents() {
        let cfg = CalcConfig::with_sigma(&sigma);
        let goal = parse_sequent(text).unwrap();
        let t = Instant::now();
        let found = prove_invertible(&cfg, &goal, 14);
        let dt = t.elapsed();
        worst = worst.max(dt);
        match found {
            Some(d) => {
                let check_cfg = ndml::search::invertible_search_config(&cfg);
                let report = check_derivation(&check_cfg, &d);
                if !report.ok() || !d.end().multiset_eq(&goal) || dt >= Duration::from_secs(30) {
                    failed.push(name);
                }
            }
            None => failed.push(name),
        }
    }
    verdict(
        "2 (completeness by search)",
        failed.is_empty(),
        format!("14 sequents, worst proof time {:.2?}, failures {:?}", worst, failed),
    );
}

#[test]
fn criterion_3_cut_elimination() {
    let t = Instant::now();
    // (a) the parametric step on pi1 reproduces pi1_prime verbatim.
    let cfg = CalcConfig::default();
    let pi1 = corpus::pi1(&cfg);
    let (stepped, renaming) = parametric_step(&cfg, Policy::One, &pi1).unwrap();
    let corpus_files = load_corpus();
    let (_, _, pi1_prime) = corpus_files.iter().find(|(n, _, _)| n == "pi1_prime").unwrap();
    let part_a = renaming.is_empty()
        && stepped.end() == pi1_prime.end()
        && check_derivation(&cfg, &stepped).ok();

    // (b) fifty random compositions eliminate.
    let comps = corpus::cut_compositions(50, 20260810);
    let mut part_b = comps.len() == 50;
    for (name, ccfg, d) in &comps {
        assert!(check_derivation(ccfg, d).ok(), "{} must check before elimination", name);
        match cut_eliminate(ccfg, Policy::One, d) {
            Ok(e) => {
                let ok = !e.has_cut()
                    && check_derivation(ccfg, &e).ok()
                    && e.end().alpha_eq(d.end());
                if !ok {
                    eprintln!("{}: bad elimination output", name);
                    part_b = false;
                }
            }
            Err(err) => {
                eprintln!("{}: {}", name, err);
                part_b = false;
            }
        }
    }
    let elapsed = t.elapsed();
    verdict(
        "3 (cut elimination)",
        part_a && part_b && elapsed < Duration::from_secs(60),
        format!(
            "pi1 step verbatim={} renaming-free={}, 50 compositions ok={}, {:.2?}",
            stepped.end() == pi1_prime.end(),
            renaming.is_empty(),
            part_b,
            elapsed
        ),
    );
}

#[test]
fn criterion_4_alba_golden_match() {
    let mut mismatches = Vec::new();
    for ax in [Axiom::Four, Axiom::T, Axiom::B, Axiom::D, Axiom::C] {
        let (l, r) = alba::axiom_inequality(ax);
        match alba::correspond(&l, &r) {
            Ok((_, _, rule)) => {
                if rule.alpha_canonical() != alba::table_rule(ax).alpha_canonical() {
                    mismatches.push(format!("{}", ax));
                }
            }
            Err(e) => mismatches.push(format!("{}: {}", ax, e)),
        }
    }
    verdict(
        "4 (correspondence golden match)",
        mismatches.is_empty(),
        format!("five axioms, mismatches {:?}", mismatches),
    );
}

fn sweep_models() -> Vec<ndml::semantics::LatticeModel> {
    let fixed = fixed_family().len();
    enumerate_models(6, 1, fixed + 100)
}

#[test]
fn criterion_5_soundness_sweep() {
    let t = Instant::now();
    let models = sweep_models();
    assert!(models.len() >= fixed_family().len() + 100, "stream fills: {}", models.len());
    let corpus = load_corpus();
    let mut violations = Vec::new();
    for (name, cfg, d) in &corpus {
        for m in models.iter().filter(|m| m.satisfies_sigma(&cfg.sigma)) {
            if sequent_valid(m, d.end()).is_err() {
                violations.push(format!("{} on {}", name, m.name));
            }
        }
    }
    // The bogus sequent has a countermodel on the two-element chain.
    let bogus = parse_sequent("j1 <= p0 |- j1 <= q0").unwrap();
    let two_chain = &fixed_family()[0];
    let refuted = sequent_valid(two_chain, &bogus).is_err();
    let elapsed = t.elapsed();
    verdict(
        "5 (soundness sweep)",
        violations.is_empty() && refuted && elapsed < Duration::from_secs(120),
        format!(
            "{} models, {} corpus violations, bogus refuted={}, {:.2?}",
            models.len(),
            violations.len(),
            refuted,
            elapsed
        ),
    );
}

#[test]
fn criterion_6_correspondence_equivalence() {
    let models = sweep_models();
    let mut mismatches = Vec::new();
    for ax in [Axiom::Four, Axiom::T, Axiom::B, Axiom::D, Axiom::C] {
        let (l, r) = alba::axiom_inequality(ax);
        let approx = alba::approximate(&l, &r).unwrap();
        let (flat, _) = alba::eliminate(&approx).unwrap();
        for m in &models {
            let direct = m.satisfies_axiom(ax);
            let corresponded = quasi_valid(m, &flat).unwrap();
            if direct != corresponded {
                mismatches.push(format!("{} on {}", ax, m.name));
            }
        }
    }
    verdict(
        "6 (correspondence equivalence)",
        mismatches.is_empty(),
        format!("5 axioms x {} models, mismatches {:?}", sweep_models().len(), mismatches),
    );
}

/// Random formula over two atoms, sized by fuel.
fn random_formula(rng: &mut impl rand::Rng, fuel: usize) -> ndml::syntax::Formula {
    use ndml::syntax::Formula;
    if fuel == 0 {
        return match rng.gen_range(0..4) {
            0 => Formula::atom(0),
            1 => Formula::Atom(VarId::prop_q(0)),
            2 => Formula::Top,
            _ => Formula::Bot,
        };
    }
    match rng.gen_range(0..6) {
        0 => Formula::and(random_formula(rng, fuel - 1), random_formula(rng, fuel - 1)),
        1 => Formula::or(random_formula(rng, fuel - 1), random_formula(rng, fuel - 1)),
        2 => Formula::box_(random_formula(rng, fuel - 1)),
        3 => Formula::dia(random_formula(rng, fuel - 1)),
        _ => random_formula(rng, 0),
    }
}


/// Alpha-equality up to one adjunction step on each consequent pure
/// structure (rotation interposes one when the wrap variable is buried).
fn alpha_eq_mod_adjunction(cfg: &CalcConfig, a: &Sequent, b: &Sequent) -> bool {
    let variants = |s: &Sequent| {
        let mut out = vec![s.clone()];
        for loc in s.locs() {
            if let Some((v, _)) = ndml::transform::adjunction_roundtrip(cfg, s, loc) {
                out.push(v);
            }
        }
        out
    };
    variants(a).iter().any(|x| variants(b).iter().any(|y| x.alpha_eq(y)))
}

#[test]
fn criterion_7_invariant_suites() {
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    let corpus = load_corpus();

    // Exact-two on every sequent of every accepted derivation, including
    // cut-elimination outputs.
    let mut exact_two_ok = true;
    let mut pool: Vec<(CalcConfig, Derivation)> =
        corpus.iter().map(|(_, c, d)| (c.clone(), d.clone())).collect();
    for (_, cfg, d) in corpus::cut_compositions(15, 7) {
        let e = cut_eliminate(&cfg, Policy::One, &d).unwrap();
        pool.push((cfg.clone(), d));
        pool.push((cfg, e));
    }
    for (_, d) in &pool {
        for node in d.flatten() {
            if node.end().exact_two().is_err() {
                exact_two_ok = false;
            }
        }
    }

    // Display succeeds within the 2n+4 bound for every corpus structure.
    let mut display_ok = true;
    for (name, cfg, d) in &corpus {
        let bound = 2 * d.end().len() + 4;
        for loc in d.end().locs() {
            match display(cfg, d, loc) {
                Ok(trace) if trace.steps.len() <= bound => {}
                other => {
                    eprintln!("{} display {}: {:?}", name, loc, other.map(|t| t.steps.len()));
                    display_ok = false;
                }
            }
        }
    }

    // Switch and adjunction roundtrips are alpha-identities, over at
    // least ten thousand random cases.
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    let mut cases = 0usize;
    let mut roundtrip_ok = true;
    let base_cfg = CalcConfig::default();
    while cases < 10_000 {
        // A random exact-two sequent: an identity derivation end, rotated
        // a random number of times.
        let fuel = rng.gen_range(1..4);
        let f = random_formula(&mut rng, fuel);
        let form = corpus::native_identity_form(&f);
        let mut gen = FreshGen::new();
        let outer = match form {
            corpus::IdentityForm::J => gen.fresh(VarKind::Nominal),
            corpus::IdentityForm::M => gen.fresh(VarKind::Conominal),
        };
        let ident = corpus::derive_identity(&base_cfg, &f, form, outer, &mut gen);
        let mut seqs: Vec<Sequent> = ident.flatten().iter().map(|n| n.end().clone()).collect();
        seqs.truncate(6);
        for s in seqs {
            for v in s.term_vars() {
                // Forward switch consuming v, then the inverse consuming
                // the variable it introduced.
                let all = s.term_vars();
                let Ok((rule, b)) = ndml::transform::switch_step_for(&base_cfg, Policy::One, &s, v, &all) else {
                    continue;
                };
                let Ok(inst) = ndml::calculus::apply(&base_cfg, rule, &[s.clone()], &b) else {
                    continue;
                };
                let introduced = match rule {
                    r if r.is_clockwise_switch() => b.vars[&'m'],
                    _ => b.vars[&'j'],
                };
                let mid = inst.conclusion.clone();
                let all2 = mid.term_vars();
                let Ok((rule2, b2)) =
                    ndml::transform::switch_step_for(&base_cfg, Policy::One, &mid, introduced, &all2)
                else {
                    roundtrip_ok = false;
                    continue;
                };
                let Ok(inst2) = ndml::calculus::apply(&base_cfg, rule2, &[mid], &b2) else {
                    roundtrip_ok = false;
                    continue;
                };
                if !inst2.conclusion.alpha_eq(&s) {
                    eprintln!("roundtrip broke: {} -> {} -> {}", s, inst.conclusion, inst2.conclusion);
                    roundtrip_ok = false;
                }
                cases += 1;
            }
            // Adjunction roundtrips on every consequent modal pure
            // structure.
            for loc in s.locs() {
                if let Some((d1, d2)) = ndml::transform::adjunction_roundtrip(&base_cfg, &s, loc) {
                    if !d2.alpha_eq(&s) {
                        roundtrip_ok = false;
                    }
                    let _ = d1;
                    cases += 1;
                }
            }
        }
    }

    // Canonical form satisfies the predicate; a rotation step composed
    // with its inverse is an alpha-identity.
    let mut canon_ok = true;
    for (name, cfg, d) in &corpus {
        match canonical_form(d.end()) {
            Ok(c) => {
                if !is_canonical(&c) {
                    eprintln!("{}: canonical form not canonical", name);
                    canon_ok = false;
                    continue;
                }
                for dir in [Direction::Clockwise, Direction::AntiClockwise] {
                    if let Ok((_, rotated)) = rotate_step(cfg, Policy::One, &c, dir) {
                        let back = match dir {
                            Direction::Clockwise => Direction::AntiClockwise,
                            Direction::AntiClockwise => Direction::Clockwise,
                        };
                        match rotate_step(cfg, Policy::One, &rotated, back) {
                            Ok((_, again)) if alpha_eq_mod_adjunction(cfg, &again, &c) => {}
                            other => {
                                eprintln!("{}: rotation closure failed {:?}", name, other.map(|x| x.1.to_string()));
                                canon_ok = false;
                            }
                        }
                    }
                }
            }
            Err(e) => {
                eprintln!("{}: {}", name, e);
                canon_ok = false;
            }
        }
    }
    // Full-cycle law on a fully variable-linked cycle.
    let cyc = {
        let cfg = CalcConfig::default();
        corpus::pi1(&cfg).end().clone()
    };
    let canon = canonical_form(&cyc).unwrap();
    let mut cur = canon.clone();
    let mut forward = 0;
    while forward < 2 {
        let (_, next) = rotate_step(&base_cfg, Policy::One, &cur, Direction::Clockwise).unwrap();
        cur = next;
        forward += 1;
    }
    for _ in 0..forward {
        let (_, prev) = rotate_step(&base_cfg, Policy::One, &cur, Direction::AntiClockwise).unwrap();
        cur = prev;
    }
    let full_cycle = cur.alpha_eq(&canon);

    verdict(
        "7 (invariant suites)",
        exact_two_ok && display_ok && roundtrip_ok && canon_ok && full_cycle && cases >= 10_000,
        format!(
            "exact-two={} display={} roundtrips(n={})={} canonical/rotation={} cycle-closure={}",
            exact_two_ok, display_ok, cases, roundtrip_ok, canon_ok, full_cycle
        ),
    );
}
