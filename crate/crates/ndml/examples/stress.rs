//! One-off stress run: deep cut stacks, many seeds, broad model sweeps.

use ndml::calculus::CalcConfig;
use ndml::proof::check_derivation;
use ndml::semantics::{enumerate_models, sequent_valid};
use ndml::transform::{cut_eliminate, Policy};
use std::time::Instant;

fn main() {
    let t0 = Instant::now();
    let mut total = 0;
    let mut failures = 0;

    // Deep stacks: repeatedly compose identities onto every legal
    // occurrence, several seeds.
    for seed in [1u64, 7, 99, 12345, 20260810] {
        let comps = ndml::corpus::cut_compositions(60, seed);
        for (name, cfg, d) in &comps {
            // Stack further cuts wherever legal, up to depth 3.
            let mut stack = vec![d.clone()];
            for _ in 0..3 {
                let Some(top) = stack.last() else { break };
                let mut next = None;
                for loc in top.end().locs() {
                    if let Some(c) = ndml::corpus::compose_with_identity(cfg, top, loc) {
                        next = Some(c);
                        break;
                    }
                }
                match next {
                    Some(c) => stack.push(c),
                    None => break,
                }
            }
            for d in &stack {
                total += 1;
                if !check_derivation(cfg, d).ok() {
                    println!("FAIL pre-check {}", name);
                    failures += 1;
                    continue;
                }
                match cut_eliminate(cfg, Policy::One, d) {
                    Ok(e) => {
                        if e.has_cut()
                            || !check_derivation(cfg, &e).ok()
                            || !e.end().alpha_eq(d.end())
                        {
                            println!("FAIL post {} ({} nodes)", name, d.node_count());
                            failures += 1;
                        }
                    }
                    Err(err) => {
                        println!("FAIL elim {} ({} nodes): {}", name, d.node_count(), err);
                        failures += 1;
                    }
                }
                // Policy two as well.
                match cut_eliminate(cfg, Policy::Two, d) {
                    Ok(e) => {
                        if e.has_cut() || !check_derivation(cfg, &e).ok() {
                            println!("FAIL p2 {}", name);
                            failures += 1;
                        }
                    }
                    Err(err) => {
                        println!("FAIL p2 elim {}: {}", name, err);
                        failures += 1;
                    }
                }
            }
        }
    }
    println!("cut stress: {} cases, {} failures, {:?}", total, failures, t0.elapsed());

    // Semantic sweep: 500 models across seeds, soundness of corpus ends
    // and of every stacked end.
    let t1 = Instant::now();
    let mut checked = 0;
    for seed in [1u64, 2, 3] {
        let models = enumerate_models(6, seed, 180);
        for entry in ndml::corpus::all() {
            let cfg = CalcConfig::with_sigma(&entry.sigma);
            for m in models.iter().filter(|m| m.satisfies_sigma(&cfg.sigma)) {
                checked += 1;
                if sequent_valid(m, entry.derivation.end()).is_err() {
                    println!("SOUNDNESS FAIL {} on {}", entry.name, m.name);
                    failures += 1;
                }
            }
        }
    }
    println!("semantic stress: {} checks, {:?}", checked, t1.elapsed());
    if failures > 0 {
        std::process::exit(1);
    }
    println!("all stress checks passed");
}
