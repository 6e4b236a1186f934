//! Prover stress: corpus end-sequents and assorted non-theorems.

use ndml::calculus::CalcConfig;
use ndml::proof::check_derivation;
use ndml::search::{invertible_search_config, prove_invertible};
use ndml::syntax::parse_sequent;
use std::time::Instant;

fn main() {
    let mut failures = 0;
    for entry in ndml::corpus::all() {
        let cfg = CalcConfig::with_sigma(&entry.sigma);
        let goal = entry.derivation.end().clone();
        let t = Instant::now();
        match prove_invertible(&cfg, &goal, 14) {
            Some(d) => {
                let ok = check_derivation(&invertible_search_config(&cfg), &d).ok()
                    && d.end().multiset_eq(&goal);
                println!(
                    "{:14} {} {:>9.2?} nodes={}",
                    entry.name,
                    if ok { "ok  " } else { "BAD " },
                    t.elapsed(),
                    d.node_count()
                );
                if !ok {
                    failures += 1;
                }
            }
            None => {
                println!("{:14} MISS {:>9.2?}", entry.name, t.elapsed());
                failures += 1;
            }
        }
    }
    // Non-theorems must stay unprovable.
    for bad in [
        "j1 <= p0 |- j1 <= q0",
        "j1 <= <>p0 |- j1 <= p0",
        "j1 <= p0|q0 |- j1 <= p0",
        "<>p0 <= m0 |- []p0 <= m0",
        "j1 <= []p0 |- j1 <= p0",
    ] {
        let goal = parse_sequent(bad).unwrap();
        let t = Instant::now();
        if let Some(d) = prove_invertible(&CalcConfig::default(), &goal, 9) {
            println!("UNSOUND: proved `{}`:", bad);
            for n in d.flatten() {
                println!("  [{}] {}", n.rule(), n.end());
            }
            failures += 1;
        } else {
            println!("{:40} unprovable {:>9.2?}", bad, t.elapsed());
        }
    }
    if failures > 0 {
        std::process::exit(1);
    }
    println!("prover stress passed");
}
