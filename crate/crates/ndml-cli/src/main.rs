//! Command-line front end: checking derivation files, bounded proving,
//! cut elimination, display traces, canonical form, correspondence, and
//! semantic validation.
//!
//! Exit codes: 0 success, 1 semantic failure (invalid proof, countermodel
//! found, search exhausted), 2 usage or parse error.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ndml::alba;
use ndml::calculus::{Axiom, CalcConfig, Mode};
use ndml::proof::{self, check_derivation, Derivation, LoadReport};
use ndml::search;
use ndml::semantics::{self, enumerate_models, sequent_valid};
use ndml::syntax::{parse_inequality, parse_sequent, Loc};
use ndml::transform::{self, Policy};

#[derive(Parser)]
#[command(name = "ndml", version, about = "Labelled sequent calculi for lattice-based modal logic")]
struct Cli {
    /// Machine-readable JSON reports.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SigmaOpt {
    /// Extension axioms, e.g. --sigma T,4 (subsets of T,4,B,D,C).
    #[arg(long, value_delimiter = ',')]
    sigma: Vec<String>,
}

impl SigmaOpt {
    fn parse(&self) -> Result<BTreeSet<Axiom>, String> {
        self.sigma.iter().map(|s| s.trim().parse::<Axiom>()).collect()
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check a derivation file.
    Check {
        file: PathBuf,
        #[command(flatten)]
        sigma: SigmaOpt,
        /// Mode override; the file header wins when present.
        #[arg(long)]
        mode: Option<String>,
    },
    /// Search for a proof of a sequent and write a derivation file.
    Prove {
        sequent: String,
        #[command(flatten)]
        sigma: SigmaOpt,
        /// NonInvertible or Invertible (default).
        #[arg(long, default_value = "Invertible")]
        mode: String,
        #[arg(long, default_value_t = 12)]
        depth: usize,
        /// Write the found derivation here.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Eliminate every cut in a derivation file.
    Cutelim {
        file: PathBuf,
        #[command(flatten)]
        sigma: SigmaOpt,
        #[arg(long, short)]
        output: Option<PathBuf>,
        /// Emit the rewritten derivation for independent re-checking.
        #[arg(long)]
        trace: bool,
    },
    /// Display a structure of a derivation's end-sequent.
    Display {
        file: PathBuf,
        /// Occurrence locator, e.g. ant:0 or con:1.
        #[arg(long)]
        target: String,
        #[command(flatten)]
        sigma: SigmaOpt,
    },
    /// Reorder a sequent into canonical cyclic form.
    Canon { sequent: String },
    /// Run the correspondence engine on an inequality `A <= B`.
    Alba { inequality: String },
    /// Search for countermodels of a sequent over the model stream.
    Validate {
        sequent: String,
        /// Number of seeded random models beyond the fixed family.
        #[arg(long, default_value_t = 20)]
        models: usize,
        #[arg(long, default_value_t = 5)]
        max_size: usize,
        #[command(flatten)]
        sigma: SigmaOpt,
        /// Check against a single model file instead of the stream.
        #[arg(long)]
        model_file: Option<PathBuf>,
    },
    /// Check, cut-eliminate, and semantically validate a corpus directory.
    Corpus {
        dir: PathBuf,
        #[arg(long, default_value_t = 4)]
        max_size: usize,
    },
    /// Write the model stream to a directory.
    Models {
        dir: PathBuf,
        #[arg(long, default_value_t = 20)]
        count: usize,
        #[arg(long, default_value_t = 5)]
        max_size: usize,
    },
}

fn seed() -> u64 {
    std::env::var("NDML_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(1)
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    match s {
        "NonInvertible" | "noninvertible" | "strict" => Ok(Mode::NonInvertible),
        "Invertible" | "invertible" => Ok(Mode::Invertible),
        other => Err(format!("unknown mode `{}`", other)),
    }
}

/// Derivation file envelope: configuration header plus the root node.
fn read_derivation(path: &Path) -> Result<(CalcConfig, Derivation, LoadReport), String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {}", path.display(), e))?;
    let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let (cfg, node) = envelope(&v)?;
    let mut report = LoadReport::default();
    let d = proof::from_json(&cfg, node, &mut report)?;
    Ok((cfg, d, report))
}

fn envelope(v: &serde_json::Value) -> Result<(CalcConfig, &serde_json::Value), String> {
    if let Some(node) = v.get("derivation") {
        let sigma: BTreeSet<Axiom> = v
            .get("sigma")
            .and_then(|s| s.as_array())
            .map(|a| {
                a.iter()
                    .filter_map(|x| x.as_str())
                    .map(|s| s.parse::<Axiom>())
                    .collect::<Result<_, _>>()
            })
            .transpose()?
            .unwrap_or_default();
        let mode = v
            .get("mode")
            .and_then(|m| m.as_str())
            .map(parse_mode)
            .transpose()?
            .unwrap_or(Mode::NonInvertible);
        let relaxed = v.get("relaxed_switch").and_then(|r| r.as_bool()).unwrap_or(false);
        Ok((CalcConfig { sigma, mode, relaxed_switch: relaxed }, node))
    } else {
        Ok((CalcConfig::default(), v))
    }
}

fn write_derivation(path: &Path, cfg: &CalcConfig, d: &Derivation) -> Result<(), String> {
    let envelope = serde_json::json!({
        "sigma": cfg.sigma.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
        "mode": match cfg.mode { Mode::NonInvertible => "NonInvertible", Mode::Invertible => "Invertible" },
        "relaxed_switch": cfg.relaxed_switch,
        "derivation": proof::to_json(d),
    });
    std::fs::write(path, serde_json::to_string_pretty(&envelope).unwrap())
        .map_err(|e| format!("{}: {}", path.display(), e))
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Check { file, sigma, mode } => {
            let (mut cfg, d, load) = read_derivation(&file)?;
            cfg.sigma.extend(sigma.parse()?);
            if let Some(m) = mode {
                cfg.mode = parse_mode(&m)?;
            }
            let report = check_derivation(&cfg, &d);
            if cli.json {
                let out = serde_json::json!({
                    "ok": report.ok(),
                    "end": d.end().to_string(),
                    "nodes": d.node_count(),
                    "renamings": load.renamings.len(),
                    "violations": report.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                });
                println!("{}", out);
            } else if report.ok() {
                println!("ok: {} node(s), end-sequent `{}`", d.node_count(), d.end());
            } else {
                for v in &report.violations {
                    println!("violation: {}", v);
                }
            }
            Ok(if report.ok() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Prove { sequent, sigma, mode, depth, output } => {
            let goal = parse_sequent(&sequent).map_err(|e| e.to_string())?;
            let mode = parse_mode(&mode)?;
            let base = CalcConfig { sigma: sigma.parse()?, mode, relaxed_switch: false };
            let found = match mode {
                Mode::Invertible => search::prove_invertible(&base, &goal, depth),
                Mode::NonInvertible => search::prove(
                    &base,
                    &goal,
                    &search::SearchConfig { max_depth: depth, ..Default::default() },
                ),
            };
            match found {
                Some(d) => {
                    let cfg_used = match mode {
                        Mode::Invertible => search::invertible_search_config(&base),
                        Mode::NonInvertible => base.clone(),
                    };
                    if let Some(path) = output {
                        write_derivation(&path, &cfg_used, &d)?;
                    }
                    if cli.json {
                        println!(
                            "{}",
                            serde_json::json!({"ok": true, "nodes": d.node_count(), "derivation": proof::to_json(&d)})
                        );
                    } else {
                        println!("proof found: {} node(s)", d.node_count());
                        for node in d.flatten() {
                            println!("  [{}] {}", node.rule(), node.end());
                        }
                    }
                    Ok(ExitCode::SUCCESS)
                }
                None => {
                    if cli.json {
                        println!("{}", serde_json::json!({"ok": false}));
                    } else {
                        println!("search exhausted at depth {}", depth);
                    }
                    Ok(ExitCode::from(1))
                }
            }
        }
        Command::Cutelim { file, sigma, output, trace } => {
            let (mut cfg, d, _) = read_derivation(&file)?;
            cfg.sigma.extend(sigma.parse()?);
            let e = transform::cut_eliminate(&cfg, Policy::One, &d).map_err(|e| e.to_string())?;
            let report = check_derivation(&cfg, &e);
            if let Some(path) = output {
                write_derivation(&path, &cfg, &e)?;
            }
            if trace {
                println!("{}", serde_json::to_string_pretty(&proof::to_json(&e)).unwrap());
            }
            if cli.json {
                println!(
                    "{}",
                    serde_json::json!({
                        "ok": report.ok() && !e.has_cut(),
                        "cut_free": !e.has_cut(),
                        "end": e.end().to_string(),
                        "nodes": e.node_count(),
                    })
                );
            } else {
                println!(
                    "cut-free: {} node(s), end-sequent `{}`, re-check {}",
                    e.node_count(),
                    e.end(),
                    if report.ok() { "ok" } else { "FAILED" }
                );
            }
            Ok(if report.ok() && !e.has_cut() { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Display { file, target, sigma } => {
            let (mut cfg, d, _) = read_derivation(&file)?;
            cfg.sigma.extend(sigma.parse()?);
            let loc: Loc = target.parse()?;
            let trace = transform::display(&cfg, &d, loc).map_err(|e| e.to_string())?;
            // Each recorded step is independently re-checkable.
            for s in &trace.steps {
                let vs = ndml::calculus::check_instance(&cfg, &s.inst);
                if !vs.is_empty() {
                    return Err(format!("trace step {} failed re-checking: {:?}", s.inst.rule, vs));
                }
            }
            if cli.json {
                let steps: Vec<_> = trace
                    .steps
                    .iter()
                    .map(|s| {
                        serde_json::json!({
                            "rule": s.inst.rule.name(),
                            "conclusion": s.inst.conclusion.to_string(),
                            "inverse": s.inverse.map(|r| r.name()),
                        })
                    })
                    .collect();
                println!(
                    "{}",
                    serde_json::json!({"steps": steps, "result": trace.result.to_string()})
                );
            } else {
                for s in &trace.steps {
                    println!("  [{}] {}", s.inst.rule, s.inst.conclusion);
                }
                println!("displayed in: {}", trace.result);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Canon { sequent } => {
            let s = parse_sequent(&sequent).map_err(|e| e.to_string())?;
            match transform::canonical_form(&s) {
                Ok(c) => {
                    if cli.json {
                        println!("{}", serde_json::json!({"ok": true, "canonical": c.to_string()}));
                    } else {
                        println!("{}", c);
                    }
                    Ok(ExitCode::SUCCESS)
                }
                Err(e) => {
                    if cli.json {
                        println!("{}", serde_json::json!({"ok": false, "error": e.to_string()}));
                    } else {
                        println!("not cyclic: {}", e);
                    }
                    Ok(ExitCode::from(1))
                }
            }
        }
        Command::Alba { inequality } => {
            let (lhs, rhs) = parse_inequality(&inequality).map_err(|e| e.to_string())?;
            let (chain, correspondent, rule) =
                alba::correspond(&lhs, &rhs).map_err(|e| e.to_string())?;
            if cli.json {
                let steps: Vec<_> = chain
                    .iter()
                    .map(|s| serde_json::json!({"step": s.name, "result": s.result.to_string()}))
                    .collect();
                println!(
                    "{}",
                    serde_json::json!({
                        "chain": steps,
                        "correspondent": correspondent.to_string(),
                        "rule": rule.to_string(),
                    })
                );
            } else {
                println!("input: {} <= {}", lhs, rhs);
                for s in &chain {
                    println!("  [{}] {}", s.name, s.result);
                }
                println!("rule: {}", rule);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Validate { sequent, models, max_size, sigma, model_file } => {
            let s = parse_sequent(&sequent).map_err(|e| e.to_string())?;
            let props = s.props().len();
            let noms = s.term_vars().iter().filter(|v| v.kind == ndml::syntax::VarKind::Nominal).count();
            let conoms = s.term_vars().len() - noms;
            if props > 4 || noms > 4 || conoms > 4 {
                return Err(format!(
                    "sequent too large for exhaustive search: {} props, {} nominals, {} conominals (cap 4 each)",
                    props, noms, conoms
                ));
            }
            let sigma = sigma.parse()?;
            let pool = match model_file {
                Some(path) => {
                    let text =
                        std::fs::read_to_string(&path).map_err(|e| format!("{}: {}", path.display(), e))?;
                    let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
                    vec![semantics::model_from_json(&v).map_err(|e| e.to_string())?]
                }
                None => enumerate_models(max_size, seed(), semantics::fixed_family().len() + models),
            };
            let mut checked = 0;
            for m in &pool {
                if !m.satisfies_sigma(&sigma) {
                    continue;
                }
                checked += 1;
                if let Err(counter) = sequent_valid(m, &s) {
                    if cli.json {
                        println!(
                            "{}",
                            serde_json::json!({
                                "ok": false,
                                "model": m.name,
                                "size": m.size,
                                "assignment": counter.to_string(),
                            })
                        );
                    } else {
                        println!("countermodel on `{}` (size {}): {}", m.name, m.size, counter);
                    }
                    return Ok(ExitCode::from(1));
                }
            }
            if cli.json {
                println!("{}", serde_json::json!({"ok": true, "models": checked}));
            } else {
                println!("valid on all {} model(s) satisfying sigma", checked);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Corpus { dir, max_size } => {
            let mut entries: Vec<PathBuf> = std::fs::read_dir(&dir)
                .map_err(|e| format!("{}: {}", dir.display(), e))?
                .filter_map(|e| e.ok())
                .map(|e| e.path())
                .filter(|p| p.extension().map(|x| x == "json").unwrap_or(false))
                .collect();
            entries.sort();
            if entries.is_empty() {
                return Err(format!("no derivation files in {}", dir.display()));
            }
            let pool = enumerate_models(max_size, seed(), semantics::fixed_family().len() + 20);
            let mut failures = 0;
            for path in &entries {
                let name = path.file_stem().unwrap().to_string_lossy().to_string();
                let (cfg, d, _) = read_derivation(path)?;
                let check = check_derivation(&cfg, &d);
                let elim = if d.has_cut() {
                    match transform::cut_eliminate(&cfg, Policy::One, &d) {
                        Ok(e) => {
                            let r = check_derivation(&cfg, &e);
                            !e.has_cut() && r.ok() && e.end().alpha_eq(d.end())
                        }
                        Err(_) => false,
                    }
                } else {
                    true
                };
                let mut semantic = true;
                for m in pool.iter().filter(|m| m.satisfies_sigma(&cfg.sigma)) {
                    if sequent_valid(m, d.end()).is_err() {
                        semantic = false;
                        break;
                    }
                }
                let ok = check.ok() && elim && semantic;
                if !ok {
                    failures += 1;
                }
                println!(
                    "{} {:16} check={} cutelim={} semantics={}",
                    if ok { "ok  " } else { "FAIL" },
                    name,
                    check.ok(),
                    elim,
                    semantic
                );
            }
            Ok(if failures == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
        }
        Command::Models { dir, count, max_size } => {
            std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
            let pool = enumerate_models(max_size, seed(), count);
            for m in &pool {
                let path = dir.join(format!("{}.json", m.name));
                std::fs::write(&path, serde_json::to_string_pretty(&semantics::model_to_json(m)).unwrap())
                    .map_err(|e| e.to_string())?;
            }
            println!("wrote {} model(s) to {}", pool.len(), dir.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {}", msg);
            ExitCode::from(2)
        }
    }
}
