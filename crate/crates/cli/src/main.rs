//! Command-line front end: satisfiability with certificates, model checking,
//! certificate verification, and rule-set audits.
//!
//! Exit codes: `sat` uses 10 for SAT and 20 for UNSAT; usage, parse and
//! guardedness problems exit 1; internal errors and resource ceilings exit 2.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use comu::cert::{tableau_from_json, tableau_to_json, verify_closed};
use comu::logic::Logic;
use comu::model_json;
use comu::onestep::{audit_ruleset, CoefficientBounds};
use comu::parse::parse;
use comu::semantics::{check_via_game, eval};
use comu::session::Bounds;
use comu::tabgame::{decide_sat, Verdict};

#[derive(Parser)]
#[command(name = "comu", version, about = "Satisfiability and model checking for coalgebraic fixpoint logics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// Logic: k | graded | prob | coalition:N | monotone
    #[arg(long)]
    logic: Option<String>,
    /// Coefficient/threshold search bound for the graded and probabilistic
    /// rule schemas (default: derived per sequent)
    #[arg(long)]
    coeff_bound: Option<u64>,
    /// Ceiling on explored game positions
    #[arg(long)]
    max_positions: Option<usize>,
    /// Model-state cap for the model-checking game
    #[arg(long)]
    max_states: Option<usize>,
    /// Print statistics (arena size, automaton states, solve time) to stderr
    #[arg(long)]
    stats: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Decide satisfiability; exits 10 (SAT) or 20 (UNSAT)
    Sat {
        /// Formula, or @path to read it from a file
        formula: String,
        #[command(flatten)]
        common: CommonOpts,
        /// Write the model witnessing SAT to this path
        #[arg(long)]
        emit_model: Option<PathBuf>,
        /// Write the closed tableau witnessing UNSAT to this path
        #[arg(long)]
        emit_tableau: Option<PathBuf>,
    },
    /// Evaluate a formula on a model and print the satisfying states
    Check {
        /// Model JSON path
        model: PathBuf,
        /// Formula, or @path
        formula: String,
        /// Solve the model-checking game instead of iterating fixpoints
        #[arg(long)]
        via_game: bool,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Verify a closed-tableau certificate against a formula
    Certify {
        /// Tableau JSON path
        tableau: PathBuf,
        /// Formula, or @path
        formula: String,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Spot-check one-step soundness and completeness of a rule set
    OnestepAudit {
        #[command(flatten)]
        common: CommonOpts,
        /// Number of random samples
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// RNG seed (audits are deterministic per seed)
        #[arg(long, default_value_t = 2009)]
        seed: u64,
    },
}

fn parse_logic(text: &str) -> Result<Logic, String> {
    match text {
        "k" | "kripke" => Ok(Logic::Kripke),
        "graded" => Ok(Logic::Graded),
        "prob" | "probabilistic" => Ok(Logic::Probabilistic),
        "monotone" => Ok(Logic::Monotone),
        other => {
            if let Some(n) = other.strip_prefix("coalition:") {
                let agents: u32 = n
                    .parse()
                    .map_err(|_| format!("bad agent count in {other:?}"))?;
                if agents == 0 || agents > 32 {
                    return Err("agent count must be in 1..=32".into());
                }
                Ok(Logic::Coalition { agents })
            } else {
                Err(format!(
                    "unknown logic {other:?} (expected k|graded|prob|coalition:N|monotone)"
                ))
            }
        }
    }
}

fn resolve_formula(source: &str) -> Result<String, String> {
    if let Some(path) = source.strip_prefix('@') {
        std::fs::read_to_string(path).map_err(|e| format!("cannot read {path}: {e}"))
    } else {
        Ok(source.to_string())
    }
}

fn bounds_from(common: &CommonOpts) -> Bounds {
    let mut bounds = Bounds::default();
    if let Some(b) = common.coeff_bound {
        bounds.coeff = Some(CoefficientBounds {
            coeff: b,
            threshold: b,
        });
    }
    if let Some(p) = common.max_positions {
        bounds.max_positions = p;
    }
    if let Some(s) = common.max_states {
        bounds.max_model_states = s;
    }
    bounds
}

const EXIT_SAT: u8 = 10;
const EXIT_UNSAT: u8 = 20;
const EXIT_USAGE: u8 = 1;
const EXIT_INTERNAL: u8 = 2;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(CliError::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            EXIT_INTERNAL
        }
    };
    ExitCode::from(code)
}

enum CliError {
    Usage(String),
    Internal(String),
}

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Sat {
            formula,
            common,
            emit_model,
            emit_tableau,
        } => {
            let logic = parse_logic(
                common
                    .logic
                    .as_deref()
                    .ok_or_else(|| CliError::Usage("--logic is required".into()))?,
            )
            .map_err(CliError::Usage)?;
            let text = resolve_formula(&formula).map_err(CliError::Usage)?;
            let parsed = parse(&text, logic).map_err(usage)?;
            let bounds = bounds_from(&common);
            let out = decide_sat(&parsed, logic, bounds).map_err(|e| match e {
                comu::tabgame::EngineError::Session(s) => CliError::Usage(s.to_string()),
                other => CliError::Internal(other.to_string()),
            })?;
            if common.stats {
                eprintln!(
                    "closure: {} formulas; arena: {} positions; automaton: {} states; solve: {} ms",
                    out.stats.closure_size,
                    out.stats.arena_positions,
                    out.stats.automaton_states,
                    out.stats.solve_millis
                );
            }
            match out.verdict {
                Verdict::Sat => {
                    println!("SAT");
                    if let Some(path) = emit_model {
                        let model = out.model.as_ref().expect("model accompanies SAT");
                        // self-check before writing: the root must satisfy the
                        // query in the emitted model
                        let root = model.root.expect("extracted models carry a root");
                        let truth = eval(model, &parsed)
                            .map_err(|e| CliError::Internal(format!("self-check: {e}")))?;
                        if truth & (1 << root) == 0 {
                            return Err(CliError::Internal(
                                "self-check failed: extracted model does not satisfy the formula"
                                    .into(),
                            ));
                        }
                        std::fs::write(&path, model_json::to_json(model))
                            .map_err(|e| CliError::Usage(format!("write {path:?}: {e}")))?;
                    }
                    Ok(EXIT_SAT)
                }
                Verdict::Unsat => {
                    println!("UNSAT");
                    if let Some(path) = emit_tableau {
                        let tableau = out.tableau.as_ref().expect("tableau accompanies UNSAT");
                        verify_closed(tableau, &parsed, logic, bounds).map_err(|e| {
                            CliError::Internal(format!("self-check failed: {e}"))
                        })?;
                        std::fs::write(&path, tableau_to_json(tableau, logic))
                            .map_err(|e| CliError::Usage(format!("write {path:?}: {e}")))?;
                    }
                    Ok(EXIT_UNSAT)
                }
            }
        }
        Command::Check {
            model,
            formula,
            via_game,
            common,
        } => {
            let text = std::fs::read_to_string(&model)
                .map_err(|e| CliError::Usage(format!("cannot read {model:?}: {e}")))?;
            let model = model_json::from_json(&text).map_err(usage)?;
            if let Some(l) = common.logic.as_deref() {
                let requested = parse_logic(l).map_err(CliError::Usage)?;
                if requested != model.logic {
                    return Err(CliError::Usage(format!(
                        "model kind {} does not match --logic {}",
                        model.logic, requested
                    )));
                }
            }
            let source = resolve_formula(&formula).map_err(CliError::Usage)?;
            let parsed = parse(&source, model.logic).map_err(usage)?;
            let truth = eval(&model, &parsed).map_err(usage)?;
            let result = if via_game {
                let cap = common
                    .max_states
                    .unwrap_or(Bounds::default().max_model_states);
                let via = check_via_game(&model, &parsed, cap)
                    .map_err(|e| CliError::Internal(e.to_string()))?;
                if via != truth {
                    return Err(CliError::Internal(
                        "model-checking game disagrees with direct evaluation".into(),
                    ));
                }
                via
            } else {
                truth
            };
            for (i, name) in model.states.iter().enumerate() {
                if result & (1 << i) != 0 {
                    println!("{name}");
                }
            }
            Ok(0)
        }
        Command::Certify {
            tableau,
            formula,
            common,
        } => {
            let logic = parse_logic(
                common
                    .logic
                    .as_deref()
                    .ok_or_else(|| CliError::Usage("--logic is required".into()))?,
            )
            .map_err(CliError::Usage)?;
            let text = std::fs::read_to_string(&tableau)
                .map_err(|e| CliError::Usage(format!("cannot read {tableau:?}: {e}")))?;
            let parsed_tableau = tableau_from_json(&text, logic).map_err(usage)?;
            let source = resolve_formula(&formula).map_err(CliError::Usage)?;
            let parsed = parse(&source, logic).map_err(usage)?;
            match verify_closed(&parsed_tableau, &parsed, logic, bounds_from(&common)) {
                Ok(()) => {
                    println!("certificate accepted");
                    Ok(0)
                }
                Err(e) => {
                    eprintln!("{e}");
                    Ok(EXIT_USAGE)
                }
            }
        }
        Command::OnestepAudit {
            common,
            samples,
            seed,
        } => {
            let logic = parse_logic(
                common
                    .logic
                    .as_deref()
                    .ok_or_else(|| CliError::Usage("--logic is required".into()))?,
            )
            .map_err(CliError::Usage)?;
            let bounds = common.coeff_bound.map(|b| CoefficientBounds {
                coeff: b,
                threshold: b,
            });
            let caps = Bounds::default().oracle;
            let report = audit_ruleset(logic, samples, seed, &caps, bounds);
            println!(
                "audited {} samples: {} soundness violations, {} completeness violations",
                report.samples,
                report.soundness_violations.len(),
                report.completeness_violations.len()
            );
            for note in &report.schema_notes {
                println!("note: {note}");
            }
            for v in report
                .soundness_violations
                .iter()
                .chain(&report.completeness_violations)
                .take(10)
            {
                println!("counterexample: {v}");
            }
            Ok(if report.passed() { 0 } else { EXIT_USAGE })
        }
    }
}
