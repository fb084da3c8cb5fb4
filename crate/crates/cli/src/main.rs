//! `lamshift`: reduce, compare and translate terms of the λ-calculus with
//! shift and reset from the command line.

use std::fs;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use lamshift::axioms::prove_equal;
use lamshift::bisim::{self, ProbePool, Verdict};
use lamshift::cps::{cps_equiv, cps_translate, EquivVerdict};
use lamshift::lts::{self, Label};
use lamshift::reduction::{self, Observable};
use lamshift::syntax::PureContext;
use lamshift::testgen::{self, FuzzReport, GenConfig};
use lamshift::{Abbreviations, Term};

const GRAMMAR: &str = "\
Term syntax:
  t ::= x                 variable
      | \\x. t  |  λx. t    abstraction
      | t t               application (left associative)
      | S k. t | shift k. t  shift
      | <t>               reset
      | (t)
  Binder bodies extend as far right as possible.
  Contexts are terms with one hole written `@`, e.g. `i @` or `@ (w w)`.
  Abbreviations: i = \\x.x, w = \\x.x x, omega = w w.
  `--` starts a comment that runs to the end of the line.";

const SUCCESS: u8 = 0;
const NEGATIVE: u8 = 1;
const INPUT_ERROR: u8 = 2;
const UNKNOWN: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "lamshift", version, about = "Workbench for call-by-value λ-calculus with shift and reset")]
#[command(after_help = GRAMMAR)]
struct Cli {
    /// Print machine-readable JSON.
    #[arg(long, global = true)]
    json: bool,

    /// Step budget (default depends on the command).
    #[arg(long, global = true)]
    fuel: Option<u64>,

    /// Random seed for generated terms.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a term and print it back.
    Parse { term: String },
    /// Reduce a closed term to a value, a stuck term or the end of the fuel (default 10000).
    Reduce {
        term: String,
        /// Print every intermediate term with the rule that produced it.
        #[arg(long)]
        trace: bool,
    },
    /// Run internal transitions until a value or stuck term (default fuel 10000).
    Eval { term: String },
    /// Show the transitions of a closed term.
    Lts {
        term: String,
        /// Also probe with this value.
        #[arg(long)]
        value: Option<String>,
        /// Also probe with this context (hole `@`).
        #[arg(long)]
        context: Option<String>,
    },
    /// Play the bounded bisimulation game (default fuel 500 per node).
    Bisim {
        t0: String,
        t1: String,
        #[arg(long, default_value_t = 4)]
        depth: u32,
        /// JSON file {"values": [...], "contexts": [...]}.
        #[arg(long)]
        pool: Option<String>,
    },
    /// Print the CPS translation.
    Cps { term: String },
    /// Compare βη-normal forms of the CPS translations (default fuel 5000).
    CpsEquiv { t0: String, t1: String },
    /// Search for an equational proof.
    Prove {
        t0: String,
        t1: String,
        #[arg(long, default_value_t = 10_000)]
        budget: usize,
    },
    /// Differential checks on generated terms (default fuel 200).
    Fuzz {
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, value_enum, default_value_t = Check::All)]
        check: Check,
        #[arg(long, default_value_t = 20)]
        max_size: usize,
        /// Normalization fuel for the CPS check.
        #[arg(long, default_value_t = 5000)]
        cps_fuel: u64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Check {
    Lts,
    Stuck,
    CpsSound,
    All,
}

/// An error in the user's input: reported with the grammar and exit code 2.
struct InputError(String);

impl<E: std::fmt::Display> From<E> for InputError {
    fn from(e: E) -> InputError {
        InputError(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { INPUT_ERROR } else { SUCCESS };
            let _ = e.print();
            if e.use_stderr() {
                eprintln!("\n{GRAMMAR}");
            }
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(InputError(msg)) => {
            eprintln!("error: {msg}\n\n{GRAMMAR}");
            ExitCode::from(INPUT_ERROR)
        }
    }
}

struct Out {
    json: bool,
}

impl Out {
    fn emit(&self, value: serde_json::Value, human: impl FnOnce() -> String) {
        if self.json {
            println!("{}", serde_json::to_string_pretty(&value).expect("serializable"));
        } else {
            println!("{}", human());
        }
    }
}

fn term(src: &str) -> Result<Term, InputError> {
    Ok(lamshift::parse_with(src, &Abbreviations::standard())?)
}

fn closed_term(src: &str) -> Result<Term, InputError> {
    let t = term(src)?;
    if !t.is_closed() {
        let free: Vec<String> = t.free_vars().iter().map(|v| v.as_str().to_owned()).collect();
        return Err(InputError(format!("`{src}` has free variables: {}", free.join(", "))));
    }
    Ok(t)
}

fn observable_json(o: &Observable) -> serde_json::Value {
    let mut v = json!({ "result": o.class(), "term": o.term().to_string() });
    if let Observable::Timeout { steps_used, .. } = o {
        v["steps"] = json!(steps_used);
    }
    v
}

fn observable_code(o: &Observable) -> u8 {
    match o {
        Observable::Timeout { .. } => UNKNOWN,
        _ => SUCCESS,
    }
}

fn run(cli: &Cli) -> Result<u8, InputError> {
    let out = Out { json: cli.json };
    match &cli.command {
        Command::Parse { term: src } => {
            let t = term(src)?;
            let free: Vec<String> = t.free_vars().iter().map(|v| v.as_str().to_owned()).collect();
            out.emit(json!({ "term": t.to_string(), "closed": free.is_empty(), "free": free }), || {
                t.to_string()
            });
            Ok(SUCCESS)
        }
        Command::Reduce { term: src, trace } => {
            let t = closed_term(src)?;
            let tr = reduction::trace(&t, cli.fuel.unwrap_or(10_000))?;
            let code = observable_code(&tr.outcome);
            if *trace {
                out.emit(tr.to_json(), || {
                    let mut lines = vec![format!("   {t}")];
                    for (i, s) in tr.steps.iter().enumerate() {
                        lines.push(format!("{:>2}. {} [{}]", i + 1, s.term, s.rule));
                    }
                    lines.push(format!("{} after {} steps", tr.outcome.class(), tr.steps.len()));
                    lines.join("\n")
                });
            } else {
                let mut v = observable_json(&tr.outcome);
                v["steps"] = json!(tr.steps.len());
                out.emit(v, || format!("{}: {}", tr.outcome.class(), tr.outcome.term()));
            }
            Ok(code)
        }
        Command::Eval { term: src } => {
            let t = closed_term(src)?;
            let o = lts::observables(&t, cli.fuel.unwrap_or(10_000))?;
            out.emit(observable_json(&o), || format!("{}: {}", o.class(), o.term()));
            Ok(observable_code(&o))
        }
        Command::Lts { term: src, value, context } => {
            let t = closed_term(src)?;
            let tau = lts::derive(&t, &Label::Tau)?;
            let accepts = if t.is_value() {
                "value"
            } else if tau.is_none() {
                "context"
            } else {
                "none"
            };
            let mut v = json!({
                "term": t.to_string(),
                "tau": tau.as_ref().map(|d| d.target().to_string()),
                "derivation": tau.as_ref().map(|d| d.rules().iter().map(|r| r.name()).collect::<Vec<_>>()),
                "accepts": accepts,
            });
            let mut lines = vec![match &tau {
                Some(d) => {
                    let rules: Vec<&str> = d.rules().iter().map(|r| r.name()).collect();
                    format!("tau -> {}   [{}]", d.target(), rules.join(", "))
                }
                None => "tau: none".to_owned(),
            }];
            lines.push(match accepts {
                "none" => "accepts: no probes".to_owned(),
                kind => format!("accepts: {kind} probes"),
            });
            if let Some(src) = value {
                let p = closed_term(src)?;
                let r = lts::probe_value(&t, &p)?;
                v["value_probe"] = json!(r.as_ref().map(Term::to_string));
                lines.push(match r {
                    Some(r) => format!("value {p} -> {r}"),
                    None => format!("value {p}: none"),
                });
            }
            if let Some(src) = context {
                let e = PureContext::parse_with(src, &Abbreviations::standard())?;
                let r = lts::probe_context(&t, &e)?;
                v["context_probe"] = json!(r.as_ref().map(Term::to_string));
                lines.push(match r {
                    Some(r) => format!("context {e} -> {r}"),
                    None => format!("context {e}: none"),
                });
            }
            out.emit(v, || lines.join("\n"));
            Ok(SUCCESS)
        }
        Command::Bisim { t0, t1, depth, pool } => {
            let (a, b) = (closed_term(t0)?, closed_term(t1)?);
            let fuel = cli.fuel.unwrap_or(500);
            let pool = match pool {
                Some(path) => {
                    let text = fs::read_to_string(path).map_err(|e| InputError(format!("{path}: {e}")))?;
                    ProbePool::from_json(&text, &Abbreviations::standard(), *depth, fuel)?
                }
                None => ProbePool { depth: *depth, fuel, ..bisim::default_pool() },
            };
            let verdict = bisim::check(&a, &b, &pool)?;
            out.emit(verdict.to_json(), || match &verdict {
                Verdict::BisimilarUpTo { depth, pool_fingerprint } => {
                    format!("bisimilar up to depth {depth} (pool {pool_fingerprint})")
                }
                Verdict::Distinguished { trace, reason } => {
                    let mut lines = vec![format!("distinguished: {reason}")];
                    for (i, l) in trace.iter().enumerate() {
                        lines.push(format!("{:>2}. {l}", i + 1));
                    }
                    lines.join("\n")
                }
            });
            Ok(if verdict.is_distinguished() { NEGATIVE } else { SUCCESS })
        }
        Command::Cps { term: src } => {
            let t = term(src)?;
            let c = cps_translate(&t);
            out.emit(json!({ "term": t.to_string(), "translation": c.to_string() }), || c.to_string());
            Ok(SUCCESS)
        }
        Command::CpsEquiv { t0, t1 } => {
            let (a, b) = (term(t0)?, term(t1)?);
            let v = cps_equiv(&a, &b, cli.fuel.unwrap_or(5000));
            out.emit(v.to_json(), || match &v {
                EquivVerdict::Equivalent(nf) => format!("equivalent\nnormal form: {nf}"),
                EquivVerdict::NotEquivalent(x, y) => {
                    format!("not equivalent\nleft normal form:  {x}\nright normal form: {y}")
                }
                EquivVerdict::Unknown { left_timed_out, right_timed_out } => {
                    let side = match (left_timed_out, right_timed_out) {
                        (true, true) => "neither side would",
                        (true, false) => "the left side did not",
                        _ => "the right side did not",
                    };
                    format!("unknown: {side} normalize within the fuel")
                }
            });
            Ok(match v {
                EquivVerdict::Equivalent(_) => SUCCESS,
                EquivVerdict::NotEquivalent(..) => NEGATIVE,
                EquivVerdict::Unknown { .. } => UNKNOWN,
            })
        }
        Command::Prove { t0, t1, budget } => {
            let (a, b) = (term(t0)?, term(t1)?);
            match prove_equal(&a, &b, *budget) {
                Some(tr) => {
                    out.emit(tr.to_json(), || {
                        if tr.steps.is_empty() {
                            "identical terms".to_owned()
                        } else {
                            tr.lines().join("\n")
                        }
                    });
                    Ok(SUCCESS)
                }
                None => {
                    out.emit(json!({ "result": "unknown", "budget": budget }), || "unknown".to_owned());
                    Ok(UNKNOWN)
                }
            }
        }
        Command::Fuzz { n, check, max_size, cps_fuel } => {
            let cfg = GenConfig { seed: cli.seed, max_size: *max_size, ..GenConfig::default() };
            cfg.validate()?;
            let fuel = cli.fuel.unwrap_or(200);
            let mut report = FuzzReport::default();
            if matches!(check, Check::Lts | Check::All) {
                report = report.merge(testgen::diff_lts_reduction(*n, &cfg, fuel));
            }
            if matches!(check, Check::Stuck | Check::All) {
                report = report.merge(testgen::diff_stuck_law(*n, &cfg, fuel));
            }
            if matches!(check, Check::CpsSound | Check::All) {
                report = report.merge(testgen::diff_cps_sound(*n, &cfg, *cps_fuel));
            }
            out.emit(serde_json::to_value(&report).expect("serializable"), || {
                let mut lines = vec![format!("checked: {}", report.checked)];
                lines.push(format!("failures: {}", report.failures.len()));
                for f in &report.failures {
                    lines.push(format!("  [{}] {}: {}", f.check, f.term, f.detail));
                }
                if matches!(check, Check::CpsSound | Check::All) {
                    lines.push(format!("undecided (cps): {}", report.unknown));
                }
                let cov: Vec<String> = report.rule_coverage.iter().map(|(k, v)| format!("{k}={v}")).collect();
                lines.push(format!("coverage: {}", cov.join(" ")));
                lines.join("\n")
            });
            Ok(if report.failures.is_empty() { SUCCESS } else { NEGATIVE })
        }
    }
}
