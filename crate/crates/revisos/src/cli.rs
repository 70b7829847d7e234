//! Command-line driver: check, run, invert, the RPP bridge, and proof
//! extraction/validation/simulation.
//!
//! Exit codes: 0 success, 1 check or validation failure, 2 fuel exhaustion,
//! 3 I/O or parse errors.

use crate::ast::{IsoType, Term};
use crate::eval::{eval, EvalConfig, Outcome, System};
use crate::invert::invert;
use crate::parser::{self, parse, parse_term_with_defs, SourceFile};
use crate::proofs::cutelim::simulate_at;
use crate::proofs::json::derivation_to_json;
use crate::proofs::translate::{circ_floored, Translator};
use crate::proofs::validity::{RecHint, Validity};
use crate::proofs::AddrGen;
use crate::rpp::{self, Compiler, RppFun};
use crate::typecheck::{check_file, type_closed_term, CheckedDef, Recursion};
use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_FUEL: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Parser)]
#[command(
    name = "revisos",
    about = "A linear, reversible language with inductive types",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum SystemArg {
    Main,
    Explicit,
}

#[derive(Subcommand)]
pub enum Command {
    /// Type-check every definition in a file.
    Check {
        file: PathBuf,
        /// Emit machine-readable JSON diagnostics.
        #[arg(long)]
        json: bool,
    },
    /// Evaluate an expression against a file's definitions.
    Run {
        file: PathBuf,
        /// The term to evaluate (defaults to the file's `main`).
        #[arg(short, long)]
        expr: Option<String>,
        /// Step budget.
        #[arg(long, default_value_t = 100_000)]
        fuel: u64,
        /// Which rewrite system to use.
        #[arg(long, value_enum, default_value = "main")]
        system: SystemArg,
        /// Print a JSON-lines trace of every step to stderr.
        #[arg(long)]
        trace: bool,
    },
    /// Print the syntactic inverse of every definition.
    Invert { file: PathBuf },
    /// Recursive Primitive Permutations: the oracle and the compiler.
    Rpp {
        #[command(subcommand)]
        action: RppAction,
    },
    /// Circular-proof extraction, validity, and cut-elimination simulation.
    Proof {
        #[command(subcommand)]
        action: ProofAction,
    },
}

#[derive(Subcommand)]
pub enum RppAction {
    /// Evaluate an RPP program on integer arguments.
    Eval { prog: String, args: Vec<String> },
    /// Compile an RPP program to iso source.
    Compile {
        prog: String,
        /// Definition name for the emitted source.
        #[arg(long, default_value = "compiled")]
        name: String,
    },
    /// Run random inputs through the oracle and the compiled iso and diff.
    Test {
        prog: String,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 500_000)]
        fuel: u64,
    },
}

#[derive(Subcommand)]
pub enum ProofAction {
    /// Translate a definition into a circular derivation and emit JSON.
    Extract {
        file: PathBuf,
        /// Definition to extract (defaults to the last one).
        #[arg(long)]
        def: Option<String>,
        /// Output path (stdout when omitted).
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Emit the pre-floor derivation (with exchange rules).
        #[arg(long)]
        raw: bool,
    },
    /// Check the validity criterion for every definition.
    Validate {
        file: PathBuf,
        #[arg(long)]
        def: Option<String>,
    },
    /// Run evaluation and cut elimination in lockstep on an expression.
    Simulate {
        file: PathBuf,
        #[arg(short, long)]
        expr: String,
        #[arg(long, default_value_t = 10_000)]
        steps: u64,
    },
}

pub fn main_with(cli: Cli) -> i32 {
    match cli.command {
        Command::Check { file, json } => cmd_check(&file, json),
        Command::Run {
            file,
            expr,
            fuel,
            system,
            trace,
        } => cmd_run(&file, expr.as_deref(), fuel, system, trace),
        Command::Invert { file } => cmd_invert(&file),
        Command::Rpp { action } => match action {
            RppAction::Eval { prog, args } => cmd_rpp_eval(&prog, &args),
            RppAction::Compile { prog, name } => cmd_rpp_compile(&prog, &name),
            RppAction::Test {
                prog,
                trials,
                seed,
                fuel,
            } => cmd_rpp_test(&prog, trials, seed, fuel),
        },
        Command::Proof { action } => match action {
            ProofAction::Extract {
                file,
                def,
                out,
                raw,
            } => cmd_proof_extract(&file, def.as_deref(), out.as_deref(), raw),
            ProofAction::Validate { file, def } => cmd_proof_validate(&file, def.as_deref()),
            ProofAction::Simulate { file, expr, steps } => cmd_proof_simulate(&file, &expr, steps),
        },
    }
}

fn load(path: &std::path::Path) -> Result<SourceFile, (String, i32)> {
    let text =
        std::fs::read_to_string(path).map_err(|e| (format!("{}: {e}", path.display()), EXIT_IO))?;
    parse(&text).map_err(|e| (format!("{}:{e}", path.display()), EXIT_IO))
}

fn load_checked(path: &std::path::Path) -> Result<(SourceFile, Vec<CheckedDef>), (String, i32)> {
    let file = load(path)?;
    let defs = check_file(&file).map_err(|(name, pos, e)| {
        (
            format!("{}:{pos}: error: in `{name}`: {e}", path.display()),
            EXIT_CHECK_FAILED,
        )
    })?;
    if let Some(main) = &file.main {
        type_closed_term(main).map_err(|e| {
            (
                format!("{}: main: error: {e}", path.display()),
                EXIT_CHECK_FAILED,
            )
        })?;
    }
    Ok((file, defs))
}

fn recursion_summary(rec: &Option<Recursion>) -> String {
    match rec {
        None | Some(Recursion::NotRecursive) => "non-recursive".into(),
        Some(Recursion::Recursive(info)) => {
            format!("structurally recursive, decreasing argument {}", info.index)
        }
    }
}

fn cmd_check(path: &std::path::Path, json: bool) -> i32 {
    let file = match load(path) {
        Ok(f) => f,
        Err((msg, code)) => {
            if json {
                let obj = serde_json::json!({ "file": path.display().to_string(), "error": msg });
                println!("{obj}");
            } else {
                eprintln!("{msg}");
            }
            return code;
        }
    };
    let main_error = file.main.as_ref().and_then(|m| type_closed_term(m).err());
    match check_file(&file) {
        Ok(_) if main_error.is_some() => {
            let e = main_error.unwrap();
            if json {
                let obj = serde_json::json!({
                    "file": path.display().to_string(),
                    "def": "main",
                    "error": e.to_string(),
                });
                println!("{obj}");
            } else {
                eprintln!("{}: main: error: {e}", path.display());
            }
            EXIT_CHECK_FAILED
        }
        Ok(defs) => {
            if json {
                let items: Vec<serde_json::Value> = defs
                    .iter()
                    .map(|d| {
                        serde_json::json!({
                            "name": d.name,
                            "type": d.ty.to_string(),
                            "od": "ok",
                            "recursion": recursion_summary(&d.recursion),
                        })
                    })
                    .collect();
                let obj = serde_json::json!({ "file": path.display().to_string(), "defs": items });
                println!("{obj}");
            } else {
                for d in &defs {
                    println!(
                        "{} : {}, OD ok, {}",
                        d.name,
                        d.ty,
                        recursion_summary(&d.recursion)
                    );
                }
            }
            EXIT_OK
        }
        Err((name, pos, e)) => {
            if json {
                let obj = serde_json::json!({
                    "file": path.display().to_string(),
                    "def": name,
                    "line": pos.line,
                    "col": pos.col,
                    "error": e.to_string(),
                });
                println!("{obj}");
            } else {
                eprintln!("{}:{pos}: error: in `{name}`: {e}", path.display());
            }
            EXIT_CHECK_FAILED
        }
    }
}

fn cmd_run(
    path: &std::path::Path,
    expr: Option<&str>,
    fuel: u64,
    system: SystemArg,
    trace: bool,
) -> i32 {
    let (file, _defs) = match load_checked(path) {
        Ok(x) => x,
        Err((msg, code)) => {
            eprintln!("{msg}");
            return code;
        }
    };
    let term = match expr {
        Some(src) => match parse_term_with_defs(src, &file) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("<expr>:{e}");
                return EXIT_IO;
            }
        },
        None => match &file.main {
            Some(t) => t.clone(),
            None => {
                eprintln!("no expression given and the file has no `main`");
                return EXIT_IO;
            }
        },
    };
    if let Err(e) = type_closed_term(&term) {
        eprintln!("error: {e}");
        return EXIT_CHECK_FAILED;
    }
    let cfg = EvalConfig {
        fuel,
        trace,
        system: match system {
            SystemArg::Main => System::Main,
            SystemArg::Explicit => System::Explicit,
        },
    };
    match eval(&term, &cfg) {
        Ok(result) => {
            if let Some(tr) = &result.trace {
                eprint!("{}", tr.to_json_lines());
            }
            match result.outcome {
                Outcome::Value(v) => {
                    println!("{}", parser::pretty_value(&v));
                    EXIT_OK
                }
                Outcome::FuelExhausted(t) => {
                    eprintln!("fuel exhausted after {} steps at: {t}", result.steps);
                    EXIT_FUEL
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CHECK_FAILED
        }
    }
}

fn cmd_invert(path: &std::path::Path) -> i32 {
    let (file, _) = match load_checked(path) {
        Ok(x) => x,
        Err((msg, code)) => {
            eprintln!("{msg}");
            return code;
        }
    };
    for d in &file.defs {
        let inv = invert(&d.iso);
        println!("def {}_inv :: {} =", d.name, d.ty.flip());
        println!("  {}", parser::pretty_iso(&inv));
        println!();
    }
    EXIT_OK
}

fn parse_int_args(args: &[String]) -> Result<Vec<BigInt>, String> {
    args.iter()
        .map(|s| {
            s.parse::<BigInt>()
                .map_err(|e| format!("bad integer `{s}`: {e}"))
        })
        .collect()
}

fn cmd_rpp_eval(prog: &str, args: &[String]) -> i32 {
    let f = match rpp::parse_rpp(prog) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_IO;
        }
    };
    let xs = match parse_int_args(args) {
        Ok(xs) => xs,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_IO;
        }
    };
    match rpp::rpp_eval(&f, &xs) {
        Ok(ys) => {
            let rendered: Vec<String> = ys.iter().map(|y| y.to_string()).collect();
            println!("{}", rendered.join(" "));
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CHECK_FAILED
        }
    }
}

/// Emits the compiled iso as a standalone definition.
pub fn compiled_source(f: &RppFun, name: &str) -> Result<String, rpp::RppError> {
    let iso = Compiler::new().compile(f)?;
    let ty = iso
        .annotation()
        .expect("compiled isos are annotated")
        .clone();
    let body = iso.skeleton().clone();
    Ok(format!(
        "def {name} :: {ty} =\n  {}\n",
        parser::pretty_iso(&body)
    ))
}

fn cmd_rpp_compile(prog: &str, name: &str) -> i32 {
    let f = match rpp::parse_rpp(prog) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_IO;
        }
    };
    match compiled_source(&f, name) {
        Ok(src) => {
            print!("{src}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CHECK_FAILED
        }
    }
}

fn cmd_rpp_test(prog: &str, trials: u64, seed: u64, fuel: u64) -> i32 {
    let f = match rpp::parse_rpp(prog) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_IO;
        }
    };
    let arity = f.arity().expect("parse validates arity");
    let iso = match rpp::compile(&f) {
        Ok(iso) => iso,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CHECK_FAILED;
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0u64;
    for trial in 0..trials {
        let xs: Vec<BigInt> = (0..arity)
            .map(|_| BigInt::from(rng.gen_range(-8i64..=8)))
            .collect();
        let expected = match rpp::rpp_eval(&f, &xs) {
            Ok(v) => v,
            Err(e) => {
                eprintln!("trial {trial}: oracle error: {e}");
                failures += 1;
                continue;
            }
        };
        let t = Term::app(iso.clone(), Term::from_value(&rpp::encode_tuple(&xs)));
        match crate::eval::eval_to_value(&t, fuel) {
            Ok(v) => match rpp::decode_tuple(&v, arity) {
                Ok(got) if got == expected => {}
                Ok(got) => {
                    eprintln!("trial {trial}: iso produced {got:?}, oracle {expected:?}");
                    failures += 1;
                }
                Err(e) => {
                    eprintln!("trial {trial}: bad encoding: {e}");
                    failures += 1;
                }
            },
            Err(e) => {
                eprintln!("trial {trial}: evaluation error: {e}");
                failures += 1;
            }
        }
    }
    if failures == 0 {
        println!("{trials} trials agree");
        EXIT_OK
    } else {
        println!("{failures}/{trials} trials disagree");
        EXIT_CHECK_FAILED
    }
}

fn pick_def<'a>(
    defs: &'a [CheckedDef],
    name: Option<&str>,
) -> Result<&'a CheckedDef, (String, i32)> {
    match name {
        Some(n) => defs
            .iter()
            .find(|d| d.name == n)
            .ok_or_else(|| (format!("no definition named `{n}`"), EXIT_IO)),
        None => defs
            .last()
            .ok_or(("file has no definitions".to_string(), EXIT_IO)),
    }
}

fn cmd_proof_extract(
    path: &std::path::Path,
    def: Option<&str>,
    out: Option<&std::path::Path>,
    raw: bool,
) -> i32 {
    let (_, defs) = match load_checked(path) {
        Ok(x) => x,
        Err((msg, code)) => {
            eprintln!("{msg}");
            return code;
        }
    };
    let d = match pick_def(&defs, def) {
        Ok(d) => d,
        Err((msg, code)) => {
            eprintln!("{msg}");
            return code;
        }
    };
    let mut gen = AddrGen::new();
    let derivation = if raw {
        Translator::new(&mut gen).circ(&d.iso, &d.ty)
    } else {
        circ_floored(&mut gen, &d.iso, &d.ty)
    };
    match derivation {
        Ok(derivation) => {
            let json = derivation_to_json(&derivation);
            match out {
                Some(p) => {
                    if let Err(e) = std::fs::write(p, json + "\n") {
                        eprintln!("{}: {e}", p.display());
                        return EXIT_IO;
                    }
                }
                None => println!("{json}"),
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CHECK_FAILED
        }
    }
}

fn cmd_proof_validate(path: &std::path::Path, def: Option<&str>) -> i32 {
    let (_, defs) = match load_checked(path) {
        Ok(x) => x,
        Err((msg, code)) => {
            eprintln!("{msg}");
            return code;
        }
    };
    let selected: Vec<&CheckedDef> = match def {
        Some(n) => match defs.iter().find(|d| d.name == n) {
            Some(d) => vec![d],
            None => {
                eprintln!("no definition named `{n}`");
                return EXIT_IO;
            }
        },
        None => defs.iter().collect(),
    };
    let mut failed = false;
    for d in selected {
        let mut gen = AddrGen::new();
        let floored = match circ_floored(&mut gen, &d.iso, &d.ty) {
            Ok(x) => x,
            Err(e) => {
                println!("{}: translation error: {e}", d.name);
                failed = true;
                continue;
            }
        };
        let hints = RecHint::collect(&d.iso, &d.ty);
        match crate::proofs::validity::check_validity(&floored, &hints) {
            Validity::Valid(witnesses) if witnesses.is_empty() => {
                println!("{}: valid (finite derivation)", d.name);
            }
            Validity::Valid(witnesses) => {
                for w in &witnesses {
                    println!(
                        "{}: valid; loop `{}` thread weight: {}; recurring formula: {}",
                        d.name,
                        w.label,
                        w.weight_word(),
                        crate::proofs::json::render_form(&w.nu_formula.form),
                    );
                }
            }
            Validity::Invalid(reason) => {
                println!("{}: INVALID: {reason}", d.name);
                failed = true;
            }
        }
    }
    if failed {
        EXIT_CHECK_FAILED
    } else {
        EXIT_OK
    }
}

fn cmd_proof_simulate(path: &std::path::Path, expr: &str, steps: u64) -> i32 {
    let (file, _) = match load_checked(path) {
        Ok(x) => x,
        Err((msg, code)) => {
            eprintln!("{msg}");
            return code;
        }
    };
    let term = match parse_term_with_defs(expr, &file) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("<expr>:{e}");
            return EXIT_IO;
        }
    };
    let ty = match type_closed_term(&term) {
        Ok(ty) => ty,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CHECK_FAILED;
        }
    };
    match simulate_at(&term, &ty, steps) {
        Ok(report) => {
            println!(
                "simulated {} term steps against {} cut-elimination steps ({} checkpoints agreed)",
                report.term_steps, report.proof_steps, report.checkpoints
            );
            if report.value_reached {
                println!("final value: {}", parser::pretty_term(&report.final_term));
                EXIT_OK
            } else {
                eprintln!("step budget exhausted at: {}", report.final_term);
                EXIT_FUEL
            }
        }
        Err(e) => {
            eprintln!("simulation diverged: {e}");
            EXIT_CHECK_FAILED
        }
    }
}

/// Re-exported iso type of a compiled RPP program, for tests.
pub fn compiled_iso_type(arity: usize) -> IsoType {
    IsoType::new(rpp::z_tuple_type(arity), rpp::z_tuple_type(arity))
}
