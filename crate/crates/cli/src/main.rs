use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pir_core::semantics::{explore, run, state_hash, ExploreBounds, HaltReason};
use pir_core::typeck::{check_config_with, parse_derivation, validate, CheckError, InferOptions};
use pir_core::{parse, SourceFile};
use serde_json::json;

const OK: u8 = 0;
const REJECTED: u8 = 1;
const INCONCLUSIVE: u8 = 2;
const USAGE: u8 = 3;

#[derive(Parser)]
#[command(name = "pir", version, about = "Run, explore and typecheck pi-calculus programs with explicit channel allocation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum TraceFormat {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Typecheck the configuration under its `assume` header.
    Check {
        file: PathBuf,
        /// Write the derivation to this file (`-` for stdout).
        #[arg(long, value_name = "OUT")]
        derivation: Option<PathBuf>,
        /// Largest unique index the search may introduce.
        #[arg(long, value_name = "N")]
        max_index: Option<u32>,
    },
    /// Execute with a seeded random scheduler.
    Run {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        steps: usize,
        #[arg(long, value_enum, default_value = "text")]
        trace: TraceFormat,
        /// Same as `--trace json`.
        #[arg(long)]
        json_trace: bool,
    },
    /// Enumerate reachable states within bounds and report error traces.
    Explore {
        file: PathBuf,
        #[arg(long, default_value_t = 20)]
        depth: usize,
        #[arg(long, default_value_t = 2)]
        unfold: u32,
        #[arg(long, default_value_t = 100_000)]
        max_states: usize,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Check a derivation written by `check --derivation`.
    Validate { file: PathBuf },
    /// Print the file in normal layout.
    Fmt { file: PathBuf },
}

struct Failure(u8, String);

type Outcome = Result<(u8, String), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure(USAGE, format!("error: {}: {e}", path.display())))
}

fn load(path: &Path) -> Result<SourceFile, Failure> {
    let text = read(path)?;
    parse(&text).map_err(|e| Failure(USAGE, format!("error: {}:{e}", path.display())))
}

fn check(file: &Path, derivation: Option<&Path>, max_index: Option<u32>) -> Outcome {
    let src = load(file)?;
    let opts = InferOptions {
        max_index,
        ..InferOptions::default()
    };
    match check_config_with(&src.env(), &src.configuration(), opts) {
        Ok(d) => {
            let n = d.size();
            let noun = if n == 1 { "node" } else { "nodes" };
            let mut out = format!("ACCEPTED\nderivation: {n} {noun}, height {}\n", d.height());
            match derivation {
                Some(p) if p == Path::new("-") => out.push_str(&d.to_text()),
                Some(p) => std::fs::write(p, d.to_text())
                    .map_err(|e| Failure(USAGE, format!("error: {}: {e}", p.display())))?,
                None => {}
            }
            Ok((OK, out))
        }
        Err(CheckError::Inconclusive(why)) => Ok((INCONCLUSIVE, format!("INCONCLUSIVE\n{why}\n"))),
        Err(CheckError::Config(e)) => Err(Failure(USAGE, format!("error: {}: {e}", file.display()))),
        Err(CheckError::NotTypable(f)) => Ok((
            REJECTED,
            format!("REJECTED\nrule: {}\nat: {} |- {}\nreason: {}\n", f.rule, f.env, f.process, f.reason),
        )),
        Err(e) => Ok((REJECTED, format!("REJECTED\nreason: {e}\n"))),
    }
}

fn run_cmd(file: &Path, seed: u64, steps: usize, json_out: bool) -> Outcome {
    let src = load(file)?;
    let r = run(&src.configuration(), seed, steps)
        .map_err(|e| Failure(USAGE, format!("error: {}: {e}", file.display())))?;
    let mut out = String::new();
    for (i, (label, c)) in r.trace.iter().enumerate() {
        if json_out {
            let rec = json!({
                "step": i + 1,
                "rule": label.rule.as_str(),
                "subject": label.subject,
                "fresh": label.fresh,
                "state": format!("{:016x}", state_hash(c)),
            });
            writeln!(out, "{rec}").expect("string write");
        } else {
            writeln!(out, "step{}  {label}", i + 1).expect("string write");
        }
    }
    if json_out {
        writeln!(out, "{}", json!({ "halt": r.halt.to_string() })).expect("string write");
    } else {
        writeln!(out, "HALT {}", r.halt).expect("string write");
    }
    let code = if matches!(r.halt, HaltReason::Error(_)) { REJECTED } else { OK };
    Ok((code, out))
}

fn explore_cmd(file: &Path, bounds: ExploreBounds, json_out: bool) -> Outcome {
    let src = load(file)?;
    let c = src.configuration();
    let r = explore(&c, bounds).map_err(|e| Failure(USAGE, format!("error: {}: {e}", file.display())))?;
    let code = if !r.errors.is_empty() {
        REJECTED
    } else if r.truncated {
        INCONCLUSIVE
    } else {
        OK
    };
    if json_out {
        let text = serde_json::to_string_pretty(&r).expect("report serialises");
        return Ok((code, text + "\n"));
    }
    let mut out = String::new();
    writeln!(out, "states      {}", r.states).expect("string write");
    writeln!(out, "terminated  {}", r.terminated).expect("string write");
    writeln!(out, "stuck       {}", r.stuck).expect("string write");
    writeln!(out, "errors      {}", r.errors.len()).expect("string write");
    writeln!(out, "truncated   {}", if r.truncated { "yes" } else { "no" }).expect("string write");
    for (i, e) in r.errors.iter().enumerate() {
        let ws: Vec<String> = e.witnesses.iter().map(ToString::to_string).collect();
        writeln!(out, "error {}: {}", i + 1, ws.join(" ")).expect("string write");
        for (j, l) in e.steps.iter().enumerate() {
            writeln!(out, "  step{}  {l}", j + 1).expect("string write");
        }
    }
    if !r.errors.is_empty() {
        // A scheduler seed that runs into an error, when a small one exists.
        let seed = (0..256u64).find(|&s| {
            run(&c, s, bounds.max_depth)
                .map(|t| matches!(t.halt, HaltReason::Error(_)))
                .unwrap_or(false)
        });
        if let Some(s) = seed {
            writeln!(out, "reproduce: pir run {} --seed {s} --steps {}", file.display(), bounds.max_depth)
                .expect("string write");
        }
    }
    Ok((code, out))
}

fn validate_cmd(file: &Path) -> Outcome {
    let text = read(file)?;
    let d = parse_derivation(&text).map_err(|e| Failure(USAGE, format!("error: {}: {e}", file.display())))?;
    match validate(&d) {
        Ok(()) => Ok((OK, format!("VALID ({} {})\n", d.size(), if d.size() == 1 { "node" } else { "nodes" }))),
        Err(e) => Ok((REJECTED, format!("INVALID {e}\n"))),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { USAGE } else { OK };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.command {
        Command::Check {
            file,
            derivation,
            max_index,
        } => check(file, derivation.as_deref(), *max_index),
        Command::Run {
            file,
            seed,
            steps,
            trace,
            json_trace,
        } => run_cmd(file, *seed, *steps, *json_trace || matches!(trace, TraceFormat::Json)),
        Command::Explore {
            file,
            depth,
            unfold,
            max_states,
            json,
        } => explore_cmd(
            file,
            ExploreBounds {
                max_depth: *depth,
                max_unfoldings: *unfold,
                max_states: *max_states,
                ..ExploreBounds::default()
            },
            *json,
        ),
        Command::Validate { file } => validate_cmd(file),
        Command::Fmt { file } => load(file).map(|f| (OK, f.to_string())),
    };
    match outcome {
        Ok((code, out)) => {
            print!("{out}");
            ExitCode::from(code)
        }
        Err(Failure(code, msg)) => {
            eprintln!("{msg}");
            ExitCode::from(code)
        }
    }
}
