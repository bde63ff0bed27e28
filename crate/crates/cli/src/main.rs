use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use rayon::prelude::*;
use serde_json::Value;

use scalarfield_cli::commands::{cmd_check, cmd_evolve, cmd_report, cmd_steady};
use scalarfield_cli::config::RunConfig;
use scalarfield_cli::{exit, exit_code, io};

#[derive(Parser)]
#[command(name = "scalarfield", version, about = "Steady states, evolution and virial diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Clone)]
struct RunArgs {
    /// JSON config; may name a built-in `scenario` to start from.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in scenario, used when no config is given.
    #[arg(long, conflicts_with = "config")]
    scenario: Option<String>,
    /// Output directory (default: the config's `output`, else `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// NDJSON file of config overrides, one run per line.
    #[arg(long)]
    sweep: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Admissibility checks; exit 1 if any fails.
    Check(RunArgs),
    /// Construct the steady state.
    Steady(RunArgs),
    /// Evolve a perturbation and record diagnostics.
    Evolve(RunArgs),
    /// Summarize one diagnostics CSV, or compare two.
    Report {
        #[arg(num_args = 1..=2, required = true)]
        paths: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy)]
enum Kind {
    Check,
    Steady,
    Evolve,
}

fn base_config(args: &RunArgs) -> Result<RunConfig> {
    let mut cfg = match (&args.config, &args.scenario) {
        (Some(path), _) => RunConfig::load(path)?,
        (None, Some(id)) => RunConfig::from_value(&serde_json::json!({ "scenario": id }))?,
        (None, None) => bail!("either --config or --scenario is required"),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn run_one(kind: Kind, cfg: &RunConfig, out: &Path) -> Result<i32> {
    let json = match kind {
        Kind::Check => {
            let r = cmd_check(cfg, out)?;
            let code = if r.pass { exit::OK } else { exit::CHECK_FAILED };
            println!("{}", io::to_json(&r)?.trim_end());
            return Ok(code);
        }
        Kind::Steady => io::to_json(&cmd_steady(cfg, out)?)?,
        Kind::Evolve => io::to_json(&cmd_evolve(cfg, out)?)?,
    };
    println!("{}", json.trim_end());
    Ok(exit::OK)
}

fn report_error(err: &anyhow::Error) -> i32 {
    eprintln!("error: {err:#}");
    exit_code(err)
}

fn sweep(kind: Kind, base: &RunConfig, path: &Path, out: &Path) -> Result<i32> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let configs = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(k, line)| {
            let patch: Value = serde_json::from_str(line).with_context(|| format!("sweep line {}", k + 1))?;
            let cfg = base.with_override(&patch).with_context(|| format!("sweep line {}", k + 1))?;
            Ok((out.join(format!("run_{k:03}")), cfg))
        })
        .collect::<Result<Vec<_>>>()?;
    let codes: Vec<i32> = configs
        .par_iter()
        .map(|(dir, cfg)| run_one(kind, cfg, dir).unwrap_or_else(|e| report_error(&e)))
        .collect();
    Ok(codes.into_iter().max().unwrap_or(exit::OK))
}

fn dispatch(kind: Kind, args: &RunArgs) -> Result<i32> {
    let cfg = base_config(args)?;
    let out = args
        .out
        .clone()
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    match &args.sweep {
        Some(path) => sweep(kind, &cfg, path, &out),
        None => run_one(kind, &cfg, &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { exit::USAGE } else { exit::OK };
            return ExitCode::from(code as u8);
        }
    };
    let result = match &cli.command {
        Command::Check(a) => dispatch(Kind::Check, a),
        Command::Steady(a) => dispatch(Kind::Steady, a),
        Command::Evolve(a) => dispatch(Kind::Evolve, a),
        Command::Report { paths, out } => cmd_report(paths, out.as_deref())
            .and_then(|r| io::to_json(&r))
            .map(|s| {
                println!("{}", s.trim_end());
                exit::OK
            }),
    };
    let code = result.unwrap_or_else(|e| report_error(&e));
    ExitCode::from(code as u8)
}
