use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use qtool_core::scenario::{
    fixture_catalogue, parse_scenario_with_seed, render_csv, render_json, run_scenario, Scenario,
};

/// Run quantum-state scenarios described in JSON.
#[derive(Debug, Parser)]
#[command(name = "qtool", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run every task of a scenario and write the report.
    Run {
        file: PathBuf,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Seed for random outcomes; replaces the scenario's own seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Include wall_time_ms in the report (output is then not reproducible).
        #[arg(long)]
        timing: bool,
    },
    /// Parse and validate a scenario without running it.
    Validate { file: PathBuf },
    /// List the named states, families and observables.
    Fixtures,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

fn load(path: &Path, seed: Option<u64>) -> Result<Scenario, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse_scenario_with_seed(&text, seed).map_err(|e| format!("{}: {e}", path.display()))
}

fn run(
    file: &Path,
    out: Option<&Path>,
    format: Format,
    seed: Option<u64>,
    timing: bool,
) -> Result<bool, String> {
    let started = Instant::now();
    let scenario = load(file, seed)?;
    let mut report = run_scenario(&scenario);
    if timing {
        report.wall_time_ms = Some(started.elapsed().as_millis() as u64);
    }
    let text = match format {
        Format::Json => render_json(&report),
        Format::Csv => render_csv(&report),
    };
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| format!("cannot write {}: {e}", path.display()))?,
        None => print!("{text}"),
    }
    for t in report.failed() {
        eprintln!(
            "task {} ({}) failed: {}",
            t.index,
            t.kind,
            t.error.as_deref().unwrap_or("unknown error")
        );
    }
    Ok(report.all_ok())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run {
            file,
            out,
            format,
            seed,
            timing,
        } => run(file, out.as_deref(), *format, *seed, *timing),
        Command::Validate { file } => load(file, None).map(|s| {
            println!("ok: {} ({} tasks)", s.name, s.tasks.len());
            true
        }),
        Command::Fixtures => {
            for (category, names, description) in fixture_catalogue() {
                println!("{category:<11} {names:<46} {description}");
            }
            Ok(true)
        }
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}
