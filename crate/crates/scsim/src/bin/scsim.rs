//! Scenario-driven command line front end.
//!
//! Exit codes: 0 success, 2 scenario validation error, 3 calibration
//! failure, 1 anything else.

use clap::{Parser, Subcommand};
use scsim::runner::{run_scenario, SHIPPED_SCENARIOS};
use scsim::scenario::{parse_scenario, Scenario};
use scsim::Error;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "scsim", version, about = "Fiber squeezed-light simulation runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a scenario file and write its CSV and summary artifacts.
    Run {
        /// Path to a scenario file, or the name of a shipped scenario.
        file: String,
        /// Override the scenario's RNG seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory for the artifacts.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override the distributed-model segment count.
        #[arg(long)]
        segments: Option<usize>,
    },
    /// Parse and validate a scenario file, reporting every issue.
    Validate {
        /// Path to a scenario file, or the name of a shipped scenario.
        file: String,
    },
    /// List the scenarios shipped with the tool.
    ListScenarios,
}

const EXIT_VALIDATION: u8 = 2;
const EXIT_CALIBRATION: u8 = 3;

fn load_text(file: &str) -> Result<String, String> {
    let path = Path::new(file);
    if path.exists() {
        return std::fs::read_to_string(path).map_err(|e| format!("cannot read {file}: {e}"));
    }
    let stem = file.trim_end_matches(".scenario");
    if let Some((_, text)) = SHIPPED_SCENARIOS.iter().find(|(name, _)| *name == stem) {
        return Ok(text.to_string());
    }
    Err(format!(
        "{file}: no such file and no shipped scenario of that name (see `scsim list-scenarios`)"
    ))
}

fn load_scenario(file: &str) -> Result<Scenario, ExitCode> {
    let text = load_text(file).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(EXIT_VALIDATION)
    })?;
    parse_scenario(&text).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(EXIT_VALIDATION)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            file,
            seed,
            out,
            segments,
        } => {
            let mut scenario = match load_scenario(&file) {
                Ok(sc) => sc,
                Err(code) => return code,
            };
            if let Some(seed) = seed {
                scenario.run.rng_seed = seed;
            }
            if let Some(segments) = segments {
                if segments == 0 {
                    eprintln!("error: --segments must be at least 1");
                    return ExitCode::from(EXIT_VALIDATION);
                }
                scenario.fopa.segments = segments;
            }
            match run_scenario(&scenario, &out) {
                Ok(artifacts) => {
                    print!("{}", artifacts.summary);
                    println!("csv = {}", artifacts.csv_path.display());
                    println!("summary = {}", artifacts.summary_path.display());
                    ExitCode::SUCCESS
                }
                Err(e @ Error::Calibration { .. }) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_CALIBRATION)
                }
                Err(e @ Error::InvalidArgument(_)) | Err(e @ Error::Aliasing(_)) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_VALIDATION)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
        Command::Validate { file } => match load_scenario(&file) {
            Ok(sc) => {
                println!(
                    "valid: directive = {}, output stem = {}",
                    sc.run.directive.name(),
                    sc.run.output
                );
                ExitCode::SUCCESS
            }
            Err(code) => code,
        },
        Command::ListScenarios => {
            for (name, text) in SHIPPED_SCENARIOS {
                let description = text
                    .lines()
                    .take_while(|l| l.starts_with('#'))
                    .map(|l| l.trim_start_matches('#').trim())
                    .collect::<Vec<_>>()
                    .join(" ");
                println!("{name}: {description}");
            }
            ExitCode::SUCCESS
        }
    }
}
