//! `clairaut`: run geometry and Clairaut checks on registry or file scenarios.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use clairaut_core::report::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "clairaut", version, about = "Checks for Clairaut conformal submersions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Options,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the built-in scenarios
    Scenarios,
    /// Conformality, umbilicity, Clairaut criterion and invariant, tension
    Check(Target),
    /// Integrate one geodesic and write its trace and invariant CSV
    Geodesic(GeodesicArgs),
    /// Vertical scalar curvature and Ricci identities
    Curvature(Target),
    /// Every check, including the structural identities
    Report(Target),
}

#[derive(Args, Debug)]
struct Target {
    /// Registry name or path to a scenario file
    #[arg(value_name = "SCENARIO")]
    name: Option<String>,
}

#[derive(Args, Debug)]
struct GeodesicArgs {
    #[command(flatten)]
    target: Target,
    /// Initial point, comma separated (random when omitted)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    point: Option<Vec<f64>>,
    /// Initial velocity, comma separated (random unit vector when omitted)
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    velocity: Option<Vec<f64>>,
}

#[derive(Args, Debug)]
struct Options {
    /// Registry scenario name
    #[arg(long, global = true)]
    scenario: Option<String>,
    /// Scenario file
    #[arg(long, global = true, conflicts_with = "scenario")]
    file: Option<PathBuf>,
    /// Number of sampled points
    #[arg(long, global = true, default_value_t = 20)]
    points: usize,
    /// Number of sampled geodesics
    #[arg(long, global = true, default_value_t = 10)]
    geodesics: usize,
    /// Integration step
    #[arg(long, global = true, default_value_t = 1e-3)]
    step: f64,
    /// Integration end time
    #[arg(long = "t-end", global = true, default_value_t = 1.0)]
    t_end: f64,
    /// Seed of the run's generator
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Write the output here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

impl Options {
    fn config(&self) -> RunConfig {
        RunConfig {
            points: self.points,
            geodesics: self.geodesics,
            step: self.step,
            t_end: self.t_end,
            seed: self.seed,
        }
    }
}

/// Exit status of a completed command.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
enum Outcome {
    Met,
    Mismatch,
}

const EXIT_MISMATCH: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(Outcome::Met) => ExitCode::SUCCESS,
        Ok(Outcome::Mismatch) => ExitCode::from(EXIT_MISMATCH),
        Err(err) => {
            eprintln!("error: {err:#}");
            let numeric = err
                .chain()
                .find_map(|e| e.downcast_ref::<clairaut_core::Error>())
                .is_some_and(|e| e.is_numeric());
            ExitCode::from(if numeric { EXIT_NUMERIC } else { EXIT_INPUT })
        }
    }
}
