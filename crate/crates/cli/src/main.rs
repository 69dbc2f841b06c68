//! `hdcp`: mean change point detection for high-dimensional, temporally
//! dependent data.
//!
//! Exit codes: 0 ran to completion, 1 usage or configuration error, 2 data
//! error, 3 numerical failure.

mod detect;
mod failure;
mod generate;
mod input;
mod report;
mod simulate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::failure::Failure;

/// Worker-count override for all parallel work.
const THREADS_ENV: &str = "HDCP_THREADS";

#[derive(Parser, Debug)]
#[command(name = "hdcp", version, about = "Change point detection in high-dimensional dependent time series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Test for and locate mean changes in a data matrix.
    Detect(DetectArgs),
    /// Run a Monte Carlo experiment described by a config file.
    Simulate(SimulateArgs),
    /// Write one synthetic data set from the linear process generator.
    Generate(GenerateArgs),
}

#[derive(Args, Debug)]
pub struct DetectArgs {
    /// Delimited text, one row per time point.
    #[arg(long)]
    pub input: PathBuf,
    /// Dependence order: a non-negative integer or `auto` (elbow method).
    #[arg(long, default_value = "auto")]
    pub m: String,
    /// Level of the global test.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Per-segment level 1/(n log n) during segmentation.
    #[arg(long)]
    pub fwer: bool,
    /// Shortest segment that is still tested.
    #[arg(long)]
    pub min_seg: Option<usize>,
    /// Elbow threshold relative to the lag-0 energy.
    #[arg(long, default_value_t = hdcp::dependence::DEFAULT_DROP_RATIO)]
    pub drop_ratio: f64,
    /// Largest lag probed by the elbow method.
    #[arg(long)]
    pub h_max: Option<usize>,
    /// Recorded in the report; detection itself is deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Report path; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Prefix for plot-data files (`<prefix>_statistic.csv`, `<prefix>_elbow.csv`).
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Field delimiter: `comma`, `tab`, `semicolon` or a single character.
    #[arg(long)]
    pub delimiter: Option<String>,
    /// Index separation used by the trace-product estimator.
    #[arg(long, value_enum, default_value_t = SeparationArg::Group)]
    pub separation: SeparationArg,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
pub enum SeparationArg {
    Group,
    Base,
}

impl From<SeparationArg> for hdcp::engine::SeparationRule {
    fn from(arg: SeparationArg) -> Self {
        match arg {
            SeparationArg::Group => Self::ObservationGroup,
            SeparationArg::Base => Self::BaseIndex,
        }
    }
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Experiment description (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Results path; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Write a flat CSV of the plotted quantities to this path.
    #[arg(long)]
    pub plot_data: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: usize,
    /// Dependence order of the generator.
    #[arg(long, default_value_t = 0)]
    pub m: usize,
    /// Comma-separated change points.
    #[arg(long, value_delimiter = ',')]
    pub change_points: Vec<usize>,
    /// Comma-separated regime magnitudes, one more than the change points.
    #[arg(long, value_delimiter = ',')]
    pub deltas: Vec<f64>,
    /// Student-t innovations with this many degrees of freedom.
    #[arg(long)]
    pub student_t: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub output: PathBuf,
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&k| k > 0)
        .ok_or_else(|| Failure::Usage(format!("{THREADS_ENV} must be a positive integer, got '{raw}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Usage(format!("cannot configure worker pool: {e}")))
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    match cli.command {
        Command::Detect(args) => detect::run(&args),
        Command::Simulate(args) => simulate::run(&args),
        Command::Generate(args) => generate::run(&args),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(failure.code())
        }
    }
}
