//! `lpcalc` command-line front end.

mod commands;
mod config;
mod error;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::ConfigFile;
use crate::error::{CliError, EXIT_CHECK_FAILED, EXIT_PASS, EXIT_USAGE};
use crate::report::Builder;

#[derive(Debug, Parser)]
#[command(
    name = "lpcalc",
    version,
    about = "Littlewood-Paley norms, bilinear symbols and embedding checks on periodic grids"
)]
pub struct Cli {
    /// JSON object whose keys mirror the long flags; flags win.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,
    /// Write the plot series of the run as CSV.
    #[arg(long, global = true, value_name = "PATH")]
    pub csv: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Norm of one function in a Besov, Triebel-Lizorkin, bmo, BMO or X_w space.
    Norm(NormArgs),
    /// Partition identity, telescoping, supports and derivative decay.
    PartitionCheck(PartitionArgs),
    /// Admissibility, comparison constants and regularization of a weight.
    WeightCheck(WeightArgs),
    /// Paraproduct split and elementary-series decomposition of a symbol.
    Decompose(DecomposeArgs),
    /// Ensemble ratios for the logarithmic embeddings and space identifications.
    EmbedCheck(EmbedArgs),
    /// Ensemble ratios for the product estimate.
    ProductCheck(ProductArgs),
    /// F_{inf,q} norms under two resolutions of unity.
    ResolutionCheck(ResolutionArgs),
    /// Growth of the squared critical profile in the weighted space.
    Sharpness(SharpnessArgs),
    /// Lifting ratios ||f||_{F^{s,w}} / ||w(D) f||_{F^s}.
    LiftCheck(LiftArgs),
    /// Picard iteration for the dispersive initial value problem.
    Pde(PdeArgs),
    /// Stationary logarithmic Schrodinger problem v(D) u = T_sigma(f, g).
    Logschrodinger(LogSchrodingerArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Norm(_) => "norm",
            Command::PartitionCheck(_) => "partition-check",
            Command::WeightCheck(_) => "weight-check",
            Command::Decompose(_) => "decompose",
            Command::EmbedCheck(_) => "embed-check",
            Command::ProductCheck(_) => "product-check",
            Command::ResolutionCheck(_) => "resolution-check",
            Command::Sharpness(_) => "sharpness",
            Command::LiftCheck(_) => "lift-check",
            Command::Pde(_) => "pde",
            Command::Logschrodinger(_) => "logschrodinger",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Profile {
    Mollifier,
    Smoothstep7,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Dimension n (1 or 2).
    #[arg(long)]
    pub dim: Option<usize>,
    /// Samples per axis N (a power of two).
    #[arg(long)]
    pub points: Option<usize>,
    /// Period L.
    #[arg(long)]
    pub length: Option<f64>,
    /// Resolution level J_max.
    #[arg(long)]
    pub jmax: Option<u32>,
    #[arg(long, value_enum)]
    pub profile: Option<Profile>,
}

#[derive(Debug, Args)]
pub struct EnsembleArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Members per bandwidth level.
    #[arg(long)]
    pub count: Option<usize>,
    /// Bandwidth levels, as 4..8 or 4,5,6.
    #[arg(long)]
    pub levels: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Space {
    Besov,
    Tl,
    Bmo,
    BigBmo,
    Xw,
}

#[derive(Debug, Args)]
pub struct NormArgs {
    /// LPGF input; a seeded random member is used when absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub space: Option<Space>,
    #[arg(long, allow_hyphen_values = true)]
    pub s: Option<f64>,
    /// Integrability, a number or inf.
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub q: Option<String>,
    /// Weight (1 + log_+ 1/t)^lambda (1 + ln(1 + log_+ 1/t))^mu.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Bandwidth level of the generated member.
    #[arg(long)]
    pub level: Option<u32>,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args)]
pub struct PartitionArgs {
    #[arg(long)]
    pub jmax: Option<u32>,
    #[arg(long, value_enum)]
    pub profile: Option<Profile>,
    /// Period L fixing the lattice step 2 pi / L.
    #[arg(long)]
    pub length: Option<f64>,
}

#[derive(Debug, Args)]
pub struct WeightArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    /// Tabulated w(2^-j), j = 0, 1, ..., comma separated.
    #[arg(long)]
    pub table: Option<String>,
    /// Dyadic levels scanned.
    #[arg(long)]
    pub levels: Option<u32>,
    #[arg(long)]
    pub jmax: Option<u32>,
    #[arg(long)]
    pub length: Option<f64>,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    /// Built-in symbol: one, bracket, inverse-bracket, modulated, chirp.
    #[arg(long)]
    pub symbol: Option<String>,
    #[arg(long)]
    pub kmax: Option<usize>,
    #[arg(long)]
    pub tail_tolerance: Option<f64>,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EmbedKind {
    /// Critical F^{n/p}_{p,q} into X_w with the refined weight.
    Refined,
    /// B^{s+n/p}_{p,inf} into F^s_{inf,q}.
    BesovTl,
    /// F^s_{p,q} into B^{s1}_{p1,q1}.
    TlBesov,
    /// X_1 against L^inf, X_log against bmo, F^0_{inf,2} against bmo.
    Identification,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[arg(long, value_enum)]
    pub kind: Option<EmbedKind>,
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub q: Option<String>,
    /// Weight exponent; defaults to the refined exponent 1/r'.
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<f64>,
    #[arg(long)]
    pub s: Option<String>,
    #[arg(long)]
    pub p1: Option<String>,
    #[arg(long)]
    pub q1: Option<String>,
    #[arg(long)]
    pub s1: Option<String>,
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args)]
pub struct ProductArgs {
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub q: Option<String>,
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args)]
pub struct ResolutionArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub s: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args)]
pub struct SharpnessArgs {
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    /// Largest truncation radius; radii are 2^k e up to it.
    #[arg(long)]
    pub rmax: Option<f64>,
    #[arg(long)]
    pub points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct LiftArgs {
    /// Single case; all of p, q, s, lambda default to the standard grid of cases.
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub s: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args)]
pub struct PdeArgs {
    /// Dispersion exponent s in |xi|^s.
    #[arg(long)]
    pub s: Option<f64>,
    /// Time horizon.
    #[arg(long = "T")]
    pub horizon: Option<f64>,
    /// LPGF initial datum; a seeded smooth datum is used when absent.
    #[arg(long)]
    pub u0: Option<PathBuf>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// L^2_{n/2} norm of the generated datum.
    #[arg(long)]
    pub amplitude: Option<f64>,
    /// Bilinear symbol, or zero for the linear equation.
    #[arg(long)]
    pub symbol: Option<String>,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// Also measure the order of the time discretization.
    #[arg(long)]
    pub order: bool,
    /// Directory for LPGF snapshots of the trajectory.
    #[arg(long)]
    pub snapshots: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub grid: GridArgs,
}

#[derive(Debug, Args)]
pub struct LogSchrodingerArgs {
    /// Two LPGF inputs f and g; an ensemble sweep runs when absent.
    #[arg(long, num_args = 2, value_names = ["F", "G"])]
    pub input: Option<Vec<PathBuf>>,
    #[arg(long)]
    pub symbol: Option<String>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
    #[command(flatten)]
    pub ensemble: EnsembleArgs,
    #[command(flatten)]
    pub grid: GridArgs,
}

fn threads() -> Result<usize, CliError> {
    let Ok(raw) = std::env::var("LPCALC_THREADS") else {
        return Ok(rayon::current_num_threads());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("LPCALC_THREADS={raw:?} must be a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot size the thread pool: {e}")))?;
    Ok(n)
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let threads = threads()?;
    let config = ConfigFile::load(cli.config.as_deref())?;
    let mut out = Builder::default();
    commands::dispatch(&cli.command, &config, &mut out)?;
    let (report, series) = out.finish(cli.command.name(), threads);
    if let (Some(path), Some(series)) = (cli.csv.as_deref(), series.as_ref()) {
        report::write_series(series, path)?;
    }
    report::write_report(&report, cli.output.as_deref())?;
    for c in report.checks.iter().filter(|c| !c.pass) {
        eprintln!(
            "check failed: {} = {} (required {} {})",
            c.name, c.value, c.relation, c.bound
        );
    }
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let code = match run(cli) {
        Ok(true) => EXIT_PASS,
        Ok(false) => EXIT_CHECK_FAILED,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
