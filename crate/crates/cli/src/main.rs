use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod reproduce;

#[derive(Parser, Debug)]
#[command(
    name = "chaoskey",
    version,
    about = "Identify chaotic maps from data and use them as image ciphers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Iterate a map and write the trajectory as CSV.
    Generate(GenerateArgs),
    /// Recover an explicit map from a trajectory CSV.
    Identify(IdentifyArgs),
    /// Encrypt a P5 PGM image.
    Encrypt(CipherArgs),
    /// Decrypt a P5 PGM image.
    Decrypt(CipherArgs),
    /// Statistical report for a plaintext and optionally its ciphertext.
    Analyze(AnalyzeArgs),
    /// Regenerate one of the reference experiments.
    Reproduce(ReproduceArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapName {
    Henon,
    Lozi,
    Logistic3d,
}

/// Map selection shared by commands that iterate a map.
#[derive(Args, Debug, Clone)]
pub struct MapSource {
    /// Model file written by `identify`; overrides the built-in map.
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    /// First map parameter (Hénon 1.4, Lozi 1.7).
    #[arg(long)]
    pub a: Option<f64>,
    /// Second map parameter (Hénon 0.3, Lozi 0.5).
    #[arg(long)]
    pub b: Option<f64>,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    /// Built-in map. Omit when `--model` is given.
    #[arg(value_enum)]
    pub map: Option<MapName>,
    #[command(flatten)]
    pub source: MapSource,
    /// Initial state, comma separated. Defaults to 0.1,0.1 (0.1,0.2,0.3 in 3D).
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<String>,
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub burn_in: usize,
    /// Standard deviation of additive Gaussian measurement noise.
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct IdentifyArgs {
    pub data: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub max_degree: u32,
    #[arg(long, default_value_t = 1e-3)]
    pub lambda: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub significance: f64,
    #[arg(long, default_value_t = 20)]
    pub max_iter: usize,
    /// Add |v| factors to the library.
    #[arg(long)]
    pub abs: bool,
    /// Also try products x_i' * x_j as regression targets.
    #[arg(long)]
    pub composite: bool,
    /// Significant digits in the printed equations.
    #[arg(long, default_value_t = 4)]
    pub digits: usize,
    /// Model file to write (full precision).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CipherArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = MapName::Henon)]
    pub map: MapName,
    #[command(flatten)]
    pub source: MapSource,
    /// Initial state used as the key, comma separated.
    #[arg(long, default_value = "0.2,0.3", allow_hyphen_values = true)]
    pub key: String,
    /// Diffusion passes (even).
    #[arg(long, default_value_t = chaoskey::cipher::DEFAULT_ROUNDS)]
    pub rounds: usize,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    pub plain: PathBuf,
    pub cipher: Option<PathBuf>,
    /// Seed for adjacent-pair sampling.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = chaoskey::analysis::DEFAULT_PAIRS)]
    pub pairs: usize,
    /// Directory for histogram CSVs.
    #[arg(long, value_name = "DIR")]
    pub hist: Option<PathBuf>,
    /// Directory for adjacent-pair CSVs.
    #[arg(long, value_name = "DIR")]
    pub scatter: Option<PathBuf>,
    /// JSON report path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    T1,
    T2,
    T3,
    T4,
    T5,
    T6,
    T7,
    T8,
    T9,
    Fig2,
    Fig3,
    S57,
    All,
}

#[derive(Args, Debug)]
pub struct ReproduceArgs {
    #[arg(value_enum)]
    pub target: Target,
    #[arg(long, default_value = "reproduce")]
    pub workdir: PathBuf,
    /// Test image; the bundled synthetic stand-in when omitted.
    #[arg(long)]
    pub image: Option<PathBuf>,
}

/// Bad flag combinations detected after parsing. Exits with status 2 like
/// clap's own usage errors.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Generate(a) => commands::generate(&a).map(|_| true),
        Command::Identify(a) => commands::identify(&a).map(|_| true),
        Command::Encrypt(a) => commands::crypt(&a, true).map(|_| true),
        Command::Decrypt(a) => commands::crypt(&a, false).map(|_| true),
        Command::Analyze(a) => commands::analyze(&a).map(|_| true),
        Command::Reproduce(a) => reproduce::run(&a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
