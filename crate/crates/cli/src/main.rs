//! `kteach` command-line front end.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kteach::datasets::DatasetKind;
use kteach::teacher::RConvention;

#[derive(Parser, Debug)]
#[command(name = "kteach", version, about = "Teaching sets for kernel perceptrons")]
struct Cli {
    /// Root seed; every random choice derives from it.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Teach a linear perceptron and check direction recovery.
    DemoLinear(DemoLinear),
    /// Teach a homogeneous polynomial perceptron.
    DemoPoly(DemoPoly),
    /// Train a Gaussian reference model, teach it and refit from the set.
    TeachGaussian(TeachGaussian),
    /// Risk gap against truncation order.
    Sweep(Sweep),
    /// Compare a model with a reference on a dataset.
    Eval(Eval),
}

#[derive(Args, Debug)]
pub struct DemoLinear {
    /// Comma-separated target, e.g. "-3,3,5".
    #[arg(long, allow_hyphen_values = true, conflicts_with = "dim")]
    theta: Option<String>,
    /// Draw a random target of this dimension from --seed.
    #[arg(long)]
    dim: Option<usize>,
    /// Write the report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DemoPoly {
    /// Feature-space target, comma-separated, or "counterexample".
    #[arg(long, allow_hyphen_values = true, default_value = "1,4,4")]
    theta: String,
    /// Input dimension.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Kernel degree.
    #[arg(long, default_value_t = 2)]
    k: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct DataArgs {
    /// CSV with columns x1..xd,y.
    #[arg(long, conflicts_with = "kind")]
    dataset: Option<PathBuf>,
    /// Built-in generator.
    #[arg(long, value_parser = parse_kind)]
    kind: Option<DatasetKind>,
    /// Points drawn from the generator.
    #[arg(long, default_value_t = 200)]
    n: usize,
    /// Generator noise.
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
}

#[derive(Args, Debug, Clone)]
pub struct TeachArgs {
    #[arg(long, default_value_t = 0.9)]
    sigma: f64,
    /// Target accuracy; picks the truncation order unless --s is given.
    #[arg(long)]
    epsilon: Option<f64>,
    /// Truncation order.
    #[arg(long)]
    s: Option<u32>,
    #[arg(long, value_enum, default_value_t = Convention::Main)]
    r_convention: Convention,
    /// Teaching points come from the ball of radius factor·√R·σ.
    #[arg(long, default_value_t = kteach::kernel::DEFAULT_BALL_FACTOR)]
    ball_factor: f64,
    /// Anchor leakage limit is Q·ε.
    #[arg(long, default_value_t = kteach::kernel::DEFAULT_ANCHOR_Q)]
    anchor_q: f64,
}

#[derive(Args, Debug)]
pub struct TeachGaussian {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    teach: TeachArgs,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct Sweep {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    teach: TeachArgs,
    #[arg(long, default_value_t = 2)]
    s_min: u32,
    #[arg(long, default_value_t = 12)]
    s_max: u32,
    /// Teaching sets rebuilt per order.
    #[arg(long, default_value_t = 5)]
    trials: usize,
    /// Learner restarts per teaching set.
    #[arg(long, default_value_t = 5)]
    restarts: usize,
    /// Output directory for sweep.json and sweep.csv; CSV goes to stdout otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct Eval {
    /// Model JSON to evaluate.
    #[arg(long)]
    model: PathBuf,
    /// Reference model JSON.
    #[arg(long)]
    reference: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    /// Probes for the pointwise gap.
    #[arg(long, default_value_t = 10_000)]
    probes: usize,
    /// Probe ball radius; defaults to the largest dataset norm.
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Convention {
    Main,
    Appendix,
}

impl From<Convention> for RConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Main => RConvention::Main,
            Convention::Appendix => RConvention::Appendix,
        }
    }
}

fn parse_kind(s: &str) -> Result<DatasetKind, String> {
    s.parse().map_err(|e: kteach::Error| e.to_string())
}

fn main() -> ExitCode {
    // Die quietly when piped into `head` instead of panicking on EPIPE.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("KT_LOG", "warn")).init();
    let cli = Cli::parse();
    let seed = cli.seed;
    let result = match cli.command {
        Command::DemoLinear(a) => commands::demo_linear(&a, seed),
        Command::DemoPoly(a) => commands::demo_poly(&a, seed),
        Command::TeachGaussian(a) => commands::teach_gaussian(&a, seed),
        Command::Sweep(a) => commands::sweep(&a, seed),
        Command::Eval(a) => commands::eval(&a, seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
