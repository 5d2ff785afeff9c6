//! `reslab`: build rank-one resonance models from JSON specs, run scans and
//! the acceptance suite.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "reslab", version, about = "Rank-one resonance workbench")]
struct Cli {
    #[command(flatten)]
    run: RunArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    /// JSON model spec; the reference 1D profile when omitted.
    #[arg(long, global = true)]
    model: Option<PathBuf>,

    /// Directory for CSV/JSON output; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Detuning exponents `start:stop[:base]`, giving `|α-α₀| = base^e`.
    #[arg(long, global = true, default_value = "-1:-3", allow_hyphen_values = true)]
    alpha_exps: String,

    /// Explicit comma-separated couplings; overrides `--alpha-exps`.
    #[arg(long, global = true, allow_hyphen_values = true)]
    alphas: Option<String>,

    /// Comma-separated offsets `h` in units of the width.
    #[arg(long, global = true, default_value = "-2,-1,0,1,2", allow_hyphen_values = true)]
    h: String,

    /// Grid half-width, overriding the spec.
    #[arg(long = "grid-L", global = true)]
    grid_l: Option<f64>,

    /// Grid point count, overriding the spec.
    #[arg(long = "grid-N", global = true)]
    grid_n: Option<usize>,

    /// Seed for randomized point selection.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the profile and print its constants.
    Solve,
    /// Tabulate a limit along the coupling sequence.
    Scan {
        #[arg(value_enum)]
        kind: ScanKind,
    },
    /// Survival amplitude of the embedded eigenvector.
    Survival {
        /// Coupling; defaults to the first value of the sequence.
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 50.0)]
        t_max: f64,
        #[arg(long, default_value_t = 200)]
        steps: usize,
    },
    /// Sojourn time and its lower bound along the sequence.
    Sojourn,
    /// Run the acceptance suite and emit one JSON object per criterion.
    Verify {
        /// Criterion names or prefixes, comma-separated.
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
        /// Replace every tolerance.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long, default_value_t = 4096)]
        oracle_points: usize,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanKind {
    Bw,
    Rlimit,
    Flimits,
    Ssf,
    Delay,
    Xsection,
}

impl ScanKind {
    fn file_stem(self) -> &'static str {
        match self {
            ScanKind::Bw => "bw",
            ScanKind::Rlimit => "rlimit",
            ScanKind::Flimits => "flimits",
            ScanKind::Ssf => "ssf",
            ScanKind::Delay => "delay",
            ScanKind::Xsection => "xsection",
        }
    }
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("RESLAB_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| reslab_core::Error::Config(format!("RESLAB_THREADS must be a positive integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| reslab_core::Error::Config(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = configure_threads().and_then(|_| match cli.command {
        Command::Solve => commands::solve(&cli.run),
        Command::Scan { kind } => commands::scan(&cli.run, kind),
        Command::Survival { alpha, t_max, steps } => commands::survival(&cli.run, alpha, t_max, steps),
        Command::Sojourn => commands::sojourn(&cli.run),
        Command::Verify { only, tol, oracle_points } => commands::verify(&cli.run, only, tol, oracle_points),
    });
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
