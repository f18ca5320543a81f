use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod reproduce;
mod settings;

use settings::Settings;

#[derive(Parser, Debug)]
#[command(
    name = "pqpe",
    version,
    about = "Window states for phase estimation: build, compress, synthesize, simulate"
)]
struct Cli {
    /// JSON object with defaults for any flag; flags given on the command line win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    settings: Settings,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Optimal window for --dim and one of --d / --delta; --n also writes the padded register state.
    Dpss,
    /// Compress a window (--window, or --dim with --d/--delta) to an MPS of bond dimension --chi.
    Compress,
    /// Gate list preparing an MPS (--mps).
    Synth,
    /// Phase-estimation outcome distribution for --mps, --circuit or --state at --phi.
    Simulate,
    /// Confidence and failure-probability comparisons for --state.
    Analyze {
        /// Report the confidence at --d.
        #[arg(long)]
        confidence: bool,
    },
    /// Rerun a sweep and compare against the embedded reference values.
    Reproduce { target: Target },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
#[value(rename_all = "snake_case")]
pub enum Target {
    Table1,
    FigRelerr,
    FigConvergence,
    FigTradeoff,
    TableCost,
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Core(pqpe_core::Error),
    /// A comparison against reference values did not hold.
    Mismatch(String),
}

impl From<pqpe_core::Error> for Failure {
    fn from(e: pqpe_core::Error) -> Self {
        Failure::Core(e)
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(m) => write!(f, "usage: {m}"),
            Failure::Core(e) => write!(f, "{e}"),
            Failure::Mismatch(m) => write!(f, "comparison failed: {m}"),
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut s = cli.settings;
    if let Some(path) = &cli.config {
        s.merge_config(path)?;
    }
    if let Some(k) = s.parallel {
        if k == 0 {
            return Err(Failure::Usage("--parallel must be positive".into()));
        }
        // Fails only if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
    match cli.command {
        Command::Dpss => commands::dpss(&s),
        Command::Compress => commands::compress(&s),
        Command::Synth => commands::synth(&s),
        Command::Simulate => commands::simulate(&s),
        Command::Analyze { confidence } => commands::analyze(&s, confidence),
        Command::Reproduce { target } => reproduce::run(&s, target),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let line = e.to_string().replace('\n', " ");
            eprintln!("error: {line}");
            ExitCode::from(match e {
                Failure::Usage(_) => 2,
                Failure::Core(_) => 1,
                Failure::Mismatch(_) => 3,
            })
        }
    }
}
