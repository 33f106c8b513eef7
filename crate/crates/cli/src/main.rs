//! `bosonic`: run state-transfer and entanglement experiments from the command line.

mod config;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use config::{RawConfig, RunConfig, TruncSpec};
use run::Failure;

const DEFAULT_OUT: &str = "bosonic-out";

#[derive(Debug, Parser)]
#[command(
    name = "bosonic",
    version,
    about = "Pulse design and Fock-space simulation for modes coupled through a common channel",
    after_help = "Commands: qst, sweep-m, sweep-temp, sweep-phase, sweep-jitter, wstate, ep, tradeoff, wigner.\n\
                  Example: bosonic sweep-m input=fock:1 m=5..17 --out runs/sweep"
)]
struct Cli {
    /// Command name followed by `key=value` parameters
    #[arg(value_name = "COMMAND | KEY=VALUE")]
    args: Vec<String>,

    /// Config file with one `key = value` per line; inline pairs override it
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory
    #[arg(long, value_name = "DIR", env = "BOSONIC_OUT")]
    out: Option<PathBuf>,

    /// Worker threads for sweeps
    #[arg(long, value_name = "N")]
    workers: Option<usize>,

    /// Per-mode Fock cutoff: an integer, `auto` or `converged`
    #[arg(long, value_name = "D|auto")]
    trunc: Option<String>,

    /// Integrator step in units of 1/omega
    #[arg(long, value_name = "STEP")]
    dt: Option<f64>,
}

fn load(cli: &Cli) -> Result<RunConfig, Failure> {
    let invalid = |e: config::ConfigError| Failure::Validation(e.to_string());
    let mut raw = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            RawConfig::parse(&text, &path.display().to_string()).map_err(invalid)?
        }
        None => RawConfig::default(),
    };
    let mut pairs = cli.args.as_slice();
    let mut first = 1;
    if let Some(command) = pairs.first().filter(|a| !a.contains('=')) {
        raw.set("command", command, "command line");
        pairs = &pairs[1..];
        first = 2;
    }
    if let Some(bad) = pairs.iter().find(|a| !a.contains('=')) {
        return Err(Failure::Validation(format!("expected `key=value`, got `{bad}`")));
    }
    raw.add_args(pairs, first).map_err(invalid)?;
    if let Some(t) = &cli.trunc {
        t.parse::<TruncSpec>().map_err(|e| Failure::Validation(format!("--trunc: {e}")))?;
        raw.set("trunc", t, "--trunc");
    }
    if let Some(dt) = cli.dt {
        raw.set("dt", &dt.to_string(), "--dt");
    }
    if let Some(w) = cli.workers {
        raw.set("workers", &w.to_string(), "--workers");
    }
    RunConfig::from_raw(&raw).map_err(invalid)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = load(&cli).and_then(|cfg| {
        let dir = cli
            .out
            .clone()
            .or_else(|| cfg.output_dir.as_ref().map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
        let workers = cfg.workers.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        let partial = run::run(&cfg, &dir, workers)?;
        eprintln!("wrote {}", dir.join(run::MANIFEST).display());
        partial.map_or(Ok(()), Err)
    });
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("bosonic: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
