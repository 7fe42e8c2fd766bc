//! `dnle` — config-driven experiments for the doubly nonlinear diffusion
//! laboratory.
//!
//! ```text
//! dnle <simulate|profile|eigen|selfsim|rate|quasilinear|positivity>
//!      --config <path> [--config <path> ...] [--out <dir>] [--assert]
//! ```
//!
//! Exit codes: 0 success, 2 config error, 3 solver failure, 4 failed
//! acceptance check (with --assert). Multiple --config files fan out across
//! worker threads, capped by DNLE_THREADS.

mod config;
mod experiments;

use clap::{Parser, Subcommand};
use config::{Config, ExperimentKind};
use dnle_core::report::Json;
use experiments::{run, RunError};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "dnle", version, about = "doubly nonlinear diffusion laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Experiment config file(s); several fan out over worker threads.
    #[arg(long = "config", required = true)]
    configs: Vec<PathBuf>,
    /// Output directory for CSV/JSON artifacts (default: current directory;
    /// with several configs each gets a numbered subdirectory).
    #[arg(long = "out")]
    out: Option<PathBuf>,
    /// Run the experiment's built-in acceptance checks; exit 4 on failure.
    #[arg(long = "assert")]
    assert_checks: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve the Dirichlet problem and export the trajectory.
    Simulate(RunArgs),
    /// Compute the degenerate asymptotic profile f.
    Profile(RunArgs),
    /// Compute the first Dirichlet p-Laplacian eigenpair.
    Eigen(RunArgs),
    /// Integrate a self-similar profile ODE.
    Selfsim(RunArgs),
    /// Degenerate weighted convergence-rate experiment.
    Rate(RunArgs),
    /// Quasilinear envelope / relative-error experiment.
    Quasilinear(RunArgs),
    /// Positivity times and separate-variables sandwich experiment.
    Positivity(RunArgs),
}

fn thread_cap() -> usize {
    std::env::var("DNLE_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

fn error_json(err: &RunError, config: &std::path::Path) -> String {
    let mut inner = Json::obj();
    inner.push("kind", Json::Str(err.kind().into()));
    inner.push("message", Json::Str(err.message().into()));
    inner.push("config", Json::Str(config.display().to_string()));
    let mut json = Json::obj();
    json.push("error", inner);
    json.render()
}

fn run_all(kind: ExperimentKind, args: &RunArgs) -> i32 {
    let out_base = args.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let jobs: Vec<(PathBuf, PathBuf)> = if args.configs.len() == 1 {
        vec![(args.configs[0].clone(), out_base.clone())]
    } else {
        args.configs
            .iter()
            .enumerate()
            .map(|(k, c)| (c.clone(), out_base.join(format!("run{k:03}"))))
            .collect()
    };

    let cap = thread_cap();
    let mut exit = 0;
    for chunk in jobs.chunks(cap.max(1)) {
        let results: Vec<(PathBuf, Result<PathBuf, RunError>)> = std::thread::scope(|scope| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|(config_path, out_dir)| {
                    scope.spawn(move || {
                        let cfg = match Config::load(config_path) {
                            Ok(c) => c,
                            Err(e) => return (config_path.clone(), Err(RunError::Config(e))),
                        };
                        (
                            config_path.clone(),
                            run(kind, &cfg, out_dir, args.assert_checks),
                        )
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        for (config_path, result) in results {
            match result {
                Ok(report) => {
                    println!("{}: wrote {}", kind.as_str(), report.display());
                }
                Err(err) => {
                    print!("{}", error_json(&err, &config_path));
                    exit = exit.max(err.exit_code());
                }
            }
        }
    }
    exit
}

fn main() {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Simulate(a) => (ExperimentKind::Simulate, a),
        Command::Profile(a) => (ExperimentKind::Profile, a),
        Command::Eigen(a) => (ExperimentKind::Eigen, a),
        Command::Selfsim(a) => (ExperimentKind::Selfsim, a),
        Command::Rate(a) => (ExperimentKind::Rate, a),
        Command::Quasilinear(a) => (ExperimentKind::Quasilinear, a),
        Command::Positivity(a) => (ExperimentKind::Positivity, a),
    };
    std::process::exit(run_all(kind, args));
}
