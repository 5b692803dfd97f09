//! Reproducible experiment runner: parses a strict JSON config, dispatches to
//! the library, and writes CSV/JSON artifacts with a rerun manifest.

mod artifacts;
mod config;
mod experiments;

use clap::{Parser, Subcommand};
use config::ExperimentConfig;
use experiments::RunError;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "nhsync",
    version,
    about = "Invariant graphs and synchronization experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute an experiment config and write its artifacts.
    Run {
        config: PathBuf,
        /// Override the config's output directory.
        #[arg(long)]
        output_dir: Option<PathBuf>,
        /// Override the worker thread count.
        #[arg(long)]
        threads: Option<usize>,
        /// Override the sampling seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check a config against the schema and print its normalized form.
    Validate { config: PathBuf },
}

fn load_config(path: &PathBuf) -> Result<ExperimentConfig, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    ExperimentConfig::parse(&text).map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { config } => match load_config(&config) {
            Ok(cfg) => {
                print!("{}", cfg.normalized_json());
                ExitCode::from(0)
            }
            Err(msg) => {
                eprintln!("{msg}");
                ExitCode::from(2)
            }
        },
        Command::Run {
            config,
            output_dir,
            threads,
            seed,
        } => {
            let mut cfg = match load_config(&config) {
                Ok(cfg) => cfg,
                Err(msg) => {
                    eprintln!("{msg}");
                    return ExitCode::from(2);
                }
            };
            if let Some(dir) = output_dir {
                cfg.output_dir = dir.display().to_string();
            }
            if let Some(s) = seed {
                cfg.numerics.seed = s;
            }
            let n_threads = cfg.resolve_threads(threads);

            let out = PathBuf::from(&cfg.output_dir);
            if let Err(e) = std::fs::create_dir_all(&out) {
                eprintln!("cannot create {}: {e}", out.display());
                return ExitCode::from(1);
            }

            let pool = match rayon::ThreadPoolBuilder::new()
                .num_threads(n_threads)
                .build()
            {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("thread pool: {e}");
                    return ExitCode::from(1);
                }
            };

            let started = Instant::now();
            let result = pool.install(|| experiments::run(&cfg, &out));
            let wall = started.elapsed().as_secs_f64();

            match result {
                Ok(artifact_names) => {
                    let manifest = serde_json::json!({
                        "config": serde_json::from_str::<serde_json::Value>(&cfg.normalized_json()).unwrap(),
                        "version": env!("CARGO_PKG_VERSION"),
                        "wall_time_s": wall,
                        "seed": cfg.numerics.seed,
                        "threads": n_threads,
                        "artifacts": artifact_names,
                    });
                    if let Err(e) = artifacts::write_json(out.join("manifest.json"), &manifest) {
                        eprintln!("cannot write manifest: {e}");
                        return ExitCode::from(1);
                    }
                    for name in &artifact_names {
                        println!("{}", out.join(name).display());
                    }
                    ExitCode::from(0)
                }
                Err(RunError::Config(e)) => {
                    eprintln!("{e}");
                    ExitCode::from(2)
                }
                Err(RunError::Numerical(msg)) => {
                    // experiments may have written detailed diagnostics already
                    let diag = out.join("diagnostics.json");
                    if !diag.exists() {
                        let _ = artifacts::write_json(
                            &diag,
                            &serde_json::json!({ "error": msg, "wall_time_s": wall }),
                        );
                    }
                    eprintln!("numerical failure: {msg}");
                    ExitCode::from(3)
                }
                Err(RunError::Io(e)) => {
                    eprintln!("io error: {e}");
                    ExitCode::from(1)
                }
            }
        }
    }
}
