use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use chemostat::io::{run, write_outputs, RunConfig};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "chemostat", version, about = "Chemostat simulation and verification runs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a TOML configuration file.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        replicates: Option<usize>,
        /// Simulated time span, h.
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long, env = "CHEMOSTAT_OUT_DIR", default_value = "chemostat-out")]
        out_dir: PathBuf,
        /// Worker threads (0 = all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Parse and validate a configuration, then print it with defaults filled in.
    Check { config: PathBuf },
}

fn load(path: &Path) -> anyhow::Result<RunConfig> {
    RunConfig::from_path(path).map_err(anyhow::Error::from)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Check { config } => {
            let cfg = load(&config)?;
            print!("{}", cfg.to_toml());
        }
        Command::Run { config, seed, replicates, horizon, out_dir, threads } => {
            let mut cfg = load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(r) = replicates {
                cfg.replicates = r;
            }
            if let Some(h) = horizon {
                cfg.horizon = h;
            }
            if let Some(t) = threads {
                cfg.threads = t;
            }
            cfg.validate().context("invalid command-line override")?;
            let out = run(&cfg).context("run failed")?;
            let written = write_outputs(&out, &out_dir)
                .with_context(|| format!("writing outputs to {}", out_dir.display()))?;
            for e in &out.timing.entries {
                println!(
                    "{:<12} {:<12} {:>6} replicates {:>12} events {:>10.3} s",
                    e.label, e.model, e.replicates, e.events, e.wall_time_s
                );
            }
            println!("wrote {} files to {}", written.len(), out_dir.display());
        }
    }
    Ok(())
}
