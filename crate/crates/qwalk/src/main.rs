use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qwalk::config::ExperimentConfig;
use qwalk::estimate::estimate;
use qwalk::runner::{run, RunOptions};
use qwalk::Error;

/// Quantum walk experiments from declarative TOML configurations.
#[derive(Parser)]
#[command(name = "qwalk", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its outputs and manifest.
    Run {
        config: PathBuf,
        /// Output directory; must not exist or be empty.
        #[arg(long)]
        out: PathBuf,
        /// Worker threads for ensembles (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
        /// Master seed, overriding the configuration.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check a configuration and list every problem found.
    Validate { config: PathBuf },
    /// Print qubit, amplitude and memory figures for the configured job.
    Estimate { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(command: Command) -> Result<(), Error> {
    match command {
        Command::Run {
            config,
            out,
            threads,
            seed,
        } => {
            let config = ExperimentConfig::load(&config)?;
            let reports = run(&config, &out, &RunOptions { threads, seed })?;
            for r in reports {
                println!("wrote {}", r.dir.display());
            }
            Ok(())
        }
        Command::Validate { config } => {
            let config = ExperimentConfig::load(&config)?;
            config.plan()?;
            println!("ok");
            Ok(())
        }
        Command::Estimate { config } => {
            let config = ExperimentConfig::load(&config)?;
            print!("{}", estimate(&config)?);
            Ok(())
        }
    }
}
