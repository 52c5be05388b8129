use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use signal_lab::scenario::{self, RunOptions, ScenarioConfig, ScenarioError};

#[derive(Debug, Parser)]
#[command(name = "signal-lab", version, about = "Run signaling scenarios from TOML configs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Execute a scenario and write its artifacts.
    Run {
        config: PathBuf,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Allow writing into a non-empty output directory.
        #[arg(long)]
        force: bool,
    },
    /// Report validation problems without running.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(command: Command) -> Result<(), ScenarioError> {
    match command {
        Command::Run {
            config,
            out,
            seed,
            force,
        } => {
            let cfg = ScenarioConfig::from_path(&config)?;
            let manifest = scenario::run(
                &cfg,
                &RunOptions {
                    out_dir: out.clone(),
                    seed,
                    force,
                },
            )?;
            for a in &manifest.artifacts {
                println!("{}", out.join(a).display());
            }
            Ok(())
        }
        Command::Validate { config } => {
            let cfg = ScenarioConfig::from_path(&config)?;
            let diags = scenario::validate(&cfg);
            if diags.is_empty() {
                println!("ok: {} scenario is runnable", cfg.name());
                Ok(())
            } else {
                Err(ScenarioError::Invalid(diags))
            }
        }
    }
}
