//! Runs a scenario file the same way the `signal-lab run` command does.
//!
//! cargo run --example run_scenario -- crates/core/configs/timing.toml /tmp/timing-run

use std::path::{Path, PathBuf};

use signal_lab::scenario::{run, validate, RunOptions, ScenarioConfig};

pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let config = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/qubit_switch.toml"));
    let out_dir = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("signal-lab-example"));
    run_config(&config, &out_dir)
}

pub fn run_config(config: &Path, out_dir: &Path) -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ScenarioConfig::from_path(config)?;
    let problems = validate(&cfg);
    if !problems.is_empty() {
        for d in &problems {
            eprintln!("{d}");
        }
        return Err("config does not validate".into());
    }
    let manifest = run(
        &cfg,
        &RunOptions {
            out_dir: out_dir.to_path_buf(),
            seed: None,
            force: true,
        },
    )?;
    println!("{} scenario finished in {:.3} s", manifest.scenario, manifest.duration_s);
    for artifact in &manifest.artifacts {
        let path = out_dir.join(artifact);
        println!("--- {}", path.display());
        print!("{}", std::fs::read_to_string(&path)?);
    }
    Ok(())
}
