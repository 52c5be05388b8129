//! The emission-rate condition tau < L / (N c) at desk scale.
//!
//! cargo run --example timing

use signal_lab::signal::{evaluate, threshold_tau, TimingScenario, SPEED_OF_LIGHT};

pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (length, n) = (0.5, 7000);
    let threshold = threshold_tau(length, n, SPEED_OF_LIGHT)?;
    println!("L = {length} m, N = {n}: tau must stay below {threshold:.4e} s");

    for tau in [1e-3, 1e-9, threshold, threshold / 2.0] {
        let scenario = TimingScenario::new(tau, length, n, SPEED_OF_LIGHT)?;
        let report = evaluate(&scenario)?;
        println!(
            "tau = {tau:.3e} s: window N*tau = {:.3e} s, feasible = {}, margin = {:.3e}",
            scenario.arrival_window(),
            report.feasible,
            report.margin
        );
    }

    print!("{}", evaluate(&TimingScenario::new(1e-3, length, n, SPEED_OF_LIGHT)?)?.to_json());
    Ok(())
}
