//! Smallest number of detections that reads phi in {0, pi} from the fringes,
//! for a few fringe visibilities.
//!
//! cargo run --release --example readout_budget

use std::f64::consts::PI;

use signal_lab::signal::{required_n, ReadoutExperiment};
use signal_lab::source::{BranchSource, Envelope};
use signal_lab::state::{detection_pattern, PhaseShift};
use signal_lab::GridAxis;

pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    let axis1 = GridAxis::symmetric(10.0, 1601)?;
    let axis2 = GridAxis::symmetric(20.0, 1601)?;
    println!("|I|    N(0.99)  N(0.999)");
    for overlap in [1.0, 0.5, 0.25] {
        let pair = BranchSource::with_overlap(axis1, Envelope::FlatTop { half_width: 6.0 }, 3.0, axis2, 1.0, overlap)?.build()?;
        let zero = detection_pattern(&pair, PhaseShift::ZERO, true)?;
        let pi = detection_pattern(&pair, PhaseShift::new(PI)?, true)?;
        let mut budgets = Vec::new();
        for confidence in [0.99, 0.999] {
            let exp = ReadoutExperiment::new(zero.clone(), pi.clone(), confidence, 7, 4096)?.with_trials(4000)?;
            budgets.push(required_n(&exp)?.required_n);
        }
        println!("{overlap:<6} {:<8} {}", budgets[0], budgets[1]);
    }
    Ok(())
}
