//! A phase element on slit C moves the particle-1 fringes, but only when the
//! particle-2 branch modes overlap.
//!
//! cargo run --example fringe_shift

use std::f64::consts::PI;

use signal_lab::source::{BranchSource, Envelope};
use signal_lab::state::{detection_pattern, fringe_phase_shift, visibility, PhaseShift};
use signal_lab::GridAxis;

pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    let axis1 = GridAxis::symmetric(10.0, 1601)?;
    let axis2 = GridAxis::symmetric(20.0, 1601)?;
    let window = (-4.0, 4.0);

    println!("|I|     visibility  phi_set  phi_read");
    for overlap in [1.0, 0.5, 0.1] {
        let source = BranchSource::with_overlap(axis1, Envelope::FlatTop { half_width: 6.0 }, 3.0, axis2, 1.0, overlap)?;
        let pair = source.build()?;
        let reference = detection_pattern(&pair, PhaseShift::ZERO, true)?;
        let v = visibility(&reference, window)?;
        for phi in [0.7, PI / 2.0, PI] {
            let shifted = detection_pattern(&pair, PhaseShift::new(phi)?, true)?;
            let read = fringe_phase_shift(&reference, &shifted, window)?;
            println!("{overlap:<7} {v:<11.4} {phi:<8.4} {read:.6}");
        }
    }

    // orthogonal partner modes: the phase element leaves no trace
    let far = BranchSource {
        partner_separation: 60.0,
        ..BranchSource::with_overlap(axis1, Envelope::FlatTop { half_width: 6.0 }, 3.0, GridAxis::symmetric(40.0, 3201)?, 1.0, 1.0)?
    }
    .build()?;
    let a = detection_pattern(&far, PhaseShift::ZERO, true)?;
    let b = detection_pattern(&far, PhaseShift::new(PI)?, true)?;
    println!("\n|I| = {:.1e}: patterns at phi = 0 and pi identical: {}", far.overlap_i().modulus(), a.density() == b.density());
    Ok(())
}
