//! Branch modes produced by propagating a packet through two slits, fed into
//! an entangled pair and read out as a detection pattern.
//!
//! cargo run --example double_slit [out.csv]

use signal_lab::kernel::{double_slit_modes, GaussianPacket, KernelParams, SlitGeometry};
use signal_lab::state::{detection_pattern, visibility, EntangledBranchPair, PhaseShift};
use signal_lab::{GridAxis, ModeFunction, ModeLabel};

pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    run(std::env::args().nth(1).as_deref())
}

pub fn run(csv_path: Option<&str>) -> Result<(), Box<dyn std::error::Error>> {
    let axis = GridAxis::symmetric(80.0, 8001)?;
    let packet = GaussianPacket::new(0.0, 3.0, 0.0)?;
    let params = KernelParams::natural(0.0, 0.05, 4.05)?;
    let d = 4.0;
    let modes = double_slit_modes(
        &packet,
        axis,
        &params,
        &SlitGeometry::gaussian(0.3, -d / 2.0)?,
        &SlitGeometry::gaussian(0.3, d / 2.0)?,
    )?;
    println!(
        "transmitted through A: {:.4}, through B: {:.4}",
        modes.transmitted_a, modes.transmitted_b
    );
    println!("expected fringe spacing 2 pi hbar t / (m d) = {:.4}", 2.0 * std::f64::consts::PI * 4.0 / d);

    // particle 2: two partially overlapping Gaussians behind slits C and D
    let axis2 = GridAxis::symmetric(20.0, 1601)?;
    let c = ModeFunction::gaussian(axis2, ModeLabel::C2, 0.6, 1.0, 0.0)?;
    let dm = ModeFunction::gaussian(axis2, ModeLabel::D2, -0.6, 1.0, 0.0)?;
    let pair = EntangledBranchPair::maximally_entangled(modes.mode_a, dm, modes.mode_b, c)?;
    println!("I = {:.4}", pair.overlap_i().value());

    for phi in [0.0, std::f64::consts::PI] {
        let pattern = detection_pattern(&pair, PhaseShift::new(phi)?, true)?;
        println!(
            "phi = {phi:.3}: visibility in [-8, 8] = {:.4}, density at 0 = {:.5}",
            visibility(&pattern, (-8.0, 8.0))?,
            pattern.density_at(0.0)
        );
        if let Some(path) = csv_path.filter(|_| phi == 0.0) {
            std::fs::write(path, pattern.to_csv())?;
            println!("wrote {path}");
        }
    }
    Ok(())
}
