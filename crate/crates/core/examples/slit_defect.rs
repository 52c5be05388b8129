//! Probability lost at a single slit as a function of its half width.
//!
//! cargo run --example slit_defect

use signal_lab::kernel::{defect_sweep, propagate_slit, unitarity_defect, GaussianPacket, KernelParams, SlitGeometry, SlitProfile};
use signal_lab::GridAxis;

pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    let axis = GridAxis::symmetric(40.0, 1 << 13)?;
    let packet = GaussianPacket::new(0.0, 1.0, 0.0)?;
    let params = KernelParams::natural(0.0, 1.0, 2.0)?;
    let width_at_slit = packet.width_at(1.0, params.mass, params.hbar);
    println!("packet width at the slit plane: {width_at_slit:.4}\n");

    let widths: Vec<f64> = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0].iter().map(|f| f * width_at_slit).collect();
    for profile in [SlitProfile::Hard, SlitProfile::Gaussian] {
        println!("{profile:?} slit");
        println!("  b/width   transmitted   defect");
        for row in defect_sweep(&packet, axis, &params, profile, 0.0, &widths)? {
            println!("  {:<9.3} {:<13.6e} {:.6e}", row.half_width / width_at_slit, row.transmitted, row.defect);
        }
    }

    // the second free segment keeps the norm, so the output norm equals the mid-plane norm
    let r = propagate_slit(&packet, axis, &params, &SlitGeometry::hard(width_at_slit, 0.0)?)?;
    println!(
        "\nmid-plane {:.15}, output {:.15}, defect {:.6}",
        r.transmitted,
        r.output_norm_sq,
        unitarity_defect(&r)
    );
    Ok(())
}
