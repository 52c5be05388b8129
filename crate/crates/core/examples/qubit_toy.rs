//! Side-1 marginals of the two-level model under unitary and non-unitary
//! side-2 evolutions, including a switch at time T.
//!
//! cargo run --example qubit_toy

use nalgebra::Matrix2;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use signal_lab::qubit::{
    gram, marginal_probs_closed, marginal_probs_oracle, probs_vs_time, qubit_row, qubit_table, random_unitary,
    signaling_deviation, EvolutionMap2, TimeSwitch,
};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let u1 = EvolutionMap2::side1(random_unitary(&mut rng))?;

    let unitary = EvolutionMap2::side2(random_unitary(&mut rng))?;
    let p = marginal_probs_closed(&gram(&unitary));
    println!("unitary U2:       P+ = {:.15}, P- = {:.15}", p.plus, p.minus);

    let lossy = EvolutionMap2::side2(Matrix2::new(c(1.0), c(0.0), c(0.0), c(0.5)))?;
    let g = gram(&lossy);
    let closed = marginal_probs_closed(&g);
    let oracle = marginal_probs_oracle(&u1, &lossy)?;
    println!(
        "U2 = diag(1, 0.5): P+ = {}, P- = {}, oracle gap {:.1e}, deviation {}",
        closed.plus,
        closed.minus,
        closed.max_abs_diff(&oracle),
        signaling_deviation(&g)
    );

    let switch = TimeSwitch::new(1.0, c(-0.5), c(0.0), c(0.0), c(0.0))?;
    println!("\nswitch at T = 1 with alpha0 = -0.5");
    let mut rows = Vec::new();
    for t in [0.0, 0.5, 0.999, 1.0, 2.0] {
        let m = probs_vs_time(&switch, t)?;
        println!("  t = {t:<6} P+ = {:<6} P- = {}", m.plus, m.minus);
        rows.push(qubit_row(t, &switch.gram_at(t)?, &u1)?);
    }
    print!("\n{}", qubit_table(&rows).render());
    Ok(())
}
