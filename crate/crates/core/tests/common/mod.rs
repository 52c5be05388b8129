//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use signal_lab::source::{BranchSource, Envelope};
use signal_lab::state::{EntangledBranchPair, PhaseShift};
use signal_lab::{GridAxis, ModeFunction, ModeLabel};

/// Free Gaussian packet `(2 pi sigma^2)^{-1/4} exp(-(x-x0)^2/(4 sigma^2) + i k0 (x-x0))`
/// evolved in closed form for time `t`.
pub fn gaussian_packet_at(x: f64, t: f64, x0: f64, sigma: f64, k0: f64, mass: f64, hbar: f64) -> Complex64 {
    let i = Complex64::i();
    let v = hbar * k0 / mass;
    let u = x - x0 - v * t;
    let width = Complex64::new(sigma, hbar * t / (2.0 * mass * sigma));
    let denom = Complex64::new(4.0 * sigma * sigma, 2.0 * hbar * t / mass);
    (2.0 * PI).powf(-0.25) * width.powf(-0.5) * (-(u * u) / denom + i * k0 * (x - x0 - v * t / 2.0)).exp()
}

/// Two-particle amplitude `c1 A(x1) D(x2) + c2 B(x1) e^{i phi} C(x2)` on the product grid.
pub fn two_particle_state(pair: &EntangledBranchPair, phi: f64) -> Vec<Vec<Complex64>> {
    let e = Complex64::from_polar(1.0, phi);
    let (a, b) = (pair.mode_1a().samples(), pair.mode_1b().samples());
    let (c, d) = (pair.mode_2c().samples(), pair.mode_2d().samples());
    (0..a.len())
        .map(|j| {
            (0..c.len())
                .map(|k| pair.c1() * a[j] * d[k] + pair.c2() * b[j] * e * c[k])
                .collect()
        })
        .collect()
}

/// `int int |Psi|^2 dx1 dx2` by nested trapezoid sums.
pub fn brute_norm_sq(pair: &EntangledBranchPair, psi: &[Vec<Complex64>]) -> f64 {
    let (ax1, ax2) = (pair.particle1_axis(), pair.particle2_axis());
    let rows: Vec<f64> = psi
        .iter()
        .map(|row| ax2.integrate(&row.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>()))
        .collect();
    ax1.integrate(&rows)
}

/// Normalized particle-1 marginal `int |Psi(x1, x2)|^2 dx2`.
pub fn brute_marginal(pair: &EntangledBranchPair, phi: f64) -> Vec<f64> {
    let psi = two_particle_state(pair, phi);
    let norm = brute_norm_sq(pair, &psi);
    let ax2 = pair.particle2_axis();
    psi.iter()
        .map(|row| ax2.integrate(&row.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>()) / norm)
        .collect()
}

/// Normalized partial trace `int Psi(x, x2) Psi*(x', x2) dx2`.
pub fn brute_partial_trace(pair: &EntangledBranchPair, phi: f64) -> Vec<Vec<Complex64>> {
    let psi = two_particle_state(pair, phi);
    let norm = brute_norm_sq(pair, &psi);
    let ax2 = pair.particle2_axis();
    let n = psi.len();
    (0..n)
        .map(|j| {
            (0..n)
                .map(|l| {
                    let prod: Vec<Complex64> = psi[j].iter().zip(&psi[l]).map(|(p, q)| p * q.conj()).collect();
                    ax2.integrate_complex(&prod) / norm
                })
                .collect()
        })
        .collect()
}

/// Random entangled pair of Gaussian branch modes on the given axes.
pub fn random_pair<R: Rng>(rng: &mut R, axis1: GridAxis, axis2: GridAxis) -> EntangledBranchPair {
    let mode = |axis: GridAxis, label: ModeLabel, rng: &mut R| -> ModeFunction {
        let center = rng.random_range(-2.0..2.0);
        let sigma = rng.random_range(0.7..1.5);
        let k = rng.random_range(-2.0..2.0);
        ModeFunction::gaussian(axis, label, center, sigma, k).unwrap()
    };
    let a = mode(axis1, ModeLabel::A1, rng);
    let b = mode(axis1, ModeLabel::B1, rng);
    let c = mode(axis2, ModeLabel::C2, rng);
    let d = mode(axis2, ModeLabel::D2, rng);
    let theta: f64 = rng.random_range(0.2..1.3);
    let c1 = Complex64::from_polar(theta.cos(), rng.random_range(0.0..2.0 * PI));
    let c2 = Complex64::from_polar(theta.sin(), rng.random_range(0.0..2.0 * PI));
    EntangledBranchPair::new((a, d), (b, c), c1, c2).unwrap()
}

/// Flat-top source with fringe wavenumber 6 and the requested `|I|`.
pub fn flat_top_pair(overlap: f64, n_points: usize) -> EntangledBranchPair {
    BranchSource::with_overlap(
        GridAxis::symmetric(10.0, n_points).unwrap(),
        Envelope::FlatTop { half_width: 6.0 },
        3.0,
        GridAxis::symmetric(20.0, 1601).unwrap(),
        1.0,
        overlap,
    )
    .unwrap()
    .build()
    .unwrap()
}

pub fn phase(phi: f64) -> PhaseShift {
    PhaseShift::new(phi).unwrap()
}

pub fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
