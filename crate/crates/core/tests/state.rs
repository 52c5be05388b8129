mod common;

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use common::{brute_marginal, brute_norm_sq, brute_partial_trace, flat_top_pair, phase, sup_diff, two_particle_state};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use signal_lab::source::{BranchSource, Envelope};
use signal_lab::state::{
    apply_phase, detection_pattern, fringe_phase_shift, overlap, reduced_density, state_norm, visibility,
    EntangledBranchPair, PhaseShift,
};
use signal_lab::{Error, GridAxis, ModeFunction, ModeLabel};

#[test]
fn pattern_matches_brute_force_marginal() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let axis = GridAxis::symmetric(8.0, 128).unwrap();
    for _ in 0..5 {
        let pair = common::random_pair(&mut rng, axis, axis);
        for phi in [0.0, 0.7, 2.9] {
            let pat = detection_pattern(&pair, phase(phi), true).unwrap();
            let oracle = brute_marginal(&pair, phi);
            assert!(sup_diff(pat.density(), &oracle) < 1e-6);
        }
    }
}

#[test]
fn reduced_density_matches_partial_trace() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let axis = GridAxis::symmetric(8.0, 96).unwrap();
    for _ in 0..3 {
        let pair = common::random_pair(&mut rng, axis, axis);
        let phi = 1.1;
        let rho = reduced_density(&pair, phase(phi)).unwrap();
        let oracle = brute_partial_trace(&pair, phi);
        let n = axis.len();
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for l in 0..n {
                worst = worst.max((rho.matrix()[(j, l)] - oracle[j][l]).norm());
            }
        }
        assert!(worst < 1e-6, "worst {worst}");
        assert!(rho.hermiticity_residual() < 1e-12);
        assert!((rho.trace() - 1.0).abs() < 1e-6);
        let pat = detection_pattern(&pair, phase(phi), true).unwrap();
        assert!(sup_diff(&rho.diagonal(), pat.density()) < 1e-12);
        assert!(rho.eigenvalues().iter().all(|&e| e >= -1e-8));
    }
}

#[test]
fn state_norm_matches_double_integral() {
    let axis = GridAxis::symmetric(10.0, 201).unwrap();
    let a = ModeFunction::gaussian(axis, ModeLabel::A1, -0.5, 1.0, 0.0).unwrap();
    let b = ModeFunction::gaussian(axis, ModeLabel::B1, 0.5, 1.0, 0.0).unwrap();
    // I = J = g real
    let pair = EntangledBranchPair::maximally_entangled(a.clone(), a.clone(), b.clone(), b.clone()).unwrap();
    let g = overlap(&a, &b).unwrap().value().re;
    let closed = (1.0 + g * g).sqrt();
    let brute = brute_norm_sq(&pair, &two_particle_state(&pair, 0.0)).sqrt();
    assert!((state_norm(&pair).unwrap() - closed).abs() < 1e-12);
    assert!((brute - closed).abs() < 1e-9);
}

#[test]
fn orthogonal_particle1_modes_give_unit_norm() {
    // J = 0 regardless of I
    let ax1 = GridAxis::symmetric(15.0, 1501).unwrap();
    let ax2 = GridAxis::symmetric(10.0, 501).unwrap();
    let a = ModeFunction::gaussian(ax1, ModeLabel::A1, -6.0, 0.5, 0.0).unwrap();
    let b = ModeFunction::gaussian(ax1, ModeLabel::B1, 6.0, 0.5, 0.0).unwrap();
    let d = ModeFunction::gaussian(ax2, ModeLabel::D2, -0.2, 1.0, 0.0).unwrap();
    let c = ModeFunction::gaussian(ax2, ModeLabel::C2, 0.2, 1.0, 0.0).unwrap();
    let pair = EntangledBranchPair::maximally_entangled(a, d, b, c).unwrap();
    assert!(pair.overlap_i().modulus() > 0.9);
    assert!((state_norm(&pair).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn orthogonal_branches_give_two_eigenvalues() {
    let ax1 = GridAxis::symmetric(15.0, 301).unwrap();
    let ax2 = GridAxis::symmetric(30.0, 601).unwrap();
    let a = ModeFunction::gaussian(ax1, ModeLabel::A1, -6.0, 0.6, 0.0).unwrap();
    let b = ModeFunction::gaussian(ax1, ModeLabel::B1, 6.0, 0.6, 0.0).unwrap();
    let d = ModeFunction::gaussian(ax2, ModeLabel::D2, -15.0, 0.6, 0.0).unwrap();
    let c = ModeFunction::gaussian(ax2, ModeLabel::C2, 15.0, 0.6, 0.0).unwrap();
    let theta: f64 = 0.4;
    let pair = EntangledBranchPair::new(
        (a, d),
        (b, c),
        Complex64::new(theta.cos(), 0.0),
        Complex64::new(0.0, theta.sin()),
    )
    .unwrap();
    let ev = reduced_density(&pair, PhaseShift::ZERO).unwrap().eigenvalues();
    assert!((ev[0] - theta.cos().powi(2)).abs() < 1e-9);
    assert!((ev[1] - theta.sin().powi(2)).abs() < 1e-9);
    assert!(ev[2..].iter().all(|e| e.abs() < 1e-9));
}

#[test]
fn full_overlap_gives_full_contrast() {
    let pair = flat_top_pair(1.0, 4001);
    let pat = detection_pattern(&pair, PhaseShift::ZERO, true).unwrap();
    let v = visibility(&pat, (-3.0, 3.0)).unwrap();
    assert!((v - 1.0).abs() < 1e-3, "visibility {v}");
}

#[test]
fn half_overlap_gives_half_contrast() {
    let pair = flat_top_pair(0.5, 4001);
    let pat = detection_pattern(&pair, PhaseShift::ZERO, true).unwrap();
    let v = visibility(&pat, (-3.0, 3.0)).unwrap();
    assert!((v - 0.5).abs() < 1e-2, "visibility {v}");
}

#[test]
fn vanishing_overlap_gives_no_fringes() {
    let pair = flat_top_pair(1e-300, 4001);
    let pat = detection_pattern(&pair, PhaseShift::ZERO, true).unwrap();
    // the flat-top envelope sags by under 1% at |x| = 3
    assert!(visibility(&pat, (-3.0, 3.0)).unwrap() < 5e-3);
}

#[test]
fn phase_round_trip() {
    let pair = flat_top_pair(0.5, 1601);
    let reference = detection_pattern(&pair, PhaseShift::ZERO, true).unwrap();
    for phi in [0.0, 0.7, PI, 4.0, 2.0 * PI] {
        let shifted = detection_pattern(&pair, phase(phi), true).unwrap();
        let got = fringe_phase_shift(&reference, &shifted, (-4.0, 4.0)).unwrap();
        let want = phi.rem_euclid(2.0 * PI);
        let err = (got - want).abs().min(2.0 * PI - (got - want).abs());
        assert!(err < 1e-6, "phi {phi}: got {got}");
    }
}

#[test]
fn phase_recovery_rejects_flat_patterns() {
    let pair = flat_top_pair(1e-300, 801);
    let p = detection_pattern(&pair, PhaseShift::ZERO, true).unwrap();
    let r = fringe_phase_shift(&p, &p, (-3.0, 3.0));
    assert!(matches!(r, Err(Error::UnrecoverablePhase { .. })));
}

#[test]
fn pattern_converges_under_refinement() {
    let src = |axis1: GridAxis| {
        BranchSource {
            axis1,
            envelope: Envelope::Gaussian { sigma: 2.0 },
            fringe_wavenumber: 2.0,
            axis2: GridAxis::symmetric(20.0, 801).unwrap(),
            partner_sigma: 1.0,
            partner_separation: 1.5,
            c1: Complex64::new(FRAC_1_SQRT_2, 0.0),
            c2: Complex64::new(0.0, FRAC_1_SQRT_2),
        }
        .build()
        .unwrap()
    };
    let coarse_axis = GridAxis::symmetric(12.0, 801).unwrap();
    let coarse = detection_pattern(&src(coarse_axis), phase(0.3), true).unwrap();
    let fine = detection_pattern(&src(coarse_axis.refined()), phase(0.3), true).unwrap();
    let on_coarse: Vec<f64> = fine.density().iter().step_by(2).copied().collect();
    assert!(sup_diff(coarse.density(), &on_coarse) < 1e-6);
}

fn gaussian_pair(
    centers: [f64; 4],
    ks: [f64; 2],
    theta: f64,
    phases: [f64; 2],
) -> EntangledBranchPair {
    let axis = GridAxis::symmetric(10.0, 201).unwrap();
    let g = |label, c, k| ModeFunction::gaussian(axis, label, c, 1.0, k).unwrap();
    EntangledBranchPair::new(
        (g(ModeLabel::A1, centers[0], ks[0]), g(ModeLabel::D2, centers[3], 0.0)),
        (g(ModeLabel::B1, centers[1], ks[1]), g(ModeLabel::C2, centers[2], 0.0)),
        Complex64::from_polar(theta.cos(), phases[0]),
        Complex64::from_polar(theta.sin(), phases[1]),
    )
    .unwrap()
}

fn pair_strategy() -> impl Strategy<Value = EntangledBranchPair> {
    (
        prop::array::uniform4(-2.0..2.0f64),
        prop::array::uniform2(-2.0..2.0f64),
        0.1..1.4f64,
        prop::array::uniform2(0.0..6.28f64),
    )
        .prop_map(|(c, k, t, p)| gaussian_pair(c, k, t, p))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn overlap_conjugate_symmetry(pair in pair_strategy()) {
        let fg = overlap(pair.mode_1a(), pair.mode_1b()).unwrap().value();
        let gf = overlap(pair.mode_1b(), pair.mode_1a()).unwrap().value();
        prop_assert!((fg - gf.conj()).norm() < 1e-15);
        prop_assert!(fg.norm() <= 1.0 + 1e-9);
    }

    #[test]
    fn phase_covariance(pair in pair_strategy(), phi in -10.0..10.0f64) {
        let direct = detection_pattern(&pair, phase(phi), true).unwrap();
        let moved = EntangledBranchPair::new(
            (pair.mode_1a().clone(), pair.mode_2d().clone()),
            (pair.mode_1b().clone(), apply_phase(pair.mode_2c(), phase(phi))),
            pair.c1(),
            pair.c2(),
        ).unwrap();
        let base = detection_pattern(&moved, PhaseShift::ZERO, true).unwrap();
        prop_assert!(sup_diff(direct.density(), base.density()) < 1e-12);
    }

    #[test]
    fn apply_phase_rotates_overlap(pair in pair_strategy(), phi in -10.0..10.0f64) {
        let i0 = overlap(pair.mode_2d(), pair.mode_2c()).unwrap().value();
        let shifted = apply_phase(pair.mode_2c(), phase(phi));
        prop_assert!((shifted.norm_sq() - pair.mode_2c().norm_sq()).abs() < 1e-12);
        let i1 = overlap(pair.mode_2d(), &shifted).unwrap().value();
        prop_assert!((i1 - i0 * Complex64::from_polar(1.0, -phi)).norm() < 1e-12);
    }

    #[test]
    fn patterns_are_normalized_and_nonnegative(pair in pair_strategy(), phi in 0.0..6.3f64) {
        let pat = detection_pattern(&pair, phase(phi), true).unwrap();
        prop_assert!((pat.integral() - 1.0).abs() < 1e-6);
        prop_assert!(pat.density().iter().all(|&d| d >= 0.0));
    }

    #[test]
    fn reduced_density_is_hermitian_unit_trace(pair in pair_strategy(), phi in 0.0..6.3f64) {
        let rho = reduced_density(&pair, phase(phi)).unwrap();
        prop_assert!(rho.hermiticity_residual() < 1e-12);
        prop_assert!((rho.trace() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn no_interference_without_overlap(phi in -10.0..10.0f64, theta in 0.1..1.4f64) {
        let axis = GridAxis::symmetric(10.0, 201).unwrap();
        let bump = |c: f64, label| {
            ModeFunction::from_fn(axis, label, move |x| {
                let u = x - c;
                Complex64::new(if u.abs() < 2.0 { (1.0 - u * u / 4.0).powi(2) } else { 0.0 }, 0.0)
            }).unwrap().normalized().unwrap()
        };
        let g = |label, c, k| ModeFunction::gaussian(axis, label, c, 1.0, k).unwrap();
        let pair = EntangledBranchPair::new(
            (g(ModeLabel::A1, -0.5, 1.0), bump(-4.0, ModeLabel::D2)),
            (g(ModeLabel::B1, 0.5, -1.0), bump(4.0, ModeLabel::C2)),
            Complex64::new(theta.cos(), 0.0),
            Complex64::new(theta.sin(), 0.0),
        ).unwrap();
        let base = detection_pattern(&pair, PhaseShift::ZERO, true).unwrap();
        let shifted = detection_pattern(&pair, phase(phi), true).unwrap();
        prop_assert_eq!(base.density(), shifted.density());
    }
}
