//! Entangled two-branch states and the one-particle detection pattern.
//!
//! The two-particle state is
//!
//! ```text
//! Psi(x1, x2) = c1 * psi_1A(x1) psi_2D(x2) + c2 * psi_1B(x1) psi_2C(x2)
//! ```
//!
//! Tracing out particle 2 leaves a particle-1 density whose interference term
//! is weighted by the overlap `I = <psi_2C | psi_2D>`. A phase applied to
//! `psi_2C` shows up as a shift of that term, which is the whole signaling
//! mechanism this module reproduces.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use nalgebra::{DMatrix, Matrix3, Vector3};
use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::grid::GridAxis;
use crate::mode::{ModeFunction, ModeLabel, NORM_TOLERANCE};
use crate::report::{sig17, CsvTable};

/// Densities in `(-NEGATIVE_CLAMP, 0)` are round-off and get clamped to zero.
pub const NEGATIVE_CLAMP: f64 = 1e-12;

/// Minimum fringe contrast for phase recovery.
pub const MIN_RECOVERABLE_VISIBILITY: f64 = 1e-3;

/// Scalar product `int f g* dx` of two unit-normalized modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapScalar(Complex64);

impl OverlapScalar {
    pub fn value(&self) -> Complex64 {
        self.0
    }

    pub fn modulus(&self) -> f64 {
        self.0.norm()
    }

    pub fn phase(&self) -> f64 {
        self.0.arg()
    }
}

/// Phase `phi` imprinted on the slit-C branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseShift(f64);

impl PhaseShift {
    pub const ZERO: PhaseShift = PhaseShift(0.0);

    pub fn new(phi: f64) -> Result<Self> {
        if phi.is_finite() {
            Ok(Self(phi))
        } else {
            Err(invalid("PhaseShift.phi", "phase must be finite"))
        }
    }

    pub fn radians(&self) -> f64 {
        self.0
    }

    /// Representative in `[0, 2pi)`.
    pub fn canonical(&self) -> f64 {
        canonical_angle(self.0)
    }

    pub fn factor(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.0)
    }
}

pub(crate) fn canonical_angle(phi: f64) -> f64 {
    let r = phi.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Computes `int f(x) g*(x) dx` by the trapezoid rule.
pub fn overlap(f: &ModeFunction, g: &ModeFunction) -> Result<OverlapScalar> {
    f.axis().ensure_same(g.axis())?;
    f.ensure_normalized()?;
    g.ensure_normalized()?;
    Ok(OverlapScalar(raw_overlap(f, g)))
}

fn raw_overlap(f: &ModeFunction, g: &ModeFunction) -> Complex64 {
    let prod: Vec<Complex64> = f
        .samples()
        .iter()
        .zip(g.samples())
        .map(|(a, b)| a * b.conj())
        .collect();
    f.axis().integrate_complex(&prod)
}

/// `psi -> e^{i phi} psi`.
pub fn apply_phase(mode: &ModeFunction, shift: PhaseShift) -> ModeFunction {
    let factor = shift.factor();
    mode.modulate(|_| factor)
}

/// Two-branch entangled state of particles 1 and 2.
#[derive(Debug, Clone)]
pub struct EntangledBranchPair {
    mode_1a: ModeFunction,
    mode_2d: ModeFunction,
    mode_1b: ModeFunction,
    mode_2c: ModeFunction,
    c1: Complex64,
    c2: Complex64,
    /// `int psi_2D psi_2C* dx`.
    overlap_i: Complex64,
    /// `int psi_1A psi_1B* dx`.
    overlap_j: Complex64,
}

impl EntangledBranchPair {
    /// Builds `c1 |1A>|2D> + c2 |1B>|2C>`.
    pub fn new(
        branch1: (ModeFunction, ModeFunction),
        branch2: (ModeFunction, ModeFunction),
        c1: Complex64,
        c2: Complex64,
    ) -> Result<Self> {
        let (mode_1a, mode_2d) = branch1;
        let (mode_1b, mode_2c) = branch2;
        if !(c1.re.is_finite() && c1.im.is_finite() && c2.re.is_finite() && c2.im.is_finite()) {
            return Err(invalid("EntangledBranchPair.c1/c2", "coefficients must be finite"));
        }
        let weight = c1.norm_sqr() + c2.norm_sqr();
        if (weight - 1.0).abs() > 1e-12 {
            return Err(invalid(
                "EntangledBranchPair.c1/c2",
                format!("|c1|^2 + |c2|^2 = {weight}, expected 1"),
            ));
        }
        mode_1a.axis().ensure_same(mode_1b.axis())?;
        mode_2c.axis().ensure_same(mode_2d.axis())?;
        for m in [&mode_1a, &mode_1b, &mode_2c, &mode_2d] {
            m.ensure_normalized()?;
        }
        let pair = Self {
            overlap_i: raw_overlap(&mode_2d, &mode_2c),
            overlap_j: raw_overlap(&mode_1a, &mode_1b),
            mode_1a: mode_1a.with_label(ModeLabel::A1),
            mode_2d: mode_2d.with_label(ModeLabel::D2),
            mode_1b: mode_1b.with_label(ModeLabel::B1),
            mode_2c: mode_2c.with_label(ModeLabel::C2),
            c1,
            c2,
        };
        pair.norm_sq_with(Complex64::new(1.0, 0.0))?;
        Ok(pair)
    }

    /// Equal-weight state with `c1 = c2 = 1/sqrt(2)`.
    pub fn maximally_entangled(
        mode_1a: ModeFunction,
        mode_2d: ModeFunction,
        mode_1b: ModeFunction,
        mode_2c: ModeFunction,
    ) -> Result<Self> {
        let c = Complex64::new(FRAC_1_SQRT_2, 0.0);
        Self::new((mode_1a, mode_2d), (mode_1b, mode_2c), c, c)
    }

    pub fn mode_1a(&self) -> &ModeFunction {
        &self.mode_1a
    }

    pub fn mode_1b(&self) -> &ModeFunction {
        &self.mode_1b
    }

    pub fn mode_2c(&self) -> &ModeFunction {
        &self.mode_2c
    }

    pub fn mode_2d(&self) -> &ModeFunction {
        &self.mode_2d
    }

    pub fn c1(&self) -> Complex64 {
        self.c1
    }

    pub fn c2(&self) -> Complex64 {
        self.c2
    }

    /// `I = int psi_2D psi_2C* dx`.
    pub fn overlap_i(&self) -> OverlapScalar {
        OverlapScalar(self.overlap_i)
    }

    /// `J = int psi_1A psi_1B* dx`.
    pub fn overlap_j(&self) -> OverlapScalar {
        OverlapScalar(self.overlap_j)
    }

    pub fn particle1_axis(&self) -> &GridAxis {
        self.mode_1a.axis()
    }

    pub fn particle2_axis(&self) -> &GridAxis {
        self.mode_2c.axis()
    }

    /// Same state with `psi_2C` replaced by `e^{i phi} psi_2C`.
    pub fn with_phase(&self, shift: PhaseShift) -> Self {
        Self {
            mode_2c: apply_phase(&self.mode_2c, shift),
            overlap_i: self.overlap_i * shift.factor().conj(),
            ..self.clone()
        }
    }

    /// Norm squared with `I` multiplied by `phase` (the conjugated phase element).
    fn norm_sq_with(&self, phase: Complex64) -> Result<f64> {
        let cross = self.c1 * self.c2.conj() * self.overlap_j * self.overlap_i * phase;
        let norm_sq = self.c1.norm_sqr() + self.c2.norm_sqr() + 2.0 * cross.re;
        if norm_sq <= NORM_TOLERANCE || !norm_sq.is_finite() {
            return Err(Error::DegenerateState { norm_sq });
        }
        Ok(norm_sq)
    }
}

/// `sqrt(|c1|^2 + |c2|^2 + 2 Re(c1 c2* J I))`.
pub fn state_norm(pair: &EntangledBranchPair) -> Result<f64> {
    pair.norm_sq_with(Complex64::new(1.0, 0.0)).map(f64::sqrt)
}

/// Split of a pattern into its branch background and complex fringe term.
///
/// `density = background + Re(interference)` pointwise, in the same
/// normalization as the owning pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct FringeComponents {
    pub background: Vec<f64>,
    pub interference: Vec<Complex64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionPattern {
    axis: GridAxis,
    density: Vec<f64>,
    normalized: bool,
    components: Option<FringeComponents>,
}

impl DetectionPattern {
    /// Wraps an externally produced density (no fringe decomposition).
    pub fn new(axis: GridAxis, density: Vec<f64>, normalized: bool) -> Result<Self> {
        if density.len() != axis.len() {
            return Err(invalid("DetectionPattern.density", "length differs from axis"));
        }
        let density = clamp_density(&axis, density)?;
        let pattern = Self {
            axis,
            density,
            normalized,
            components: None,
        };
        if normalized && (pattern.integral() - 1.0).abs() > 1e-6 {
            return Err(invalid(
                "DetectionPattern.density",
                format!("flagged normalized but integrates to {}", pattern.integral()),
            ));
        }
        Ok(pattern)
    }

    pub fn axis(&self) -> &GridAxis {
        &self.axis
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn components(&self) -> Option<&FringeComponents> {
        self.components.as_ref()
    }

    pub fn integral(&self) -> f64 {
        self.axis.integrate(&self.density)
    }

    /// Piecewise-linear interpolation; zero outside the axis.
    pub fn density_at(&self, x: f64) -> f64 {
        if !self.axis.contains(x) {
            return 0.0;
        }
        let u = (x - self.axis.x_min()) / self.axis.dx();
        let j = (u.floor() as usize).min(self.axis.len() - 2);
        let t = u - j as f64;
        self.density[j] * (1.0 - t) + self.density[j + 1] * t
    }

    /// CSV with columns `x,density`.
    pub fn to_csv(&self) -> String {
        let mut table = CsvTable::new(&["x", "density"]);
        for (x, d) in self.axis.points().zip(&self.density) {
            table.push(vec![sig17(x), sig17(*d)]);
        }
        table.render()
    }
}

fn clamp_density(axis: &GridAxis, mut density: Vec<f64>) -> Result<Vec<f64>> {
    for (j, d) in density.iter_mut().enumerate() {
        if !d.is_finite() || *d <= -NEGATIVE_CLAMP {
            return Err(Error::NegativeDensity {
                x: axis.x(j),
                value: *d,
            });
        }
        if *d < 0.0 {
            *d = 0.0;
        }
    }
    Ok(density)
}

/// Particle-1 detection density with the phase element `shift` on slit C.
pub fn detection_pattern(
    pair: &EntangledBranchPair,
    shift: PhaseShift,
    normalize: bool,
) -> Result<DetectionPattern> {
    let w1 = pair.c1.norm_sqr();
    let w2 = pair.c2.norm_sqr();
    let cross = 2.0 * pair.c1 * pair.c2.conj() * shift.factor().conj() * pair.overlap_i;
    let scale = if normalize {
        pair.norm_sq_with(shift.factor().conj())?.recip()
    } else {
        1.0
    };

    let axis = *pair.particle1_axis();
    let n = axis.len();
    let mut background = Vec::with_capacity(n);
    let mut interference = Vec::with_capacity(n);
    let mut density = Vec::with_capacity(n);
    for (a, b) in pair.mode_1a.samples().iter().zip(pair.mode_1b.samples()) {
        let bg = (w1 * a.norm_sqr() + w2 * b.norm_sqr()) * scale;
        let z = cross * a * b.conj() * scale;
        background.push(bg);
        interference.push(z);
        density.push(bg + z.re);
    }
    let density = clamp_density(&axis, density)?;
    Ok(DetectionPattern {
        axis,
        density,
        normalized: normalize,
        components: Some(FringeComponents {
            background,
            interference,
        }),
    })
}

/// Particle-1 reduced density matrix `rho(x, x')` sampled on the grid.
#[derive(Debug, Clone)]
pub struct ReducedDensity {
    axis: GridAxis,
    matrix: DMatrix<Complex64>,
}

impl ReducedDensity {
    pub fn axis(&self) -> &GridAxis {
        &self.axis
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.axis.len()).map(|j| self.matrix[(j, j)].re).collect()
    }

    /// `int rho(x, x) dx`.
    pub fn trace(&self) -> f64 {
        self.axis.integrate(&self.diagonal())
    }

    /// `max |rho - rho^dagger|`.
    pub fn hermiticity_residual(&self) -> f64 {
        let n = self.axis.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..=i {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues of the quadrature-weighted operator `W^1/2 rho W^1/2`,
    /// sorted descending. These sum to [`trace`](Self::trace).
    pub fn eigenvalues(&self) -> Vec<f64> {
        let n = self.axis.len();
        let sqrt_w: Vec<f64> = (0..n).map(|j| self.axis.weight(j).sqrt()).collect();
        let weighted = DMatrix::from_fn(n, n, |i, j| self.matrix[(i, j)] * sqrt_w[i] * sqrt_w[j]);
        // symmetrize away round-off before the Hermitian solver
        let herm = (&weighted + weighted.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| b.total_cmp(a));
        ev
    }
}

/// Full `rho_1(x, x')` of the normalized state, including the `I` and `I*` cross terms.
pub fn reduced_density(pair: &EntangledBranchPair, shift: PhaseShift) -> Result<ReducedDensity> {
    let scale = pair.norm_sq_with(shift.factor().conj())?.recip();
    let w1 = pair.c1.norm_sqr() * scale;
    let w2 = pair.c2.norm_sqr() * scale;
    let cross = pair.c1 * pair.c2.conj() * shift.factor().conj() * pair.overlap_i * scale;
    let a = pair.mode_1a.samples();
    let b = pair.mode_1b.samples();
    let n = a.len();
    let mut matrix = DMatrix::from_fn(n, n, |i, j| {
        a[i] * a[j].conj() * w1
            + b[i] * b[j].conj() * w2
            + cross * a[i] * b[j].conj()
            + cross.conj() * b[i] * a[j].conj()
    });
    // the diagonal is real by construction; drop the round-off imaginary part
    for j in 0..n {
        matrix[(j, j)].im = 0.0;
    }
    Ok(ReducedDensity {
        axis: *pair.particle1_axis(),
        matrix,
    })
}

/// Fringe contrast `(max - min) / (max + min)` over the window.
pub fn visibility(pattern: &DetectionPattern, window: (f64, f64)) -> Result<f64> {
    let range = pattern.axis.window_indices(window.0, window.1)?;
    let slice = &pattern.density[range];
    let max = slice.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = slice.iter().copied().fold(f64::INFINITY, f64::min);
    if max + min <= 0.0 {
        return Err(Error::UndefinedVisibility);
    }
    Ok(((max - min) / (max + min)).clamp(0.0, 1.0))
}

/// Local fringe contrast `max |interference| / background` over the window,
/// read from the pattern's decomposition.
pub fn fringe_contrast(pattern: &DetectionPattern, window: (f64, f64)) -> Result<f64> {
    let comps = pattern.components.as_ref().ok_or(Error::MissingComponents)?;
    let range = pattern.axis.window_indices(window.0, window.1)?;
    Ok(range
        .filter(|&j| comps.background[j] > 0.0)
        .map(|j| comps.interference[j].norm() / comps.background[j])
        .fold(0.0, f64::max))
}

/// Recovers the phase offset of `shifted` relative to `reference`, in `[0, 2pi)`.
///
/// The reference pattern acts as calibration: its background `a(x)` and fringe
/// term `b(x) e^{i theta(x)}` define a three-column design, and the shifted
/// density is fitted as `k a + C b cos(theta) + S b sin(theta)`. Then
/// `phi = atan2(S, C)`; the free scale `k` absorbs any change of normalization.
pub fn fringe_phase_shift(
    reference: &DetectionPattern,
    shifted: &DetectionPattern,
    window: (f64, f64),
) -> Result<f64> {
    reference.axis.ensure_same(&shifted.axis)?;
    let contrast = fringe_contrast(reference, window)?;
    if contrast < MIN_RECOVERABLE_VISIBILITY {
        return Err(Error::UnrecoverablePhase {
            visibility: contrast,
        });
    }
    let comps = reference.components.as_ref().ok_or(Error::MissingComponents)?;
    let range = reference.axis.window_indices(window.0, window.1)?;

    let mut normal = Matrix3::<f64>::zeros();
    let mut rhs = Vector3::<f64>::zeros();
    for j in range {
        let row = Vector3::new(
            comps.background[j],
            comps.interference[j].re,
            comps.interference[j].im,
        );
        normal += row * row.transpose();
        rhs += row * shifted.density[j];
    }
    let coef = normal
        .cholesky()
        .map(|c| c.solve(&rhs))
        .ok_or(Error::UnrecoverablePhase {
            visibility: contrast,
        })?;
    Ok(canonical_angle(coef[2].atan2(coef[1])))
}
