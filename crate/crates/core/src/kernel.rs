//! Free-particle and slit-constrained propagation in one dimension.
//!
//! The free kernel is
//!
//! ```text
//! K(x_f, x_i; dt) = sqrt(m / (2 pi i hbar dt)) * exp(i m (x_f - x_i)^2 / (2 hbar dt))
//! ```
//!
//! with `sqrt(1/i) = e^{-i pi/4}`. A slit at time `t_c` splits the evolution
//! into two free segments with a window applied in between; the window removes
//! amplitude, so the composed evolution loses norm.
//!
//! Two routes apply the kernel to a sampled wavefunction:
//!
//! * [`propagate_mode`] multiplies the grid spectrum by
//!   `exp(-i hbar k^2 dt / (2m))`. This is the exact action of the kernel on
//!   band-limited samples and is unitary on the grid, so norm bookkeeping
//!   around a slit is exact.
//! * [`kernel_quadrature`] sums `K(x_f, x_j) psi(x_j) w_j` directly. It is
//!   O(n^2) and only valid when the kernel phase is sampled at
//!   [`POINTS_PER_OSCILLATION`] or more points per cycle.

use std::f64::consts::{FRAC_PI_4, PI, TAU};
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::GridAxis;
use crate::mode::{ModeFunction, ModeLabel};
use crate::report::CsvTable;

/// Minimum grid points per local phase oscillation.
pub const POINTS_PER_OSCILLATION: f64 = 12.0;

/// Norm loss above which a free propagation counts as under-resolved.
pub const MAX_FREE_NORM_LOSS: f64 = 1e-3;

/// Packet half-extent, in widths, that must fit inside the axis.
const PACKET_EXTENT: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelParams {
    pub mass: f64,
    pub hbar: f64,
    pub t_i: f64,
    pub t_c: f64,
    pub t_f: f64,
}

impl KernelParams {
    pub fn new(mass: f64, hbar: f64, t_i: f64, t_c: f64, t_f: f64) -> Result<Self> {
        if !(mass > 0.0) || !mass.is_finite() {
            return Err(invalid("KernelParams.mass", "must be positive"));
        }
        if !(hbar > 0.0) || !hbar.is_finite() {
            return Err(invalid("KernelParams.hbar", "must be positive"));
        }
        if ![t_i, t_c, t_f].iter().all(|t| t.is_finite()) {
            return Err(invalid("KernelParams.t", "times must be finite"));
        }
        if !(t_i < t_c && t_c < t_f) {
            return Err(invalid(
                "KernelParams.t",
                format!("need t_i < t_c < t_f, got {t_i}, {t_c}, {t_f}"),
            ));
        }
        Ok(Self {
            mass,
            hbar,
            t_i,
            t_c,
            t_f,
        })
    }

    /// Natural units `m = hbar = 1`.
    pub fn natural(t_i: f64, t_c: f64, t_f: f64) -> Result<Self> {
        Self::new(1.0, 1.0, t_i, t_c, t_f)
    }

    pub fn duration(&self, segment: Segment) -> Result<f64> {
        let dt = match segment {
            Segment::InitialToSlit => self.t_c - self.t_i,
            Segment::SlitToFinal => self.t_f - self.t_c,
            Segment::InitialToFinal => self.t_f - self.t_i,
        };
        if dt > 0.0 {
            Ok(dt)
        } else {
            Err(Error::TimeOrder {
                segment: segment.name(),
                dt,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Segment {
    /// `t_i -> t_c`
    InitialToSlit,
    /// `t_c -> t_f`
    SlitToFinal,
    /// `t_i -> t_f`
    InitialToFinal,
}

impl Segment {
    pub fn name(&self) -> &'static str {
        match self {
            Segment::InitialToSlit => "i->c",
            Segment::SlitToFinal => "c->f",
            Segment::InitialToFinal => "i->f",
        }
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlitProfile {
    /// Indicator of `[center - b, center + b]`.
    Hard,
    /// `exp(-(x - center)^2 / (2 b^2))`.
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlitGeometry {
    pub profile: SlitProfile,
    pub half_width: f64,
    pub center: f64,
}

impl SlitGeometry {
    pub fn new(profile: SlitProfile, half_width: f64, center: f64) -> Result<Self> {
        if !(half_width > 0.0) || half_width.is_nan() {
            return Err(invalid("SlitGeometry.b", format!("half width must be > 0, got {half_width}")));
        }
        if !center.is_finite() {
            return Err(invalid("SlitGeometry.center", "must be finite"));
        }
        Ok(Self {
            profile,
            half_width,
            center,
        })
    }

    pub fn hard(half_width: f64, center: f64) -> Result<Self> {
        Self::new(SlitProfile::Hard, half_width, center)
    }

    pub fn gaussian(half_width: f64, center: f64) -> Result<Self> {
        Self::new(SlitProfile::Gaussian, half_width, center)
    }

    /// Amplitude transmission at `x`.
    pub fn window(&self, x: f64) -> f64 {
        let u = x - self.center;
        match self.profile {
            SlitProfile::Hard => {
                if u.abs() <= self.half_width {
                    1.0
                } else {
                    0.0
                }
            }
            SlitProfile::Gaussian => (-u * u / (2.0 * self.half_width * self.half_width)).exp(),
        }
    }

    /// Nominal opening `[center - b, center + b]`.
    pub fn opening(&self) -> (f64, f64) {
        (self.center - self.half_width, self.center + self.half_width)
    }
}

/// Unit-norm Gaussian `(2 pi sigma^2)^{-1/4} exp(-(x - x0)^2 / (4 sigma^2) + i k0 (x - x0))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPacket {
    pub center: f64,
    pub width: f64,
    pub wavenumber: f64,
}

impl GaussianPacket {
    pub fn new(center: f64, width: f64, wavenumber: f64) -> Result<Self> {
        if !(width > 0.0) || !width.is_finite() {
            return Err(invalid("GaussianPacket.sigma", "width must be positive"));
        }
        if !center.is_finite() || !wavenumber.is_finite() {
            return Err(invalid("GaussianPacket", "center and wavenumber must be finite"));
        }
        Ok(Self {
            center,
            width,
            wavenumber,
        })
    }

    pub fn amplitude(&self, x: f64) -> Complex64 {
        let u = x - self.center;
        let s2 = self.width * self.width;
        let norm = (2.0 * PI * s2).powf(-0.25);
        Complex64::from_polar(norm * (-u * u / (4.0 * s2)).exp(), self.wavenumber * u)
    }

    pub fn sample(&self, axis: GridAxis) -> ModeFunction {
        let samples = axis.points().map(|x| self.amplitude(x)).collect();
        ModeFunction::from_parts(axis, samples, ModeLabel::Free)
    }

    /// Position spread after free evolution for `dt`.
    pub fn width_at(&self, dt: f64, mass: f64, hbar: f64) -> f64 {
        let spread = hbar * dt / (2.0 * mass * self.width * self.width);
        self.width * (1.0 + spread * spread).sqrt()
    }

    /// Centroid after free evolution for `dt`.
    pub fn centroid_at(&self, dt: f64, mass: f64, hbar: f64) -> f64 {
        self.center + hbar * self.wavenumber * dt / mass
    }

    /// Largest wavenumber carrying non-negligible weight.
    fn max_wavenumber(&self) -> f64 {
        // amplitude spectrum has standard deviation 1/(2 sigma)
        self.wavenumber.abs() + PACKET_EXTENT / (2.0 * self.width)
    }
}

#[derive(Debug, Clone)]
pub struct PropagationResult {
    pub output: ModeFunction,
    pub input_norm_sq: f64,
    /// Wavefunction at `t_c` just after the slit window.
    pub mid_plane: ModeFunction,
    /// Probability transmitted through the window, `int |mid_plane|^2 dx` in the grid measure.
    pub transmitted: f64,
    pub output_norm_sq: f64,
}

/// `K(x_f, x_i)` for one segment.
pub fn free_kernel_value(x_f: f64, x_i: f64, params: &KernelParams, segment: Segment) -> Result<Complex64> {
    let dt = params.duration(segment)?;
    Ok(free_kernel(x_f - x_i, dt, params.mass, params.hbar))
}

fn free_kernel(dx: f64, dt: f64, mass: f64, hbar: f64) -> Complex64 {
    let modulus = (mass / (TAU * hbar * dt)).sqrt();
    let phase = mass * dx * dx / (2.0 * hbar * dt) - FRAC_PI_4;
    Complex64::from_polar(modulus, phase)
}

/// Applies the free kernel for one segment to sampled data via the grid spectrum.
pub fn propagate_mode(mode: &ModeFunction, params: &KernelParams, segment: Segment) -> Result<ModeFunction> {
    let dt = params.duration(segment)?;
    let samples = spectral_step(mode.samples(), mode.axis(), dt, params.mass, params.hbar);
    Ok(ModeFunction::from_parts(*mode.axis(), samples, mode.label()))
}

fn spectral_step(input: &[Complex64], axis: &GridAxis, dt: f64, mass: f64, hbar: f64) -> Vec<Complex64> {
    let n = input.len();
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let mut buf = input.to_vec();
    forward.process(&mut buf);
    let dk = TAU / (n as f64 * axis.dx());
    let scale = 1.0 / n as f64;
    for (j, z) in buf.iter_mut().enumerate() {
        let idx = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
        let k = idx * dk;
        *z *= Complex64::from_polar(scale, -hbar * k * k * dt / (2.0 * mass));
    }
    inverse.process(&mut buf);
    buf
}

fn check_packet_fits(packet: &GaussianPacket, axis: &GridAxis, dt: f64, params: &KernelParams) -> Result<()> {
    let k_max = packet.max_wavenumber();
    let suggested_dx = TAU / (POINTS_PER_OSCILLATION * k_max);
    if axis.dx() > suggested_dx {
        return Err(Error::GridUnderresolved {
            reason: format!(
                "packet wavenumbers up to {k_max:.3} need {POINTS_PER_OSCILLATION} points per oscillation, dx = {:.3e}",
                axis.dx()
            ),
            suggested_dx,
        });
    }
    let spread = packet.width_at(dt, params.mass, params.hbar);
    let centroid = packet.centroid_at(dt, params.mass, params.hbar);
    let extents = [
        (packet.center, packet.width),
        (centroid, spread),
    ];
    for (c, w) in extents {
        let (lo, hi) = (c - PACKET_EXTENT * w, c + PACKET_EXTENT * w);
        if lo < axis.x_min() || hi > axis.x_max() {
            return Err(invalid(
                "GridAxis",
                format!(
                    "axis [{}, {}] does not hold the packet extent [{lo:.3}, {hi:.3}]",
                    axis.x_min(),
                    axis.x_max()
                ),
            ));
        }
    }
    Ok(())
}

fn check_norm_loss(before: f64, after: f64, axis: &GridAxis) -> Result<()> {
    let loss = (before - after).abs().max((1.0 - before).abs());
    if loss > MAX_FREE_NORM_LOSS {
        return Err(Error::GridUnderresolved {
            reason: format!("norm changed by {loss:.3e} during free propagation"),
            suggested_dx: axis.dx() / 2.0,
        });
    }
    Ok(())
}

/// `dx * sum |psi_j|^2`: the norm the periodic spectral step conserves exactly.
///
/// Agrees with the trapezoid norm whenever the wavefunction vanishes at both
/// axis ends; differs when a hard window scatters amplitude to the boundary.
pub fn grid_norm_sq(mode: &ModeFunction) -> f64 {
    mode.axis().dx() * mode.samples().iter().map(|z| z.norm_sqr()).sum::<f64>()
}

/// Propagates a packet, given at the start of `segment`, to the segment's end.
pub fn propagate_free(
    packet: &GaussianPacket,
    axis: GridAxis,
    params: &KernelParams,
    segment: Segment,
) -> Result<ModeFunction> {
    let dt = params.duration(segment)?;
    check_packet_fits(packet, &axis, dt, params)?;
    let input = packet.sample(axis);
    let output = propagate_mode(&input, params, segment)?;
    check_norm_loss(grid_norm_sq(&input), grid_norm_sq(&output), &axis)?;
    Ok(output)
}

/// Free evolution `t_i -> t_c`, slit window, free evolution `t_c -> t_f`.
pub fn propagate_slit(
    packet: &GaussianPacket,
    axis: GridAxis,
    params: &KernelParams,
    slit: &SlitGeometry,
) -> Result<PropagationResult> {
    let total = params.duration(Segment::InitialToFinal)?;
    check_packet_fits(packet, &axis, total, params)?;
    let input = packet.sample(axis);
    let input_norm_sq = grid_norm_sq(&input);
    let at_slit = propagate_mode(&input, params, Segment::InitialToSlit)?;
    check_norm_loss(input_norm_sq, grid_norm_sq(&at_slit), &axis)?;

    let mid_plane = at_slit.modulate(|x| Complex64::new(slit.window(x), 0.0));
    let transmitted = grid_norm_sq(&mid_plane);
    let output = propagate_mode(&mid_plane, params, Segment::SlitToFinal)?;
    let output_norm_sq = grid_norm_sq(&output);
    Ok(PropagationResult {
        output,
        input_norm_sq,
        mid_plane,
        transmitted,
        output_norm_sq,
    })
}

/// Fractional norm loss `1 - |out|^2 / |in|^2`, clamped to `[0, 1]`.
pub fn unitarity_defect(result: &PropagationResult) -> f64 {
    (1.0 - result.output_norm_sq / result.input_norm_sq).clamp(0.0, 1.0)
}

/// Direct trapezoid evaluation of `int K(x_f, x_i) psi(x_i) dx_i` on the input axis.
///
/// Rejects grids that sample the integrand phase at fewer than
/// [`POINTS_PER_OSCILLATION`] points per cycle anywhere `psi` is significant.
pub fn kernel_quadrature(mode: &ModeFunction, params: &KernelParams, segment: Segment) -> Result<ModeFunction> {
    let dt = params.duration(segment)?;
    let axis = *mode.axis();
    let dx = axis.dx();
    let samples = mode.samples();

    let peak = samples.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let support: Vec<usize> = (0..samples.len())
        .filter(|&j| samples[j].norm() > 1e-10 * peak)
        .collect();
    let (lo, hi) = (axis.x(support[0]), axis.x(*support.last().unwrap()));
    let local_k = support
        .windows(2)
        .filter(|w| w[1] == w[0] + 1)
        .map(|w| (samples[w[1]] * samples[w[0]].conj()).arg().abs() / dx)
        .fold(0.0, f64::max);
    let reach = (axis.x_max() - lo).max(hi - axis.x_min());
    let rate = params.mass * reach / (params.hbar * dt) + local_k;
    let suggested_dx = TAU / (POINTS_PER_OSCILLATION * rate);
    if dx > suggested_dx {
        return Err(Error::GridUnderresolved {
            reason: format!("integrand phase rate {rate:.3} per unit length"),
            suggested_dx,
        });
    }

    let weights: Vec<f64> = (0..axis.len()).map(|j| axis.weight(j)).collect();
    let out: Vec<Complex64> = (0..axis.len())
        .into_par_iter()
        .map(|f| {
            let xf = axis.x(f);
            support
                .iter()
                .map(|&j| free_kernel(xf - axis.x(j), dt, params.mass, params.hbar) * samples[j] * weights[j])
                .sum()
        })
        .collect();
    Ok(ModeFunction::from_parts(axis, out, mode.label()))
}

/// Modes behind two disjoint slits, each renormalized to unit norm.
#[derive(Debug, Clone)]
pub struct DoubleSlitModes {
    pub mode_a: ModeFunction,
    pub mode_b: ModeFunction,
    /// Pre-normalization transmitted probability through slit A.
    pub transmitted_a: f64,
    pub transmitted_b: f64,
}

pub fn double_slit_modes(
    packet: &GaussianPacket,
    axis: GridAxis,
    params: &KernelParams,
    slit_a: &SlitGeometry,
    slit_b: &SlitGeometry,
) -> Result<DoubleSlitModes> {
    let (a_lo, a_hi) = slit_a.opening();
    let (b_lo, b_hi) = slit_b.opening();
    if a_lo <= b_hi && b_lo <= a_hi {
        return Err(Error::Geometry(format!(
            "slit windows [{a_lo}, {a_hi}] and [{b_lo}, {b_hi}] overlap"
        )));
    }
    let a = propagate_slit(packet, axis, params, slit_a)?;
    let b = propagate_slit(packet, axis, params, slit_b)?;
    Ok(DoubleSlitModes {
        transmitted_a: a.transmitted,
        transmitted_b: b.transmitted,
        mode_a: a.output.normalized()?.with_label(ModeLabel::A1),
        mode_b: b.output.normalized()?.with_label(ModeLabel::B1),
    })
}

/// One row of a slit-width sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefectRow {
    pub half_width: f64,
    pub transmitted: f64,
    pub defect: f64,
}

pub fn defect_sweep(
    packet: &GaussianPacket,
    axis: GridAxis,
    params: &KernelParams,
    profile: SlitProfile,
    center: f64,
    half_widths: &[f64],
) -> Result<Vec<DefectRow>> {
    half_widths
        .iter()
        .map(|&b| {
            let slit = SlitGeometry::new(profile, b, center)?;
            let r = propagate_slit(packet, axis, params, &slit)?;
            Ok(DefectRow {
                half_width: b,
                transmitted: r.transmitted / r.input_norm_sq,
                defect: unitarity_defect(&r),
            })
        })
        .collect()
}

/// CSV with columns `b,transmitted,defect`.
pub fn defect_table(rows: &[DefectRow]) -> CsvTable {
    let mut t = CsvTable::new(&["b", "transmitted", "defect"]);
    for r in rows {
        t.push_floats(&[r.half_width, r.transmitted, r.defect]);
    }
    t
}
