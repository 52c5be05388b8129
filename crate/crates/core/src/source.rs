//! Analytic branch modes for building entangled pairs.
//!
//! Particle 1 gets two counter-propagating plane waves under a shared
//! envelope, so its branches interfere with fringe wavenumber `2k`. Particle 2
//! gets two displaced Gaussians whose overlap sets the fringe contrast:
//! `I = exp(-d^2 / (8 sigma^2))` for separation `d`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::grid::GridAxis;
use crate::mode::{ModeFunction, ModeLabel};
use crate::state::EntangledBranchPair;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Envelope {
    /// `exp(-x^2 / (4 sigma^2))`
    Gaussian { sigma: f64 },
    /// `exp(-(x / w)^8)`: flat over most of `[-w, w]`.
    FlatTop { half_width: f64 },
}

impl Envelope {
    fn eval(&self, x: f64) -> f64 {
        match *self {
            Envelope::Gaussian { sigma } => (-x * x / (4.0 * sigma * sigma)).exp(),
            Envelope::FlatTop { half_width } => (-(x / half_width).powi(8)).exp(),
        }
    }

    fn validate(&self) -> Result<()> {
        let w = match *self {
            Envelope::Gaussian { sigma } => sigma,
            Envelope::FlatTop { half_width } => half_width,
        };
        if w > 0.0 && w.is_finite() {
            Ok(())
        } else {
            Err(invalid("Envelope.width", "must be positive"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchSource {
    pub axis1: GridAxis,
    pub envelope: Envelope,
    /// Plane-wave wavenumber of branch 1A; branch 1B uses `-k`.
    pub fringe_wavenumber: f64,
    pub axis2: GridAxis,
    pub partner_sigma: f64,
    /// Distance between the slit-C and slit-D Gaussians.
    pub partner_separation: f64,
    pub c1: Complex64,
    pub c2: Complex64,
}

impl BranchSource {
    /// Maximally entangled source with the given particle-2 overlap `|I|` in `(0, 1]`.
    pub fn with_overlap(
        axis1: GridAxis,
        envelope: Envelope,
        fringe_wavenumber: f64,
        axis2: GridAxis,
        partner_sigma: f64,
        overlap: f64,
    ) -> Result<Self> {
        let c = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Ok(Self {
            axis1,
            envelope,
            fringe_wavenumber,
            axis2,
            partner_sigma,
            partner_separation: separation_for_overlap(partner_sigma, overlap)?,
            c1: c,
            c2: c,
        })
    }

    pub fn build(&self) -> Result<EntangledBranchPair> {
        self.envelope.validate()?;
        if !(self.partner_sigma > 0.0) {
            return Err(invalid("BranchSource.partner_sigma", "must be positive"));
        }
        if !(self.partner_separation >= 0.0) {
            return Err(invalid("BranchSource.partner_separation", "must be non-negative"));
        }
        let env = self.envelope;
        let k = self.fringe_wavenumber;
        let a = ModeFunction::from_fn(self.axis1, ModeLabel::A1, |x| {
            Complex64::from_polar(env.eval(x), k * x)
        })?
        .normalized()?;
        let b = ModeFunction::from_fn(self.axis1, ModeLabel::B1, |x| {
            Complex64::from_polar(env.eval(x), -k * x)
        })?
        .normalized()?;
        let half = self.partner_separation / 2.0;
        let d = ModeFunction::gaussian(self.axis2, ModeLabel::D2, -half, self.partner_sigma, 0.0)?;
        let c = ModeFunction::gaussian(self.axis2, ModeLabel::C2, half, self.partner_sigma, 0.0)?;
        EntangledBranchPair::new((a, d), (b, c), self.c1, self.c2)
    }
}

/// Separation `d` with `exp(-d^2 / (8 sigma^2)) = overlap`.
pub fn separation_for_overlap(sigma: f64, overlap: f64) -> Result<f64> {
    if !(overlap > 0.0 && overlap <= 1.0) {
        return Err(invalid("BranchSource.overlap", format!("must lie in (0, 1], got {overlap}")));
    }
    Ok((-8.0 * sigma * sigma * overlap.ln()).max(0.0).sqrt())
}
