//! Sampled one-particle branch wavefunctions.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::grid::GridAxis;

/// Tolerance on `|norm^2 - 1|` for a mode to count as unit-normalized.
pub const NORM_TOLERANCE: f64 = 1e-9;

/// Which branch amplitude a mode stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModeLabel {
    /// Particle 1 through slit A.
    A1,
    /// Particle 1 through slit B.
    B1,
    /// Particle 2 through slit C.
    C2,
    /// Particle 2 through slit D.
    D2,
    Free,
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModeLabel::A1 => "1A",
            ModeLabel::B1 => "1B",
            ModeLabel::C2 => "2C",
            ModeLabel::D2 => "2D",
            ModeLabel::Free => "free",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModeFunction {
    axis: GridAxis,
    samples: Vec<Complex64>,
    label: ModeLabel,
}

impl ModeFunction {
    /// Wraps samples, rejecting non-finite values and identically-zero modes.
    pub fn new(axis: GridAxis, samples: Vec<Complex64>, label: ModeLabel) -> Result<Self> {
        if samples.len() != axis.len() {
            return Err(invalid(
                "ModeFunction.samples",
                format!("{} samples for a {}-point axis", samples.len(), axis.len()),
            ));
        }
        if let Some(j) = samples.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(invalid(
                "ModeFunction.samples",
                format!("non-finite sample at index {j}"),
            ));
        }
        let mode = Self {
            axis,
            samples,
            label,
        };
        if mode.norm_sq() <= 0.0 {
            return Err(invalid("ModeFunction.samples", "mode has zero norm"));
        }
        Ok(mode)
    }

    pub fn from_fn(axis: GridAxis, label: ModeLabel, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let samples = axis.points().map(f).collect();
        Self::new(axis, samples, label)
    }

    /// Gaussian envelope of width `sigma` centred at `center` times `exp(i k (x - center))`,
    /// normalized on the grid.
    pub fn gaussian(
        axis: GridAxis,
        label: ModeLabel,
        center: f64,
        sigma: f64,
        wavenumber: f64,
    ) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(invalid("ModeFunction.sigma", "width must be positive"));
        }
        Self::from_fn(axis, label, |x| {
            let u = x - center;
            Complex64::from_polar((-u * u / (4.0 * sigma * sigma)).exp(), wavenumber * u)
        })?
        .normalized()
    }

    pub fn axis(&self) -> &GridAxis {
        &self.axis
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn label(&self) -> ModeLabel {
        self.label
    }

    pub fn with_label(mut self, label: ModeLabel) -> Self {
        self.label = label;
        self
    }

    pub fn norm_sq(&self) -> f64 {
        let dens: Vec<f64> = self.samples.iter().map(|z| z.norm_sqr()).collect();
        self.axis.integrate(&dens)
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sq() - 1.0).abs() <= NORM_TOLERANCE
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm_sq();
        if !(n > 0.0) || !n.is_finite() {
            return Err(invalid("ModeFunction.samples", "cannot normalize a zero-norm mode"));
        }
        let scale = n.sqrt().recip();
        for z in &mut self.samples {
            *z *= scale;
        }
        Ok(self)
    }

    pub(crate) fn ensure_normalized(&self) -> Result<()> {
        let norm_sq = self.norm_sq();
        if (norm_sq - 1.0).abs() <= NORM_TOLERANCE {
            Ok(())
        } else {
            Err(Error::NotNormalized {
                label: self.label.to_string(),
                norm_sq,
            })
        }
    }

    /// Polar amplitude `R(x) = |psi(x)|`.
    pub fn amplitude(&self) -> Vec<f64> {
        self.samples.iter().map(|z| z.norm()).collect()
    }

    /// Polar phase `arg psi(x)` in `(-pi, pi]`.
    pub fn phase(&self) -> Vec<f64> {
        self.samples.iter().map(|z| z.arg()).collect()
    }

    /// Linear combination `a * self + b * other` on a shared axis.
    pub fn combine(&self, a: Complex64, other: &ModeFunction, b: Complex64) -> Result<Self> {
        self.axis.ensure_same(&other.axis)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(f, g)| a * f + b * g)
            .collect();
        Ok(Self {
            axis: self.axis,
            samples,
            label: self.label,
        })
    }

    /// Multiplies every sample by `f(x)`.
    pub fn modulate(&self, f: impl Fn(f64) -> Complex64) -> Self {
        let samples = self
            .axis
            .points()
            .zip(&self.samples)
            .map(|(x, z)| z * f(x))
            .collect();
        Self {
            axis: self.axis,
            samples,
            label: self.label,
        }
    }

    /// CSV with columns `x,re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,re,im\n");
        for (x, z) in self.axis.points().zip(&self.samples) {
            out.push_str(&format!(
                "{},{},{}\n",
                crate::report::sig17(x),
                crate::report::sig17(z.re),
                crate::report::sig17(z.im)
            ));
        }
        out
    }

    pub(crate) fn from_parts(axis: GridAxis, samples: Vec<Complex64>, label: ModeLabel) -> Self {
        debug_assert_eq!(axis.len(), samples.len());
        Self {
            axis,
            samples,
            label,
        }
    }
}
