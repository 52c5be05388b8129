//! Uniform 1-D grids and trapezoidal quadrature.
//!
//! Every integral in the crate goes through [`GridAxis::integrate`] or
//! [`GridAxis::integrate_complex`]. Reductions run sequentially in index order
//! so results do not depend on how the integrand was produced.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Closed interval `[x_min, x_max]` sampled at `n_points` equally spaced points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl GridAxis {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !x_min.is_finite() || !x_max.is_finite() {
            return Err(invalid("GridAxis.x_min/x_max", "bounds must be finite"));
        }
        if x_max <= x_min {
            return Err(invalid(
                "GridAxis.x_max",
                format!("x_max ({x_max}) must exceed x_min ({x_min})"),
            ));
        }
        if n_points < 2 {
            return Err(invalid("GridAxis.n_points", "need at least 2 points"));
        }
        Ok(Self {
            x_min,
            x_max,
            n_points,
        })
    }

    /// Grid symmetric about the origin.
    pub fn symmetric(half_width: f64, n_points: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n_points)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        if j + 1 == self.n_points {
            self.x_max
        } else {
            self.x_min + j as f64 * self.dx()
        }
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n_points).map(move |j| self.x(j))
    }

    /// Trapezoid weight of sample `j`.
    pub fn weight(&self, j: usize) -> f64 {
        if j == 0 || j + 1 == self.n_points {
            0.5 * self.dx()
        } else {
            self.dx()
        }
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.n_points);
        let interior: f64 = values[1..self.n_points - 1].iter().sum();
        self.dx() * (interior + 0.5 * (values[0] + values[self.n_points - 1]))
    }

    pub fn integrate_complex(&self, values: &[Complex64]) -> Complex64 {
        debug_assert_eq!(values.len(), self.n_points);
        let interior: Complex64 = values[1..self.n_points - 1].iter().sum();
        (interior + (values[0] + values[self.n_points - 1]) * 0.5) * self.dx()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }

    /// Indices of grid points inside `[lo, hi]`.
    pub fn window_indices(&self, lo: f64, hi: f64) -> Result<std::ops::RangeInclusive<usize>> {
        if !(lo < hi) || !self.contains(lo) || !self.contains(hi) {
            return Err(invalid(
                "window",
                format!(
                    "[{lo}, {hi}] must be a non-empty interval inside [{}, {}]",
                    self.x_min, self.x_max
                ),
            ));
        }
        let dx = self.dx();
        let first = ((lo - self.x_min) / dx - 1e-9).ceil().max(0.0) as usize;
        let last = (((hi - self.x_min) / dx + 1e-9).floor() as usize).min(self.n_points - 1);
        if first > last {
            return Err(invalid("window", "window contains no grid points"));
        }
        Ok(first..=last)
    }

    /// Same grid with the spacing halved (`2n - 1` points).
    pub fn refined(&self) -> Self {
        Self {
            n_points: 2 * self.n_points - 1,
            ..*self
        }
    }

    pub(crate) fn ensure_same(&self, other: &GridAxis) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::AxisMismatch(format!(
                "[{}, {}]x{} vs [{}, {}]x{}",
                self.x_min, self.x_max, self.n_points, other.x_min, other.x_max, other.n_points
            )))
        }
    }
}
