//! Emission-rate condition for superluminal readout, and the readout budget.
//!
//! Reading a phase from `N` detections within the light-crossing time `L/c`
//! requires pairs to be emitted at mean interval `tau < L / (N c)`. The
//! detection window is modelled as `T = N tau`.
//!
//! The budget `N` itself is estimated by Monte Carlo: positions are drawn
//! from the pattern for the true phase and classified by maximum likelihood
//! over the alphabet `{0, pi}`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::report::{CsvTable, JsonObject};
use crate::state::DetectionPattern;

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// `L / (N c)`, the largest mean emission interval that still allows signaling.
pub fn threshold_tau(length: f64, n: u64, c: f64) -> Result<f64> {
    if !(length > 0.0) || !length.is_finite() {
        return Err(invalid("TimingScenario.L", format!("must be positive, got {length}")));
    }
    if n < 1 {
        return Err(invalid("TimingScenario.N", "must be at least 1"));
    }
    if !(c > 0.0) || !c.is_finite() {
        return Err(invalid("TimingScenario.c", format!("must be positive, got {c}")));
    }
    Ok(length / (n as f64 * c))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingScenario {
    /// Mean interval between pair emissions, seconds.
    pub tau: f64,
    /// Distance from the phase element to detector 1, metres.
    pub length: f64,
    pub n: u64,
    pub c: f64,
}

impl TimingScenario {
    pub fn new(tau: f64, length: f64, n: u64, c: f64) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(invalid("TimingScenario.tau", format!("must be positive, got {tau}")));
        }
        threshold_tau(length, n, c)?;
        Ok(Self { tau, length, n, c })
    }

    /// Expected first-to-last arrival delay of the `N` detections.
    pub fn arrival_window(&self) -> f64 {
        self.n as f64 * self.tau
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub threshold_s: f64,
    pub feasible: bool,
    /// `tau / threshold`; below 1 exactly when feasible.
    pub margin: f64,
}

impl TimingReport {
    /// JSON with keys `threshold_s`, `feasible`, `margin` in that order.
    pub fn to_json(&self) -> String {
        JsonObject::new()
            .float("threshold_s", self.threshold_s)
            .field("feasible", self.feasible)
            .float("margin", self.margin)
            .render()
    }
}

pub fn evaluate(scenario: &TimingScenario) -> Result<TimingReport> {
    if !(scenario.tau > 0.0) || !scenario.tau.is_finite() {
        return Err(invalid("TimingScenario.tau", "must be positive"));
    }
    let threshold_s = threshold_tau(scenario.length, scenario.n, scenario.c)?;
    let margin = scenario.tau / threshold_s;
    Ok(TimingReport {
        threshold_s,
        feasible: margin < 1.0,
        margin,
    })
}

/// Phase alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Symbol {
    Zero,
    Pi,
}

impl Symbol {
    pub fn other(self) -> Symbol {
        match self {
            Symbol::Zero => Symbol::Pi,
            Symbol::Pi => Symbol::Zero,
        }
    }

    pub fn radians(self) -> f64 {
        match self {
            Symbol::Zero => 0.0,
            Symbol::Pi => std::f64::consts::PI,
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Symbol::Zero => "0",
            Symbol::Pi => "pi",
        })
    }
}

/// Inverse-CDF sampler for a piecewise-linear density.
#[derive(Debug, Clone)]
struct Sampler {
    x_min: f64,
    dx: f64,
    density: Vec<f64>,
    cumulative: Vec<f64>,
}

impl Sampler {
    fn new(pattern: &DetectionPattern) -> Result<Self> {
        let axis = pattern.axis();
        let total = pattern.integral();
        if !(total > 0.0) {
            return Err(invalid("ReadoutExperiment.pattern", "density integrates to zero"));
        }
        let dx = axis.dx();
        let density: Vec<f64> = pattern.density().iter().map(|d| d / total).collect();
        let mut cumulative = Vec::with_capacity(density.len());
        let mut acc = 0.0;
        cumulative.push(0.0);
        for w in density.windows(2) {
            acc += 0.5 * (w[0] + w[1]) * dx;
            cumulative.push(acc);
        }
        Ok(Self {
            x_min: axis.x_min(),
            dx,
            density,
            cumulative,
        })
    }

    fn sample(&self, u: f64) -> f64 {
        let total = *self.cumulative.last().unwrap();
        let target = u * total;
        let j = match self.cumulative.partition_point(|&c| c <= target) {
            0 => 0,
            p => (p - 1).min(self.density.len() - 2),
        };
        let rest = target - self.cumulative[j];
        let p0 = self.density[j];
        let slope = (self.density[j + 1] - p0) / self.dx;
        // solve p0 s + slope s^2 / 2 = rest in the stable form
        let s = if rest <= 0.0 {
            0.0
        } else {
            let disc = (p0 * p0 + 2.0 * slope * rest).max(0.0).sqrt();
            2.0 * rest / (p0 + disc)
        };
        self.x_min + (j as f64 + (s / self.dx).clamp(0.0, 1.0)) * self.dx
    }

    fn log_density(&self, x: f64) -> f64 {
        let u = (x - self.x_min) / self.dx;
        if u < 0.0 || u > (self.density.len() - 1) as f64 {
            return f64::NEG_INFINITY;
        }
        let j = (u.floor() as usize).min(self.density.len() - 2);
        let t = u - j as f64;
        (self.density[j] * (1.0 - t) + self.density[j + 1] * t).ln()
    }
}

/// Two fringe patterns for the alphabet `{0, pi}` plus the search settings.
#[derive(Debug, Clone)]
pub struct ReadoutExperiment {
    pattern_zero: DetectionPattern,
    pattern_pi: DetectionPattern,
    sampler_zero: Sampler,
    sampler_pi: Sampler,
    pub confidence: f64,
    pub seed: u64,
    pub max_n: usize,
    pub trials: usize,
}

pub const DEFAULT_CONFIDENCE: f64 = 0.99;
pub const DEFAULT_TRIALS: usize = 10_000;

impl ReadoutExperiment {
    pub fn new(
        pattern_zero: DetectionPattern,
        pattern_pi: DetectionPattern,
        confidence: f64,
        seed: u64,
        max_n: usize,
    ) -> Result<Self> {
        pattern_zero.axis().ensure_same(pattern_pi.axis())?;
        if !pattern_zero.is_normalized() || !pattern_pi.is_normalized() {
            return Err(invalid("ReadoutExperiment.pattern", "patterns must be normalized"));
        }
        if !(confidence > 0.5 && confidence < 1.0) {
            return Err(invalid(
                "ReadoutExperiment.confidence",
                format!("must lie in (0.5, 1), got {confidence}"),
            ));
        }
        if max_n < 1 {
            return Err(invalid("ReadoutExperiment.max_n", "must be at least 1"));
        }
        Ok(Self {
            sampler_zero: Sampler::new(&pattern_zero)?,
            sampler_pi: Sampler::new(&pattern_pi)?,
            pattern_zero,
            pattern_pi,
            confidence,
            seed,
            max_n,
            trials: DEFAULT_TRIALS,
        })
    }

    pub fn with_trials(mut self, trials: usize) -> Result<Self> {
        if trials < 1 {
            return Err(invalid("ReadoutExperiment.trials", "must be at least 1"));
        }
        self.trials = trials;
        Ok(self)
    }

    /// Same experiment with the alphabet labels exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            pattern_zero: self.pattern_pi.clone(),
            pattern_pi: self.pattern_zero.clone(),
            sampler_zero: self.sampler_pi.clone(),
            sampler_pi: self.sampler_zero.clone(),
            ..self.clone()
        }
    }

    pub fn pattern(&self, symbol: Symbol) -> &DetectionPattern {
        match symbol {
            Symbol::Zero => &self.pattern_zero,
            Symbol::Pi => &self.pattern_pi,
        }
    }

    fn sampler(&self, symbol: Symbol) -> &Sampler {
        match symbol {
            Symbol::Zero => &self.sampler_zero,
            Symbol::Pi => &self.sampler_pi,
        }
    }

    fn ensure_readable(&self) -> Result<()> {
        let a = &self.sampler_zero.density;
        let b = &self.sampler_pi.density;
        let scale = a.iter().chain(b).copied().fold(0.0, f64::max);
        let diff = a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        if diff <= 1e-12 * scale {
            Err(Error::UnreadablePhase)
        } else {
            Ok(())
        }
    }

    /// Uniform draws for one trial: stream `trial` of the seeded generator.
    fn trial_rng(&self, trial: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial);
        rng
    }

    fn classify(&self, truth: Symbol, n: usize, trial: u64) -> Symbol {
        let mut rng = self.trial_rng(trial);
        let source = self.sampler(truth);
        let (mut ll_zero, mut ll_pi) = (0.0, 0.0);
        for _ in 0..n {
            let x = source.sample(rng.random::<f64>());
            ll_zero += self.sampler_zero.log_density(x);
            ll_pi += self.sampler_pi.log_density(x);
        }
        if ll_pi > ll_zero {
            Symbol::Pi
        } else {
            Symbol::Zero
        }
    }

    /// Fractions of trials decoded correctly for `(0, pi)`.
    pub fn accuracy(&self, n: usize) -> Result<(f64, f64)> {
        self.ensure_readable()?;
        let hits = |truth: Symbol| -> usize {
            (0..self.trials as u64)
                .into_par_iter()
                .filter(|&t| self.classify(truth, n, t) == truth)
                .count()
        };
        let total = self.trials as f64;
        Ok((hits(Symbol::Zero) as f64 / total, hits(Symbol::Pi) as f64 / total))
    }
}

/// Decodes one trial of `n` detections drawn from the pattern for `truth`.
///
/// Draws come from stream `trial` of a generator seeded with the experiment
/// seed, so results are reproducible and independent of thread count.
pub fn simulate_readout(exp: &ReadoutExperiment, truth: Symbol, n: usize, trial: u64) -> Result<Symbol> {
    if n < 1 {
        return Err(invalid("N", "must be at least 1"));
    }
    exp.ensure_readable()?;
    Ok(exp.classify(truth, n, trial))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadoutPoint {
    pub n: usize,
    pub accuracy_zero: f64,
    pub accuracy_pi: f64,
}

impl ReadoutPoint {
    fn passes(&self, confidence: f64) -> bool {
        self.accuracy_zero >= confidence && self.accuracy_pi >= confidence
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReadoutSearch {
    pub required_n: usize,
    /// Every `N` evaluated, in search order.
    pub trace: Vec<ReadoutPoint>,
}

impl ReadoutSearch {
    /// CSV with columns `N,accuracy_phi0,accuracy_phipi`.
    pub fn table(&self) -> CsvTable {
        let mut t = CsvTable::new(&["N", "accuracy_phi0", "accuracy_phipi"]);
        for p in &self.trace {
            t.push(vec![
                p.n.to_string(),
                crate::report::sig17(p.accuracy_zero),
                crate::report::sig17(p.accuracy_pi),
            ]);
        }
        t
    }
}

/// Smallest `N <= max_n` reaching the confidence for both symbols: doubling, then bisection.
pub fn required_n(exp: &ReadoutExperiment) -> Result<ReadoutSearch> {
    exp.ensure_readable()?;
    let mut trace = Vec::new();
    let eval = |n: usize, trace: &mut Vec<ReadoutPoint>| -> Result<ReadoutPoint> {
        let (a0, api) = exp.accuracy(n)?;
        let p = ReadoutPoint {
            n,
            accuracy_zero: a0,
            accuracy_pi: api,
        };
        trace.push(p);
        Ok(p)
    };

    let mut failing = 0usize;
    let mut n = 1usize;
    let passing = loop {
        let p = eval(n, &mut trace)?;
        if p.passes(exp.confidence) {
            break n;
        }
        failing = n;
        if n >= exp.max_n {
            let best = trace
                .iter()
                .map(|p| p.accuracy_zero.min(p.accuracy_pi))
                .fold(0.0, f64::max);
            return Err(Error::BudgetExceeded {
                best_accuracy: best,
                confidence: exp.confidence,
                max_n: exp.max_n,
            });
        }
        n = (2 * n).min(exp.max_n);
    };

    let (mut lo, mut hi) = (failing, passing);
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if eval(mid, &mut trace)?.passes(exp.confidence) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(ReadoutSearch {
        required_n: hi,
        trace,
    })
}
