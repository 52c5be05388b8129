//! Two-level toy model: side-1 marginals under a (possibly non-unitary) side-2 evolution.
//!
//! Matrices are written in the ordered basis `(+, -)`. The pair starts in
//! `(|1+>|2-> + |1->|2+>)/sqrt(2)`; each side evolves independently. With a
//! unitary `U1`, the side-1 marginals depend on `U2` only through the Gram
//! matrix `G = U2^dagger U2 = ((alpha, beta), (gamma, delta))`:
//!
//! ```text
//! P(1+) = (|beta|^2 + |delta|^2) / 2
//! P(1-) = (|alpha|^2 + |gamma|^2) / 2
//! ```

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::{Matrix2, Matrix4, Vector2, Vector4};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::report::CsvTable;

const UNITARY_TOLERANCE: f64 = 1e-12;
const GRAM_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvolutionRole {
    U1,
    U2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolutionMap2 {
    matrix: Matrix2<Complex64>,
    role: EvolutionRole,
}

impl EvolutionMap2 {
    /// Side-1 evolution; must be unitary.
    pub fn side1(matrix: Matrix2<Complex64>) -> Result<Self> {
        check_finite(&matrix)?;
        let residual = unitarity_residual(&matrix);
        if residual > UNITARY_TOLERANCE {
            return Err(Error::NonUnitary {
                role: "U1",
                residual,
            });
        }
        Ok(Self {
            matrix,
            role: EvolutionRole::U1,
        })
    }

    /// Side-2 evolution; any finite matrix.
    pub fn side2(matrix: Matrix2<Complex64>) -> Result<Self> {
        check_finite(&matrix)?;
        Ok(Self {
            matrix,
            role: EvolutionRole::U2,
        })
    }

    pub fn identity(role: EvolutionRole) -> Self {
        Self {
            matrix: Matrix2::identity(),
            role,
        }
    }

    pub fn matrix(&self) -> &Matrix2<Complex64> {
        &self.matrix
    }

    pub fn role(&self) -> EvolutionRole {
        self.role
    }

    pub fn is_unitary(&self) -> bool {
        unitarity_residual(&self.matrix) <= UNITARY_TOLERANCE
    }
}

fn check_finite(m: &Matrix2<Complex64>) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(invalid("EvolutionMap2.matrix", "entries must be finite"))
    }
}

fn unitarity_residual(m: &Matrix2<Complex64>) -> f64 {
    (m.adjoint() * m - Matrix2::identity())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

/// Haar-random 2x2 unitary.
pub fn random_unitary<R: Rng + ?Sized>(rng: &mut R) -> Matrix2<Complex64> {
    let mut g = || -> f64 { StandardNormal.sample(rng) };
    let v: [f64; 4] = [g(), g(), g(), g()];
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let a = Complex64::new(v[0], v[1]) / n;
    let b = Complex64::new(v[2], v[3]) / n;
    let phase = Complex64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
    Matrix2::new(a, b, -b.conj(), a.conj()) * phase
}

/// 2x2 matrix with entries drawn uniformly from the closed unit disc.
pub fn random_contraction_entries<R: Rng + ?Sized>(rng: &mut R) -> Matrix2<Complex64> {
    Matrix2::from_fn(|_, _| {
        let r = rng.random::<f64>().sqrt();
        Complex64::from_polar(r, rng.random_range(0.0..std::f64::consts::TAU))
    })
}

/// Entries of `U2^dagger U2` in the `(+, -)` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GramMatrix {
    pub alpha: Complex64,
    pub beta: Complex64,
    pub gamma: Complex64,
    pub delta: Complex64,
}

impl GramMatrix {
    pub const IDENTITY: GramMatrix = GramMatrix {
        alpha: Complex64::new(1.0, 0.0),
        beta: Complex64::new(0.0, 0.0),
        gamma: Complex64::new(0.0, 0.0),
        delta: Complex64::new(1.0, 0.0),
    };

    /// User-supplied entries, validated Hermitian and positive semidefinite.
    pub fn new(alpha: Complex64, beta: Complex64, gamma: Complex64, delta: Complex64) -> Result<Self> {
        let g = Self {
            alpha,
            beta,
            gamma,
            delta,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn real_diagonal(alpha: f64, delta: f64) -> Result<Self> {
        Self::new(
            Complex64::new(alpha, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(delta, 0.0),
        )
    }

    pub fn validate(&self) -> Result<()> {
        let entries = [self.alpha, self.beta, self.gamma, self.delta];
        if !entries.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::InvalidGram("entries must be finite".into()));
        }
        let scale = entries.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let tol = GRAM_TOLERANCE * scale;
        if self.alpha.im.abs() > tol || self.delta.im.abs() > tol {
            return Err(Error::InvalidGram("diagonal entries alpha, delta must be real".into()));
        }
        if (self.gamma - self.beta.conj()).norm() > tol {
            return Err(Error::InvalidGram("gamma must equal conj(beta)".into()));
        }
        let det = self.alpha.re * self.delta.re - self.beta.norm_sqr();
        if self.alpha.re < -tol || self.delta.re < -tol || det < -tol * scale {
            return Err(Error::InvalidGram(format!(
                "not positive semidefinite (alpha = {}, delta = {}, det = {det:.3e})",
                self.alpha.re, self.delta.re
            )));
        }
        Ok(())
    }

    pub fn matrix(&self) -> Matrix2<Complex64> {
        Matrix2::new(self.alpha, self.beta, self.gamma, self.delta)
    }

    /// Eigenvalues `(lambda_min, lambda_max)` from the characteristic polynomial.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let tr = self.alpha.re + self.delta.re;
        let det = (self.alpha * self.delta - self.beta * self.gamma).re;
        let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
        (tr / 2.0 - disc, tr / 2.0 + disc)
    }

    /// Positive square root `S` with `S^dagger S = G`, a side-2 evolution realizing this Gram matrix.
    pub fn realization(&self) -> Result<EvolutionMap2> {
        self.validate()?;
        let det = (self.alpha.re * self.delta.re - self.beta.norm_sqr()).max(0.0);
        let s = det.sqrt();
        let t = (self.alpha.re + self.delta.re + 2.0 * s).sqrt();
        if t == 0.0 {
            return EvolutionMap2::side2(Matrix2::zeros());
        }
        let root = (self.matrix() + Matrix2::identity() * Complex64::new(s, 0.0)) / Complex64::new(t, 0.0);
        EvolutionMap2::side2(root)
    }
}

pub fn gram(u2: &EvolutionMap2) -> GramMatrix {
    let g = u2.matrix.adjoint() * u2.matrix;
    // exact Hermitian structure: real diagonal, gamma = conj(beta)
    GramMatrix {
        alpha: Complex64::new(g[(0, 0)].re, 0.0),
        beta: g[(0, 1)],
        gamma: g[(0, 1)].conj(),
        delta: Complex64::new(g[(1, 1)].re, 0.0),
    }
}

/// Side-1 marginals `(P(1+), P(1-))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Marginals {
    pub plus: f64,
    pub minus: f64,
}

impl Marginals {
    pub const UNBIASED: Marginals = Marginals {
        plus: 0.5,
        minus: 0.5,
    };

    pub fn max_abs_diff(&self, other: &Marginals) -> f64 {
        (self.plus - other.plus).abs().max((self.minus - other.minus).abs())
    }
}

/// Closed-form marginals from the Gram matrix.
pub fn marginal_probs_closed(g: &GramMatrix) -> Marginals {
    Marginals {
        plus: 0.5 * (g.beta.norm_sqr() + g.delta.norm_sqr()),
        minus: 0.5 * (g.alpha.norm_sqr() + g.gamma.norm_sqr()),
    }
}

fn kron(a: &Vector2<Complex64>, b: &Vector2<Complex64>) -> Vector4<Complex64> {
    Vector4::new(a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
}

/// Marginals by explicit projection of the evolved four-dimensional state.
pub fn marginal_probs_oracle(u1: &EvolutionMap2, u2: &EvolutionMap2) -> Result<Marginals> {
    let residual = unitarity_residual(&u1.matrix);
    if residual > UNITARY_TOLERANCE {
        return Err(Error::NonUnitary {
            role: "U1",
            residual,
        });
    }
    let plus = Vector2::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    let minus = Vector2::new(Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0));
    let one_plus = u1.matrix * plus;
    let one_minus = u1.matrix * minus;
    let two_plus = u2.matrix * plus;
    let two_minus = u2.matrix * minus;

    let c = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let state = kron(&one_plus, &two_minus) * c + kron(&one_minus, &two_plus) * c;
    // sanity: the product operator acts as U1 (x) U2 on the initial state
    debug_assert!({
        let full: Matrix4<Complex64> = u1.matrix.kronecker(&u2.matrix);
        let initial = kron(&plus, &minus) * c + kron(&minus, &plus) * c;
        (full * initial - state).norm() < 1e-12
    });

    let amp = |side1: &Vector2<Complex64>, side2: &Vector2<Complex64>| kron(side1, side2).dotc(&state).norm_sqr();
    Ok(Marginals {
        plus: amp(&one_plus, &two_plus) + amp(&one_plus, &two_minus),
        minus: amp(&one_minus, &two_plus) + amp(&one_minus, &two_minus),
    })
}

/// Largest distance of `|beta|^2 + |delta|^2` or `|alpha|^2 + |gamma|^2` from 1.
pub fn signaling_deviation(g: &GramMatrix) -> f64 {
    let plus = g.beta.norm_sqr() + g.delta.norm_sqr();
    let minus = g.alpha.norm_sqr() + g.gamma.norm_sqr();
    (plus - 1.0).abs().max((minus - 1.0).abs())
}

/// Gram matrix switched from the identity to `1 + perturbation` at time `switch_time`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSwitch {
    pub switch_time: f64,
    pub alpha0: Complex64,
    pub beta0: Complex64,
    pub gamma0: Complex64,
    pub delta0: Complex64,
}

impl TimeSwitch {
    pub fn new(
        switch_time: f64,
        alpha0: Complex64,
        beta0: Complex64,
        gamma0: Complex64,
        delta0: Complex64,
    ) -> Result<Self> {
        if !switch_time.is_finite() {
            return Err(invalid("TimeSwitch.T", "must be finite"));
        }
        let s = Self {
            switch_time,
            alpha0,
            beta0,
            gamma0,
            delta0,
        };
        s.switched_gram()?;
        Ok(s)
    }

    pub fn switched_gram(&self) -> Result<GramMatrix> {
        let one = Complex64::new(1.0, 0.0);
        GramMatrix::new(one + self.alpha0, self.beta0, self.gamma0, one + self.delta0)
    }

    /// Gram matrix in force at time `t`.
    pub fn gram_at(&self, t: f64) -> Result<GramMatrix> {
        if t < self.switch_time {
            Ok(GramMatrix::IDENTITY)
        } else {
            self.switched_gram()
        }
    }
}

pub fn probs_vs_time(switch: &TimeSwitch, t: f64) -> Result<Marginals> {
    Ok(marginal_probs_closed(&switch.gram_at(t)?))
}

/// Report row `t, P+, P-, deviation` plus the oracle cross-check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitRow {
    pub t: f64,
    pub marginals: Marginals,
    pub deviation: f64,
    pub oracle_diff: f64,
}

/// Evaluates the closed form and the tensor-product oracle for a Gram matrix.
///
/// The oracle runs on the positive square root of `g`, with `u1` on side 1.
pub fn qubit_row(t: f64, g: &GramMatrix, u1: &EvolutionMap2) -> Result<QubitRow> {
    let closed = marginal_probs_closed(g);
    let oracle = marginal_probs_oracle(u1, &g.realization()?)?;
    Ok(QubitRow {
        t,
        marginals: closed,
        deviation: signaling_deviation(g),
        oracle_diff: closed.max_abs_diff(&oracle),
    })
}

pub fn qubit_table(rows: &[QubitRow]) -> CsvTable {
    let mut t = CsvTable::new(&["t", "p_plus", "p_minus", "deviation", "oracle_max_abs_diff"]);
    for r in rows {
        t.push_floats(&[r.t, r.marginals.plus, r.marginals.minus, r.deviation, r.oracle_diff]);
    }
    t
}
