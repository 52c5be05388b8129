//! Desk-scale numerics for signaling in entangled two-slit interferometry.
//!
//! * [`state`]: entangled branch pairs, overlaps, the particle-1 reduced
//!   density and its fringe pattern under a phase element on the far side.
//! * [`kernel`]: free and slit-constrained path-integral propagation and the
//!   norm loss a slit introduces.
//! * [`qubit`]: two-level model where a non-unitary side-2 evolution biases
//!   side-1 marginals.
//! * [`signal`]: the emission-rate condition and Monte Carlo readout budget.
//! * [`scenario`]: config-driven runs that write CSV/JSON artifacts.

pub mod error;
pub mod grid;
pub mod kernel;
pub mod mode;
pub mod qubit;
pub mod report;
pub mod scenario;
pub mod signal;
pub mod source;
pub mod state;

pub use error::{Error, Result};
pub use grid::GridAxis;
pub use mode::{ModeFunction, ModeLabel};
pub use num_complex::Complex64;
