//! Two-time spin correlations measured through a spin-1/2 ancilla.
//!
//! The crate simulates the ancilla-assisted protocol end to end: exact
//! state-vector dynamics of spin-`l` systems, the Heisenberg system–ancilla
//! coupling evaluated in the coupled (Clebsch–Gordan) basis, Born-rule
//! outcome statistics of the ancilla and final spin measurements, extraction
//! of `Re C` and `Im C` from the measured correlator, finite-sample emulation
//! with error bars, and the exact correlation against which all estimates are
//! checked.
//!
//! Conventions used throughout:
//! - single-site bases are ordered by ascending `m` (`m = -l` first);
//! - tensor slots are the system sites in lattice order, ancilla last;
//! - the measured correlator weights the ancilla outcomes `±1/2` as `±1`,
//!   i.e. `𝒞 = Σ_m m (P_{m|+} P_+ − P_{m|−} P_−)`, see [`protocol::CONVENTION`].

pub mod coupled;
pub mod error;
pub mod experiment;
pub mod half_int;
pub mod model;
pub mod oracle;
pub mod protocol;
pub mod sampling;
pub mod spin;

pub use error::{Error, Result};
pub use half_int::HalfInt;
