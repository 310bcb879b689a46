//! Discrete-time photonic quantum walks on a two-band synthetic mesh lattice.
//!
//! The crate simulates pulse amplitudes `(u, v)` in two coupled fiber loops
//! under a drifting complex potential `V[n, m] = phi(n + m * v)`, and provides
//! the band-structure, channel and spectral tools needed to check whether a
//! given potential is invisible to waves crossing it.
//!
//! Module map:
//!
//! * [`lattice`]: lattice state, coin, single-step map and evolution.
//! * [`potentials`]: shape functions (Kramers–Kronig multi-pole family,
//!   Hermitian truncation, tabulated) and their Fourier spectra.
//! * [`bands`]: lab and moving-frame dispersion, group velocity, channel roots.
//! * [`born`]: first-order channel weights.
//! * [`harness`]: paired potential-on/potential-off runs and residual metrics.
//! * [`io`]: configuration files, presets and output writers.

pub mod bands;
pub mod born;
pub mod error;
pub mod harness;
pub mod io;
pub mod lattice;
pub mod potentials;
pub mod roots;

pub use error::{Error, Result};
pub use num_complex::Complex64;
