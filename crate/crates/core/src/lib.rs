//! Numerical quantum optics at desk scale.
//!
//! Four subsystems, each usable on its own:
//!
//! * [`fock`] — a truncated single-mode Fock-space engine: displacement
//!   operators, displaced number states, and time-ordered evolution under a
//!   classical current drive.
//! * [`stats`] — second-order photon counting statistics: g²(0) for standard
//!   sources and a model-level two-particle (HBT) correlation estimator.
//! * [`geometry`] — momentum-space geometry of massless spinning particles:
//!   monopole field, translation two-cocycles, solid angles, spin-1 holonomy,
//!   and helicity quantization checks.
//! * [`wavepacket`] — a spectral solver for the 1-D positive-energy
//!   single-photon propagator with a d'Alembert reconstruction cross-check.
//!
//! All public operations are pure functions of their inputs. Monte Carlo
//! estimators take an explicit seed and use counter-based per-block RNG
//! streams, so results are bit-identical for a given seed regardless of the
//! thread count (the `parallel` feature only changes how blocks are
//! scheduled, never the reduction order).

pub mod exec;
pub mod fock;
pub mod geometry;
pub mod io;
pub mod quad;
pub mod stats;
pub mod wavepacket;

/// Complex double used throughout.
pub type C64 = num_complex::Complex64;
