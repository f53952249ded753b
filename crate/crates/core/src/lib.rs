//! Numerical laboratory for the semiclassical limit of the mixed-state
//! Pauli–Poisson equation.
//!
//! The crate is organised bottom-up:
//!
//! - [`spectral`]: periodic grids, FFTs, exact spectral derivatives and shifts;
//! - [`fields`]: magnetic potentials, curl, presets and the Poisson solver;
//! - [`quantum`]: mixed spinor states, the Pauli Hamiltonian, Krylov/Strang
//!   propagation, self-consistent evolution and observables;
//! - [`wigner`]: Wigner transforms/matrices, Husimi smoothing, moments,
//!   pseudo-differential operators and oscillation diagnostics;
//! - [`kinetic`]: Lorentz-force characteristics, deposition and particle-in-cell;
//! - [`limitlab`]: ħ sweeps comparing the quantum and kinetic sides;
//! - [`selftest`]: the acceptance checks, runnable from tests and the CLI.
//!
//! Units are scaled so that charge, mass and the speed of light are one; the
//! only small parameter is the scaled Planck constant `hbar`.

// `!(x > 0.0)` also rejects NaN; axis loops read better with indices
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod fields;
pub mod io;
pub mod kinetic;
pub mod limitlab;
pub mod par;
pub mod quantum;
pub mod selftest;
pub mod spectral;
pub mod wigner;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Crate version embedded in every output file.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
