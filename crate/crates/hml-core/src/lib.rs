//! Physics engine for hybrid lattices of magnetic microspheres coupled
//! through superconducting loops and to embedded spin qubits.
//!
//! The crate is organized bottom-up:
//!
//! * [`units`]: constants, material parameters, macrospin moments,
//! * [`numerics`]: quadrature, optimizers, regression, eigensolvers,
//! * [`geometry`]: loop inductance, loop-magnet flux factors, field maps,
//! * [`couplings`]: magnon-magnon and magnon-qubit coupling rates,
//! * [`lattice`]: Bloch bands, finite-lattice spectra, density of states,
//! * [`dynamics`]: open-system state transfer between two qubit sites.
//!
//! All frequencies are angular (rad/s) internally; reporting layers convert
//! to Hz where a second unit is wanted.

pub mod couplings;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod lattice;
pub mod numerics;
pub mod units;

pub use error::{HmlError, Result};
