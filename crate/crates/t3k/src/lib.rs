//! Numerical laboratory for virtual-state tunnelling of a trapped atom
//! through an impenetrable barrier, mediated by a cavity mode.
//!
//! The core modules work in natural units (`hbar = 1` by default):
//! [`modes`] holds the double-well geometry, box eigenmodes and coupling
//! overlaps; [`hamiltonian`] assembles the truncated atom–cavity matrix;
//! [`dynamics`] evolves it exactly and extracts the symmetric–
//! antisymmetric splitting; [`selfenergy`] computes the same splitting
//! by second-order series and closed form; [`kernel`] builds the
//! position-space non-local kernel and the two-mode reduction;
//! [`feasibility`] is the SI-units experiment calculator. [`config`],
//! [`output`] and [`cli`] provide the deterministic command-line
//! front end.

pub mod cli;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod feasibility;
pub mod hamiltonian;
pub mod kernel;
pub mod modes;
pub mod output;
pub mod selfenergy;

pub use error::{Error, Result};
