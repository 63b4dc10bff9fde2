//! Bound electron pairs on a half-line wire.
//!
//! Two same-spin electrons on `[0, L]` that can never separate by more than
//! `d` move on the truncated pencil domain. This crate discretizes the
//! antisymmetric pair Hamiltonian there, computes its low-lying spectrum and
//! the energy gap to the continuum threshold `ħ²π²/(m_e d²)`, and evaluates
//! the grand-canonical gas of such pairs to show condensation into the bound
//! state, and its disappearance once a repulsive wire-end interaction pushes
//! the bound state into the continuum.
//!
//! Energies are dimensionless in the unit `ħ²/(2 m_e d²)` unless a function
//! says otherwise; [`units`] converts to SI and eV.

pub mod bec;
pub mod cli;
pub mod discretize;
pub mod eigensolve;
pub mod error;
pub mod geometry;
pub mod sparse;
pub mod spectral;
pub mod units;

pub use error::{Error, Result};
