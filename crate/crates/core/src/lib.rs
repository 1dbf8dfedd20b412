//! Numerical electro- and magnetostatics around current loops and dipole sheets.
//!
//! The crate evaluates Biot-Savart fields of closed curves, Coulomb and
//! dipole-layer fields of oriented surfaces, and the two classical routes to
//! the linking number of a pair of loops: the Gauss double integral (by
//! adaptive quadrature) and the signed count of crossings through a spanning
//! surface (by exact geometry). The `experiments` module turns the identities
//! that tie these together into convergence studies with pass/fail verdicts.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod fields;
pub mod geometry;
pub mod linking;
pub mod quadrature;
pub mod vector;

pub use error::{Error, Result};
pub use vector::Vector3;
