//! Numerical toolkit for one-dimensional Lieb–Oxford inequalities.
//!
//! The crate evaluates interaction potentials and their moment integrals,
//! builds explicit two- and three-particle trial states, computes their
//! indirect interaction energies exactly (up to adaptive quadrature), and
//! checks every lower bound of the family against those energies. It also
//! searches trial-state parameters for the largest observed Lieb–Oxford ratio
//! and covers the lattice (Hubbard model) analogue.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod energies;
pub mod error;
pub mod explore;
pub mod hubbard;
pub mod numerics;
pub mod potentials;
pub mod report;
pub mod states;

pub use error::{Error, Result};
