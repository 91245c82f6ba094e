//! Three-photon resonance in a squeezed cavity coupled to a qubit: model
//! Hamiltonians, spectra, closed- and open-system dynamics, observables and
//! the experiment harness that regenerates the published datasets.

pub mod dynamics;
pub mod error;
pub mod harness;
pub mod model;
pub mod observables;
pub mod qcore;
pub mod spectrum;

pub use error::{Error, Result};
