//! Truncated Fock-space operator algebra on the qubit ⊗ cavity space.
//!
//! Basis ordering is qubit ⊗ cavity: the composite index of `|q, n⟩` is
//! `q * (n_max + 1) + n` with `q = 0` for `|g⟩` and `q = 1` for `|e⟩`.

mod linalg;
mod operator;
mod sparse;
mod state;

pub use linalg::{
    cavity_squeeze, expm_unitary, hermitian_eigs, partial_trace, squeeze_operator, Eigen,
    Subsystem,
};
pub(crate) use linalg::{reduced_qubit, spectral_map};
pub use operator::{build_operators, kron, OperatorSet, QOperator};
pub use sparse::SparseOp;
pub use state::{DensityMatrix, PureState, QuantumState};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Qubit basis level.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum Qubit {
    G = 0,
    E = 1,
}

/// Photon-number-truncated cavity coupled to a single qubit.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct FockSpace {
    n_max: usize,
}

impl FockSpace {
    pub fn new(n_max: usize) -> Result<Self> {
        if n_max < 3 {
            return Err(Error::InvalidCutoff(n_max));
        }
        Ok(Self { n_max })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Cavity dimension, `n_max + 1`.
    pub fn cavity_dim(&self) -> usize {
        self.n_max + 1
    }

    /// Composite dimension, `2 (n_max + 1)`.
    pub fn dim(&self) -> usize {
        2 * (self.n_max + 1)
    }

    /// Composite index of `|q, n⟩`.
    pub fn index(&self, q: Qubit, n: usize) -> usize {
        debug_assert!(n <= self.n_max);
        q as usize * self.cavity_dim() + n
    }

    /// Checked variant of [`FockSpace::index`].
    pub fn try_index(&self, q: Qubit, n: usize) -> Result<usize> {
        if n > self.n_max {
            return Err(Error::Index(format!("photon number {n} exceeds n_max = {}", self.n_max)));
        }
        Ok(self.index(q, n))
    }

    /// Inverse of [`FockSpace::index`].
    pub fn label(&self, k: usize) -> (Qubit, usize) {
        let q = if k / self.cavity_dim() == 0 { Qubit::G } else { Qubit::E };
        (q, k % self.cavity_dim())
    }

    pub fn with_extra_photons(&self, extra: usize) -> Self {
        Self { n_max: self.n_max + extra }
    }
}
