use std::fmt;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::qcore::{QOperator, SparseOp};

/// Real time-dependent prefactor of a Hamiltonian term.
#[derive(Clone)]
pub enum Coefficient {
    Constant(f64),
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Coefficient {
    pub fn at(&self, t: f64) -> f64 {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::Function(f) => f(t),
        }
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Constant(c) => write!(f, "Constant({c})"),
            Coefficient::Function(_) => write!(f, "Function(..)"),
        }
    }
}

#[derive(Clone, Debug)]
struct Term {
    op: QOperator,
    sparse: SparseOp,
    coeff: Coefficient,
}

/// Time-indexed Hamiltonian `H(t) = Σ_k c_k(t) H_k` with Hermitian `H_k`.
#[derive(Clone, Debug)]
pub struct Schedule {
    dim: usize,
    terms: Vec<Term>,
}

impl Schedule {
    pub fn new(dim: usize) -> Self {
        Self { dim, terms: Vec::new() }
    }

    pub fn constant(h: &QOperator) -> Result<Self> {
        Self::new(h.dim()).with_term(h.clone(), Coefficient::Constant(1.0))
    }

    pub fn with_term(mut self, op: QOperator, coeff: Coefficient) -> Result<Self> {
        if op.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: op.dim() });
        }
        let op = if op.is_hermitian() { op } else { op.into_hermitian()? };
        let sparse = SparseOp::from_dense(&op);
        self.terms.push(Term { op, sparse, coeff });
        Ok(self)
    }

    pub fn with_fn(self, op: QOperator, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        self.with_term(op, Coefficient::Function(Arc::new(f)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub(crate) fn terms(&self) -> impl Iterator<Item = (&QOperator, &Coefficient)> {
        self.terms.iter().map(|t| (&t.op, &t.coeff))
    }

    /// Dense `H(t)`.
    pub fn at(&self, t: f64) -> QOperator {
        let mut mat = Array2::<C64>::zeros((self.dim, self.dim));
        for term in &self.terms {
            mat = mat + term.op.matrix() * C64::new(term.coeff.at(t), 0.0);
        }
        QOperator::from_parts(mat, true, false)
    }

    /// `out += −i H(t) ψ`
    pub(crate) fn apply_minus_i(&self, t: f64, psi: &[C64], out: &mut [C64]) {
        for term in &self.terms {
            let c = term.coeff.at(t);
            if c != 0.0 {
                term.sparse.mul_vec_acc(C64::new(0.0, -c), psi, out);
            }
        }
    }

    /// `max_t ‖H(t)‖_max` sampled at the ends and midpoint of `[t0, t1]`.
    pub fn max_abs_over(&self, t0: f64, t1: f64) -> f64 {
        [t0, 0.5 * (t0 + t1), t1].iter().map(|&t| self.at(t).max_abs()).fold(0.0, f64::max)
    }
}
