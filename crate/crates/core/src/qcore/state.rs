use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use super::{hermitian_eigs, FockSpace, QOperator, Qubit, ZERO};
use crate::error::{Error, Result};

const NORM_TOL: f64 = 1e-9;

/// Normalized state vector on the composite space.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amps: Array1<C64>,
}

impl PureState {
    /// Wraps `amps`, failing unless `‖ψ‖₂ = 1` within 1e-9.
    pub fn new(amps: Array1<C64>) -> Result<Self> {
        let norm = norm(&amps);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Contract(format!("state not normalized: norm {norm}")));
        }
        Ok(Self { amps })
    }

    /// Rescales `amps` to unit norm.
    pub fn normalized(amps: Array1<C64>) -> Result<Self> {
        let norm = norm(&amps);
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::Degenerate("cannot normalize a zero vector".into()));
        }
        Ok(Self { amps: amps / C64::new(norm, 0.0) })
    }

    pub(crate) fn from_raw(amps: Array1<C64>) -> Self {
        Self { amps }
    }

    pub fn basis(space: FockSpace, q: Qubit, n: usize) -> Result<Self> {
        let k = space.try_index(q, n)?;
        let mut amps = Array1::zeros(space.dim());
        amps[k] = C64::new(1.0, 0.0);
        Ok(Self { amps })
    }

    /// Normalized `Σ c_k |q_k, n_k⟩`.
    pub fn superposition(space: FockSpace, terms: &[(C64, Qubit, usize)]) -> Result<Self> {
        let mut amps = Array1::zeros(space.dim());
        for &(c, q, n) in terms {
            amps[space.try_index(q, n)?] += c;
        }
        Self::normalized(amps)
    }

    /// The Bell-like target `(|e,0⟩ − |g,3⟩)/√2`.
    pub fn bell_target(space: FockSpace) -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Self::superposition(space, &[(C64::new(h, 0.0), Qubit::E, 0), (C64::new(-h, 0.0), Qubit::G, 3)])
            .expect("n_max >= 3 is guaranteed by FockSpace")
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amps
    }

    pub fn amplitude(&self, k: usize) -> C64 {
        self.amps[k]
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amps)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureState) -> C64 {
        self.amps.iter().zip(other.amps.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn apply(&self, op: &QOperator) -> Result<PureState> {
        check_dim(op.dim(), self.dim())?;
        PureState::normalized(op.apply(&self.amps))
    }

    /// Re-expresses the state on a larger cutoff, padding with zeros.
    pub fn embed(&self, from: FockSpace, to: FockSpace) -> Result<PureState> {
        check_dim(from.dim(), self.dim())?;
        if to.n_max() < from.n_max() {
            return Err(Error::Contract("embedding target must not be smaller".into()));
        }
        let mut amps = Array1::zeros(to.dim());
        for (k, &z) in self.amps.iter().enumerate() {
            let (q, n) = from.label(k);
            amps[to.index(q, n)] = z;
        }
        Ok(Self { amps })
    }
}

/// Unit-trace positive semidefinite matrix on the composite space.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: Array2<C64>,
}

impl DensityMatrix {
    /// Validates Hermiticity (1e-10), unit trace (1e-8) and positivity (−1e-8).
    pub fn new(mat: Array2<C64>) -> Result<Self> {
        let rho = Self { mat };
        let herm = QOperator::new(rho.mat.clone()).hermiticity_defect();
        if herm > 1e-10 {
            return Err(Error::Contract(format!("density matrix not Hermitian: defect {herm:.3e}")));
        }
        let tr = rho.trace();
        if (tr - 1.0).abs() > 1e-8 {
            return Err(Error::Contract(format!("density matrix trace {tr} != 1")));
        }
        let min_eig = rho.min_eigenvalue()?;
        if min_eig < -1e-8 {
            return Err(Error::Contract(format!("density matrix has eigenvalue {min_eig:.3e}")));
        }
        Ok(rho)
    }

    pub(crate) fn from_raw(mat: Array2<C64>) -> Self {
        Self { mat }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        let v = psi.amplitudes();
        let n = v.len();
        Self { mat: Array2::from_shape_fn((n, n), |(i, j)| v[i] * v[j].conj()) }
    }

    /// `Σ p_k |ψ_k⟩⟨ψ_k|` with weights summing to one.
    pub fn mixture(terms: &[(f64, &PureState)]) -> Result<Self> {
        let dim = terms.first().map(|(_, s)| s.dim()).ok_or_else(|| Error::Degenerate("empty mixture".into()))?;
        let mut mat = Array2::zeros((dim, dim));
        for (p, s) in terms {
            check_dim(dim, s.dim())?;
            mat = mat + DensityMatrix::from_pure(s).mat * C64::new(*p, 0.0);
        }
        Self::new(mat)
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.diag().iter().map(|z| z.re).sum()
    }

    pub fn purity(&self) -> f64 {
        // Tr ρ² = Σ |ρ_ij|² for Hermitian ρ.
        self.mat.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        let herm = QOperator::from_parts(
            (&self.mat + &self.mat.t().mapv(|z| z.conj())) * C64::new(0.5, 0.0),
            true,
            false,
        );
        Ok(hermitian_eigs(&herm)?.values[0])
    }

    pub fn population(&self, k: usize) -> f64 {
        self.mat[[k, k]].re
    }
}

/// Operations shared by pure and mixed states.
pub trait QuantumState {
    fn dim(&self) -> usize;
    /// `⟨A⟩`
    fn expect(&self, op: &QOperator) -> C64;
    /// `⟨t|ρ|t⟩`, which reduces to `|⟨t|ψ⟩|²` for pure states.
    fn overlap_with(&self, target: &PureState) -> f64;
    fn to_density(&self) -> DensityMatrix;
    fn as_pure(&self) -> Option<&PureState> {
        None
    }
}

impl QuantumState for PureState {
    fn dim(&self) -> usize {
        self.amps.len()
    }

    fn expect(&self, op: &QOperator) -> C64 {
        op.sandwich(&self.amps, &self.amps)
    }

    fn overlap_with(&self, target: &PureState) -> f64 {
        target.inner(self).norm_sqr()
    }

    fn to_density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }

    fn as_pure(&self) -> Option<&PureState> {
        Some(self)
    }
}

impl QuantumState for DensityMatrix {
    fn dim(&self) -> usize {
        self.mat.nrows()
    }

    fn expect(&self, op: &QOperator) -> C64 {
        let m = op.matrix();
        let mut acc = ZERO;
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                acc += self.mat[[i, j]] * m[[j, i]];
            }
        }
        acc
    }

    fn overlap_with(&self, target: &PureState) -> f64 {
        let t = target.amplitudes();
        let rt = self.mat.dot(t);
        t.iter().zip(rt.iter()).map(|(a, b)| a.conj() * b).sum::<C64>().re
    }

    fn to_density(&self) -> DensityMatrix {
        self.clone()
    }
}

pub(crate) fn norm(v: &Array1<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}
