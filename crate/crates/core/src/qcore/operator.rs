use std::ops::{Add, Mul, Neg, Sub};

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use super::{FockSpace, ONE, ZERO};
use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-12;
const UNITARY_TOL: f64 = 1e-10;

/// Dense complex square matrix with Hermiticity / unitarity flags.
///
/// The flags are only ever set after the corresponding defect has been
/// checked, so a flagged operator always satisfies its contract.
#[derive(Clone, Debug, PartialEq)]
pub struct QOperator {
    mat: Array2<C64>,
    hermitian: bool,
    unitary: bool,
}

impl QOperator {
    pub fn new(mat: Array2<C64>) -> Self {
        assert_eq!(mat.nrows(), mat.ncols(), "operator matrix must be square");
        Self { mat, hermitian: false, unitary: false }
    }

    pub fn from_real(mat: Array2<f64>) -> Self {
        Self::new(mat.mapv(|x| C64::new(x, 0.0)))
    }

    pub fn zeros(dim: usize) -> Self {
        Self { mat: Array2::zeros((dim, dim)), hermitian: true, unitary: false }
    }

    pub fn identity(dim: usize) -> Self {
        Self { mat: Array2::eye(dim), hermitian: true, unitary: true }
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut mat = Array2::zeros((values.len(), values.len()));
        for (k, &v) in values.iter().enumerate() {
            mat[[k, k]] = C64::new(v, 0.0);
        }
        Self { mat, hermitian: true, unitary: false }
    }

    /// Wraps `mat` and flags it Hermitian, failing if `‖A − A†‖_max ≥ 1e-12`.
    pub fn hermitian(mat: Array2<C64>) -> Result<Self> {
        Self::new(mat).into_hermitian()
    }

    pub fn into_hermitian(mut self) -> Result<Self> {
        let defect = self.hermiticity_defect();
        if defect >= HERMITIAN_TOL {
            return Err(Error::Contract(format!("operator not Hermitian: defect {defect:.3e}")));
        }
        self.hermitian = true;
        Ok(self)
    }

    pub fn into_unitary(mut self) -> Result<Self> {
        let defect = self.unitarity_defect();
        if defect >= UNITARY_TOL {
            return Err(Error::Contract(format!("operator not unitary: defect {defect:.3e}")));
        }
        self.unitary = true;
        Ok(self)
    }

    pub(crate) fn from_parts(mat: Array2<C64>, hermitian: bool, unitary: bool) -> Self {
        Self { mat, hermitian, unitary }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.mat
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.mat[[row, col]]
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    /// `‖A − A†‖_max`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.mat[[i, j]] - self.mat[[j, i]].conj()).norm());
            }
        }
        worst
    }

    /// `‖A†A − I‖_max`.
    pub fn unitarity_defect(&self) -> f64 {
        let prod = self.dagger().mat.dot(&self.mat);
        prod.indexed_iter()
            .map(|((i, j), z)| if i == j { (z - ONE).norm() } else { z.norm() })
            .fold(0.0, f64::max)
    }

    /// Largest entry magnitude, `‖A‖_max`.
    pub fn max_abs(&self) -> f64 {
        self.mat.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Entrywise `‖A − B‖_max`.
    pub fn max_abs_diff(&self, other: &QOperator) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.mat.iter().zip(other.mat.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn dagger(&self) -> QOperator {
        let mat = self.mat.t().mapv(|z| z.conj());
        Self { mat, hermitian: self.hermitian, unitary: self.unitary }
    }

    pub fn scale(&self, c: f64) -> QOperator {
        Self { mat: &self.mat * C64::new(c, 0.0), hermitian: self.hermitian, unitary: false }
    }

    pub fn scale_complex(&self, c: C64) -> QOperator {
        Self::new(&self.mat * c)
    }

    pub fn commutator(&self, other: &QOperator) -> QOperator {
        Self::new(self.mat.dot(&other.mat) - other.mat.dot(&self.mat))
    }

    pub fn trace(&self) -> C64 {
        self.mat.diag().sum()
    }

    pub fn apply(&self, v: &Array1<C64>) -> Array1<C64> {
        self.mat.dot(v)
    }

    /// `⟨u|A|v⟩`.
    pub fn sandwich(&self, u: &Array1<C64>, v: &Array1<C64>) -> C64 {
        u.iter().zip(self.mat.dot(v).iter()).map(|(a, b)| a.conj() * b).sum()
    }
}

impl Add for &QOperator {
    type Output = QOperator;
    fn add(self, rhs: &QOperator) -> QOperator {
        QOperator::from_parts(&self.mat + &rhs.mat, self.hermitian && rhs.hermitian, false)
    }
}

impl Sub for &QOperator {
    type Output = QOperator;
    fn sub(self, rhs: &QOperator) -> QOperator {
        QOperator::from_parts(&self.mat - &rhs.mat, self.hermitian && rhs.hermitian, false)
    }
}

impl Mul for &QOperator {
    type Output = QOperator;
    fn mul(self, rhs: &QOperator) -> QOperator {
        QOperator::from_parts(self.mat.dot(&rhs.mat), false, self.unitary && rhs.unitary)
    }
}

impl Mul<&QOperator> for f64 {
    type Output = QOperator;
    fn mul(self, rhs: &QOperator) -> QOperator {
        rhs.scale(self)
    }
}

impl Neg for &QOperator {
    type Output = QOperator;
    fn neg(self) -> QOperator {
        self.scale(-1.0)
    }
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::zeros((ar * br, ac * bc));
    for ((i, j), &x) in a.indexed_iter() {
        if x == ZERO {
            continue;
        }
        for ((k, l), &y) in b.indexed_iter() {
            out[[i * br + k, j * bc + l]] = x * y;
        }
    }
    out
}

pub(crate) fn cavity_annihilation(cavity_dim: usize) -> Array2<C64> {
    let mut a = Array2::zeros((cavity_dim, cavity_dim));
    for n in 1..cavity_dim {
        a[[n - 1, n]] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// Ladder, number, and Pauli operators lifted to the composite space.
#[derive(Clone, Debug)]
pub struct OperatorSet {
    pub space: FockSpace,
    pub a: QOperator,
    pub a_dag: QOperator,
    pub n_op: QOperator,
    pub sz: QOperator,
    /// `σ_+ = |e⟩⟨g|`
    pub sp: QOperator,
    /// `σ_- = |g⟩⟨e|`
    pub sm: QOperator,
    pub identity: QOperator,
}

impl OperatorSet {
    /// `|e⟩⟨e|`, i.e. `σ_+σ_-`.
    pub fn proj_e(&self) -> QOperator {
        &self.sp * &self.sm
    }

    /// `|g⟩⟨g|`, i.e. `σ_-σ_+`.
    pub fn proj_g(&self) -> QOperator {
        &self.sm * &self.sp
    }

    /// `σ_z ⊗ (−1)^n`, the combined parity that commutes with every
    /// coupling term in the anisotropic model.
    pub fn parity(&self) -> QOperator {
        let cd = self.space.cavity_dim();
        let diag: Vec<f64> = (0..self.space.dim())
            .map(|k| {
                let q = if k < cd { -1.0 } else { 1.0 };
                let n = k % cd;
                q * if n % 2 == 0 { 1.0 } else { -1.0 }
            })
            .collect();
        QOperator::diagonal(&diag)
    }
}

pub fn build_operators(space: FockSpace) -> OperatorSet {
    let cd = space.cavity_dim();
    let id_c: Array2<C64> = Array2::eye(cd);
    let id_q: Array2<C64> = Array2::eye(2);
    let a_c = cavity_annihilation(cd);

    let mut sz_q = Array2::zeros((2, 2));
    sz_q[[0, 0]] = C64::new(-1.0, 0.0);
    sz_q[[1, 1]] = ONE;
    let mut sp_q = Array2::zeros((2, 2));
    sp_q[[1, 0]] = ONE;

    let a = QOperator::new(kron(&id_q, &a_c));
    let a_dag = a.dagger();
    let n_op = QOperator::from_parts((&a_dag * &a).into_matrix(), true, false);
    let sp = QOperator::new(kron(&sp_q, &id_c));
    let sm = sp.dagger();
    let sz = QOperator::from_parts(kron(&sz_q, &id_c), true, false);
    OperatorSet { space, a, a_dag, n_op, sz, sp, sm, identity: QOperator::identity(space.dim()) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::Qubit;

    #[test]
    fn ladder_matrix_element() {
        let space = FockSpace::new(3).unwrap();
        let ops = build_operators(space);
        let el = ops.a.get(space.index(Qubit::G, 2), space.index(Qubit::G, 3));
        assert!((el.re - 1.7320508).abs() < 1e-7);
        assert_eq!(el.im, 0.0);
    }

    #[test]
    fn sigma_z_sign() {
        let space = FockSpace::new(3).unwrap();
        let ops = build_operators(space);
        let g0 = space.index(Qubit::G, 0);
        assert_eq!(ops.sz.get(g0, g0).re, -1.0);
        let e0 = space.index(Qubit::E, 0);
        assert_eq!(ops.sz.get(e0, e0).re, 1.0);
    }

    #[test]
    fn commutator_truncation_artifact() {
        // [a, a†] − I vanishes except at the cutoff row, where it is −(n_max+1).
        let space = FockSpace::new(3).unwrap();
        let ops = build_operators(space);
        let c = &ops.a.commutator(&ops.a_dag) - &ops.identity;
        let cd = space.cavity_dim();
        for k in 0..space.dim() {
            for l in 0..space.dim() {
                let z = c.get(k, l);
                if k == l && k % cd == space.n_max() {
                    assert!((z.norm() - 4.0).abs() < 1e-14);
                } else {
                    assert!(z.norm() < 1e-14, "({k},{l}) = {z}");
                }
            }
        }
    }

    #[test]
    fn invalid_cutoff() {
        assert!(matches!(FockSpace::new(2), Err(Error::InvalidCutoff(2))));
    }

    #[test]
    fn projectors() {
        let space = FockSpace::new(4).unwrap();
        let ops = build_operators(space);
        let sum = &ops.proj_e() + &ops.proj_g();
        assert!(sum.max_abs_diff(&ops.identity) < 1e-15);
        let sz = &ops.proj_e() - &ops.proj_g();
        assert!(sz.max_abs_diff(&ops.sz) < 1e-15);
    }
}
