use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use super::operator::{cavity_annihilation, kron};
use super::state::check_dim;
use super::{DensityMatrix, FockSpace, PureState, QOperator, I, ZERO};
use crate::error::{Error, Result};

/// Ascending eigenvalues with orthonormal eigenvectors stored as columns.
///
/// Each eigenvector's largest-magnitude component is made real and positive
/// so that repeated decompositions give identical output.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Array2<C64>,
}

impl Eigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn vector(&self, i: usize) -> Array1<C64> {
        self.vectors.column(i).to_owned()
    }

    pub fn state(&self, i: usize) -> PureState {
        PureState::from_raw(self.vector(i))
    }

    /// `|⟨basis_k|v_i⟩|²`
    pub fn weight(&self, i: usize, k: usize) -> f64 {
        self.vectors[[k, i]].norm_sqr()
    }
}

pub fn hermitian_eigs(h: &QOperator) -> Result<Eigen> {
    let scale = h.max_abs().max(1.0);
    if !h.is_hermitian() {
        let defect = h.hermiticity_defect();
        if defect > 1e-12 * scale {
            return Err(Error::Contract(format!(
                "hermitian_eigs requires a Hermitian operator (defect {defect:.3e})"
            )));
        }
    }
    let n = h.dim();
    let m = h.matrix();
    let na = DMatrix::from_fn(n, n, |i, j| 0.5 * (m[[i, j]] + m[[j, i]].conj()));
    let eig = SymmetricEigen::new(na);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let mut values = Vec::with_capacity(n);
    let mut vectors = Array2::zeros((n, n));
    for (col, &src) in order.iter().enumerate() {
        values.push(eig.eigenvalues[src]);
        let v = eig.eigenvectors.column(src);
        let pivot = (0..n).fold(0, |best, k| if v[k].norm() > v[best].norm() { k } else { best });
        let phase = if v[pivot].norm() > 0.0 { v[pivot].conj() / v[pivot].norm() } else { C64::new(1.0, 0.0) };
        for k in 0..n {
            vectors[[k, col]] = v[k] * phase;
        }
    }
    Ok(Eigen { values, vectors })
}

/// `V diag(f(λ)) V†`
pub(crate) fn spectral_map(eig: &Eigen, f: impl Fn(f64) -> C64) -> Array2<C64> {
    let n = eig.dim();
    let mut scaled = eig.vectors.clone();
    for (j, &lam) in eig.values.iter().enumerate() {
        let c = f(lam);
        for i in 0..n {
            scaled[[i, j]] *= c;
        }
    }
    scaled.dot(&eig.vectors.t().mapv(|z| z.conj()))
}

/// `exp(−iHt)` via eigendecomposition.
pub fn expm_unitary(h: &QOperator, t: f64) -> Result<QOperator> {
    let eig = hermitian_eigs(h)?;
    let u = spectral_map(&eig, |lam| (-I * lam * t).exp());
    QOperator::new(u).into_unitary().map_err(|_| {
        Error::Contract("matrix exponential lost unitarity".into())
    })
}

/// `S(r) = exp[(r/2)(a†² − a²)]` on a cavity of dimension `cavity_dim`.
pub fn cavity_squeeze(r: f64, cavity_dim: usize) -> Result<Array2<C64>> {
    let a = cavity_annihilation(cavity_dim);
    let adag = a.t().mapv(|z| z.conj());
    let gen = (adag.dot(&adag) - a.dot(&a)) * C64::new(0.5 * r, 0.0);
    // exp(K) = exp(−i H) with H = iK Hermitian.
    let h = QOperator::new(gen * I);
    let eig = hermitian_eigs(&h)?;
    Ok(spectral_map(&eig, |lam| (-I * lam).exp()))
}

/// Squeeze operator lifted to the composite space as `I₂ ⊗ S(r)`.
pub fn squeeze_operator(r: f64, space: FockSpace) -> Result<QOperator> {
    if !r.is_finite() || r.abs() > 3.0 {
        return Err(Error::Contract(format!("squeezing |r| = {r} exceeds 3")));
    }
    let advised = 8.0 * r.sinh().powi(2) + 12.0;
    if (space.n_max() as f64) < advised {
        log::warn!("n_max = {} below the advised cutoff {advised:.1} for r = {r}", space.n_max());
    }
    let s = cavity_squeeze(r, space.cavity_dim())?;
    let op = QOperator::new(kron(&Array2::eye(2), &s));
    let defect = op.unitarity_defect();
    if defect > 1e-8 {
        return Err(Error::CutoffTooSmall { n_max: space.n_max(), defect });
    }
    Ok(QOperator::from_parts(op.into_matrix(), false, true))
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Subsystem {
    Qubit,
    Cavity,
}

/// Reduced density matrix of the kept subsystem.
pub fn partial_trace(rho: &DensityMatrix, keep: Subsystem, space: FockSpace) -> Result<DensityMatrix> {
    check_dim(space.dim(), rho.dim())?;
    let cd = space.cavity_dim();
    let m = rho.matrix();
    let reduced = match keep {
        Subsystem::Qubit => Array2::from_shape_fn((2, 2), |(q, p)| {
            (0..cd).map(|n| m[[q * cd + n, p * cd + n]]).sum::<C64>()
        }),
        Subsystem::Cavity => Array2::from_shape_fn((cd, cd), |(n, k)| {
            (0..2).map(|q| m[[q * cd + n, q * cd + k]]).fold(ZERO, |a, b| a + b)
        }),
    };
    let out = DensityMatrix::from_raw(reduced);
    if (out.trace() - rho.trace()).abs() > 1e-10 {
        return Err(Error::Contract("partial trace lost trace".into()));
    }
    Ok(out)
}

/// Reduced qubit state of a pure composite state, without forming `|ψ⟩⟨ψ|`.
pub(crate) fn reduced_qubit(psi: &PureState, space: FockSpace) -> Result<Array2<C64>> {
    check_dim(space.dim(), psi.dim())?;
    let cd = space.cavity_dim();
    let v = psi.amplitudes();
    Ok(Array2::from_shape_fn((2, 2), |(q, p)| {
        (0..cd).map(|n| v[q * cd + n] * v[p * cd + n].conj()).sum::<C64>()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::{build_operators, Qubit, QuantumState};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn diagonal_eigenvalues_sorted() {
        let h = QOperator::diagonal(&[3.0, 1.0, 2.0]);
        let e = hermitian_eigs(&h).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn two_level_splitting() {
        let g = 0.37;
        let h = QOperator::hermitian(ndarray::arr2(&[[c(0.0), c(g)], [c(g), c(0.0)]])).unwrap();
        let e = hermitian_eigs(&h).unwrap();
        assert!((e.values[0] + g).abs() < 1e-15);
        assert!((e.values[1] - g).abs() < 1e-15);
    }

    #[test]
    fn non_hermitian_rejected() {
        let h = QOperator::new(ndarray::arr2(&[[c(0.0), c(1.0)], [c(0.0), c(0.0)]]));
        assert!(matches!(hermitian_eigs(&h), Err(Error::Contract(_))));
        assert!(expm_unitary(&h, 1.0).is_err());
    }

    #[test]
    fn eigen_residual_and_orthonormality() {
        let space = FockSpace::new(10).unwrap();
        let ops = build_operators(space);
        let h = &(&ops.n_op.scale(0.3) + &ops.sz.scale(0.5)) + &(&(&ops.a * &ops.sp) + &(&ops.a_dag * &ops.sm)).scale(0.05);
        let h = h.into_hermitian().unwrap();
        let e = hermitian_eigs(&h).unwrap();
        let norm = h.max_abs();
        for i in 0..e.dim() {
            let v = e.vector(i);
            let r = h.apply(&v) - &v * c(e.values[i]);
            let res = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            assert!(res < 1e-9 * norm);
        }
        let vtv = e.vectors.t().mapv(|z| z.conj()).dot(&e.vectors);
        for ((i, j), z) in vtv.indexed_iter() {
            let expect = if i == j { 1.0 } else { 0.0 };
            assert!((z - c(expect)).norm() < 1e-9);
        }
    }

    #[test]
    fn expm_identity_and_phase() {
        let h = QOperator::diagonal(&[-0.5, 0.5]);
        let u0 = expm_unitary(&h, 0.0).unwrap();
        assert!(u0.max_abs_diff(&QOperator::identity(2)) < 1e-15);
        let u = expm_unitary(&h, std::f64::consts::PI).unwrap();
        assert!((u.get(0, 0) - I).norm() < 1e-14);
        assert!((u.get(1, 1) + I).norm() < 1e-14);
        let back = expm_unitary(&h, -std::f64::consts::PI).unwrap();
        assert!((&u * &back).max_abs_diff(&QOperator::identity(2)) < 1e-10);
    }

    #[test]
    fn squeeze_identity_at_zero() {
        let space = FockSpace::new(12).unwrap();
        let s = squeeze_operator(0.0, space).unwrap();
        assert!(s.max_abs_diff(&QOperator::identity(space.dim())) < 1e-14);
    }

    #[test]
    fn squeezed_vacuum_amplitudes() {
        let space = FockSpace::new(40).unwrap();
        let s = squeeze_operator(0.9, space).unwrap();
        let g0 = space.index(Qubit::G, 0);
        let g1 = space.index(Qubit::G, 1);
        let expect = 0.9f64.cosh().powf(-0.5);
        assert!((s.get(g0, g0).norm() - expect).abs() < 1e-5);
        assert!((0.83534 - expect).abs() < 1e-5);
        assert!(s.get(g1, g0).norm() < 1e-14);
    }

    #[test]
    fn squeeze_inverse_is_adjoint() {
        let space = FockSpace::new(20).unwrap();
        let s = squeeze_operator(0.7, space).unwrap();
        let sm = squeeze_operator(-0.7, space).unwrap();
        assert!(sm.max_abs_diff(&s.dagger()) < 1e-10);
        assert!(s.unitarity_defect() < 1e-10);
    }

    #[test]
    fn squeeze_rejects_large_r() {
        let space = FockSpace::new(20).unwrap();
        assert!(squeeze_operator(3.5, space).is_err());
    }

    #[test]
    fn partial_trace_product_and_bell() {
        let space = FockSpace::new(5).unwrap();
        let e0 = PureState::basis(space, Qubit::E, 0).unwrap();
        let rq = partial_trace(&e0.to_density(), Subsystem::Qubit, space).unwrap();
        assert!((rq.matrix()[[1, 1]] - c(1.0)).norm() < 1e-15);
        assert!((rq.purity() - 1.0).abs() < 1e-15);

        let bell = PureState::bell_target(space);
        let rq = partial_trace(&bell.to_density(), Subsystem::Qubit, space).unwrap();
        let half: Array2<C64> = Array2::eye(2) * c(0.5);
        assert!((rq.matrix() - &half).iter().all(|z| z.norm() < 1e-15));
        let rc = partial_trace(&bell.to_density(), Subsystem::Cavity, space).unwrap();
        assert_eq!(rc.dim(), 6);
    }

    #[test]
    fn partial_trace_dimension_mismatch() {
        let space = FockSpace::new(5).unwrap();
        let other = FockSpace::new(6).unwrap();
        let rho = PureState::bell_target(other).to_density();
        assert!(matches!(
            partial_trace(&rho, Subsystem::Qubit, space),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
