//! Derived quantities: populations, fidelity, concurrence, photon number,
//! Wigner functions and oscillation metrics.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::qcore::{
    hermitian_eigs, partial_trace, squeeze_operator, DensityMatrix, FockSpace, PureState,
    QOperator, QuantumState, Qubit, Subsystem,
};

/// `|⟨q,n| S(−r) ψ⟩|²`. Pass `r = 0` for states already in the squeezed frame.
pub fn squeezed_population(psi: &PureState, r: f64, q: Qubit, n: usize, space: FockSpace) -> Result<f64> {
    if psi.dim() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), got: psi.dim() });
    }
    let k = space.try_index(q, n)?;
    if r == 0.0 {
        return Ok(psi.amplitude(k).norm_sqr());
    }
    let s = squeeze_operator(-r, space)?;
    let row = s.matrix().row(k);
    Ok(row.iter().zip(psi.amplitudes()).map(|(a, b)| a * b).sum::<C64>().norm_sqr())
}

/// `⟨t|ρ|t⟩`, equal to `|⟨t|ψ⟩|²` for pure input.
pub fn fidelity<S: QuantumState>(state: &S, target: &PureState) -> Result<f64> {
    if state.dim() != target.dim() {
        return Err(Error::DimensionMismatch { expected: target.dim(), got: state.dim() });
    }
    Ok(state.overlap_with(target).clamp(0.0, 1.0))
}

/// `⟨a†a⟩` on the composite space.
pub fn photon_number<S: QuantumState>(state: &S, space: FockSpace) -> Result<f64> {
    if state.dim() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), got: state.dim() });
    }
    let cd = space.cavity_dim();
    let n_op = QOperator::diagonal(&(0..space.dim()).map(|k| (k % cd) as f64).collect::<Vec<_>>());
    Ok(state.expect(&n_op).re)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Concurrence {
    pub value: f64,
    /// Weight outside `span{|g,0⟩, |g,3⟩, |e,0⟩, |e,3⟩}`; zero for pure input.
    pub discarded_weight: f64,
    pub warning: Option<String>,
}

/// Pure states: `√(2(1 − Tr ρ_q²))`. Mixed states: Wootters concurrence of
/// the renormalized projection onto `{|g,0⟩, |g,3⟩, |e,0⟩, |e,3⟩}`.
pub fn concurrence<S: QuantumState>(state: &S, space: FockSpace) -> Result<Concurrence> {
    if state.dim() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), got: state.dim() });
    }
    if let Some(psi) = state.as_pure() {
        let rho_q = crate::qcore::reduced_qubit(psi, space)?;
        let purity: f64 = rho_q.iter().map(|z| z.norm_sqr()).sum();
        let value = (2.0 * (1.0 - purity)).max(0.0).sqrt().min(1.0);
        return Ok(Concurrence { value, discarded_weight: 0.0, warning: None });
    }
    projected_concurrence(&state.to_density(), space)
}

fn projected_concurrence(rho: &DensityMatrix, space: FockSpace) -> Result<Concurrence> {
    let idx = [
        space.index(Qubit::G, 0),
        space.index(Qubit::G, 3),
        space.index(Qubit::E, 0),
        space.index(Qubit::E, 3),
    ];
    let m = rho.matrix();
    let block = Array2::from_shape_fn((4, 4), |(i, j)| m[[idx[i], idx[j]]]);
    let weight: f64 = (0..4).map(|i| block[[i, i]].re).sum();
    let discarded_weight = (rho.trace() - weight).max(0.0);
    let warning = (weight < 0.5).then(|| {
        format!("concurrence unreliable: only {weight:.3} of the state lies in the two-level-pair subspace")
    });
    if let Some(w) = &warning {
        log::warn!("{w}");
    }
    if weight <= 0.0 {
        return Ok(Concurrence { value: 0.0, discarded_weight, warning });
    }
    let block = block / C64::new(weight, 0.0);
    Ok(Concurrence { value: wootters(&block)?, discarded_weight, warning })
}

/// Two-qubit concurrence `max(0, s₁ − s₂ − s₃ − s₄)` with `s_i` the
/// decreasing square roots of the eigenvalues of `ρ (σ_y⊗σ_y) ρ* (σ_y⊗σ_y)`.
pub fn wootters(rho: &Array2<C64>) -> Result<f64> {
    if rho.dim() != (4, 4) {
        return Err(Error::DimensionMismatch { expected: 4, got: rho.nrows() });
    }
    // σ_y⊗σ_y is real: anti-diagonal (−1, 1, 1, −1).
    let yy = Array2::from_shape_fn((4, 4), |(i, j)| {
        if i + j == 3 {
            C64::new(if i == 0 || i == 3 { -1.0 } else { 1.0 }, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let tilde = yy.dot(&rho.mapv(|z| z.conj())).dot(&yy);
    let eig = hermitian_eigs(&QOperator::new(rho.clone()).into_hermitian()?)?;
    let sqrt_rho = crate::qcore::spectral_map(&eig, |l| C64::new(l.max(0.0).sqrt(), 0.0));
    let m = sqrt_rho.dot(&tilde).dot(&sqrt_rho);
    let m = (&m + &m.t().mapv(|z| z.conj())) * C64::new(0.5, 0.0);
    let mut s: Vec<f64> =
        hermitian_eigs(&QOperator::new(m).into_hermitian()?)?.values.iter().map(|l| l.max(0.0).sqrt()).collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok((s[0] - s[1] - s[2] - s[3]).clamp(0.0, 1.0))
}

/// Reduced cavity state in the lab frame, `Tr_q[S(r) |ψ⟩⟨ψ| S†(r)]`, for a
/// squeezed-frame state. The squeeze is applied on a cavity enlarged by
/// `extra` photons to keep the cutoff away from the support.
pub fn lab_cavity_state(psi: &PureState, r: f64, space: FockSpace, extra: usize) -> Result<DensityMatrix> {
    let big = space.with_extra_photons(extra);
    let lifted = psi.embed(space, big)?;
    let lab = lifted.apply(&squeeze_operator(r, big)?)?;
    partial_trace(&DensityMatrix::from_pure(&lab), Subsystem::Cavity, big)
}

/// Phase-space window and resolution for [`wigner`].
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WignerSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub n_points: usize,
}

impl WignerSpec {
    pub fn square(half_width: f64, n_points: usize) -> Self {
        Self { x_min: -half_width, x_max: half_width, p_min: -half_width, p_max: half_width, n_points }
    }
}

/// `W(x, p)` sampled on a regular grid; `values[[i, j]]` is at `(x_i, p_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WignerGrid {
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
    pub n_points: usize,
    pub values: Array2<f64>,
    /// Set when the boundary still carries more than 1e-3 of the peak |W|.
    pub truncated_support: bool,
}

impl WignerGrid {
    pub fn x(&self, i: usize) -> f64 {
        axis(self.x_min, self.x_max, self.n_points, i)
    }

    pub fn p(&self, j: usize) -> f64 {
        axis(self.p_min, self.p_max, self.n_points, j)
    }

    fn cell(&self) -> f64 {
        let n = (self.n_points - 1) as f64;
        (self.x_max - self.x_min) / n * (self.p_max - self.p_min) / n
    }

    /// Riemann sum of `W dx dp`.
    pub fn integral(&self) -> f64 {
        self.values.sum() * self.cell()
    }

    /// `(⟨x²⟩ − ⟨x⟩², ⟨p²⟩ − ⟨p⟩²)` from the grid moments.
    pub fn quadrature_variances(&self) -> (f64, f64) {
        let norm = self.values.sum();
        let (mut mx, mut mp, mut mx2, mut mp2) = (0.0, 0.0, 0.0, 0.0);
        for ((i, j), &w) in self.values.indexed_iter() {
            let (x, p) = (self.x(i), self.p(j));
            mx += w * x;
            mp += w * p;
            mx2 += w * x * x;
            mp2 += w * p * p;
        }
        let (mx, mp) = (mx / norm, mp / norm);
        (mx2 / norm - mx * mx, mp2 / norm - mp * mp)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, w| m.max(w.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

fn axis(lo: f64, hi: f64, n: usize, i: usize) -> f64 {
    if n == 1 {
        lo
    } else {
        lo + (hi - lo) * i as f64 / (n - 1) as f64
    }
}

/// `W(x, p) = (1/π) Tr[ρ D(α) Π D(−α)]`, `α = (x + ip)/√2`, `Π = (−1)^{a†a}`,
/// normalized so that `∫W dx dp = 1` and the vacuum peaks at `1/π`.
///
/// Uses `D(α) Π D(−α) = D(2α) Π`. Displacements along the real axis are
/// `exp(s(a† − a)) = U exp(−is(a + a†)) U†` with `U = diag(iⁿ)`, so one
/// diagonalization of the real tridiagonal `a + a†` on an enlarged cavity
/// serves the whole grid; arbitrary directions follow from the rotation
/// `e^{iθ a†a}`.
pub fn wigner(rho_cavity: &DensityMatrix, spec: &WignerSpec) -> Result<WignerGrid> {
    if spec.n_points < 2 || !(spec.x_max > spec.x_min) || !(spec.p_max > spec.p_min) {
        return Err(Error::Config(format!("invalid Wigner grid {spec:?}")));
    }
    let n = rho_cavity.dim();
    let rho = rho_cavity.matrix();
    let s_max = [spec.x_min, spec.x_max]
        .iter()
        .flat_map(|&x| [spec.p_min, spec.p_max].map(|p| (2.0 * (x * x + p * p)).sqrt()))
        .fold(0.0, f64::max);
    let reach = ((n - 1) as f64).sqrt() + s_max;
    let m = n.max((reach * reach + 10.0 * reach + 20.0).ceil() as usize);

    let x_op = DMatrix::from_fn(m, m, |i, j| {
        if j == i + 1 {
            (j as f64).sqrt()
        } else if i == j + 1 {
            (i as f64).sqrt()
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(x_op);
    let lambda = eig.eigenvalues;
    let v = eig.eigenvectors;

    // B_k(d) = iᵈ Σ_{n−m=d} (−1)^m ρ_{mn} V_{mk} V_{nk}, d ∈ [−(N−1), N−1].
    let span = 2 * n - 1;
    let i_pow = |d: i64| match d.rem_euclid(4) {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    };
    let b: Vec<Vec<C64>> = (0..m)
        .into_par_iter()
        .map(|k| {
            let mut row = vec![C64::new(0.0, 0.0); span];
            for mm in 0..n {
                let sign = if mm % 2 == 0 { 1.0 } else { -1.0 };
                let vm = v[(mm, k)] * sign;
                for nn in 0..n {
                    let d = nn as i64 - mm as i64;
                    row[(d + n as i64 - 1) as usize] += rho[[mm, nn]] * (vm * v[(nn, k)]);
                }
            }
            for (slot, z) in row.iter_mut().enumerate() {
                *z *= i_pow(slot as i64 - (n as i64 - 1));
            }
            row
        })
        .collect();

    let np = spec.n_points;
    let rows: Vec<Vec<f64>> = (0..np)
        .into_par_iter()
        .map(|i| {
            let x = axis(spec.x_min, spec.x_max, np, i);
            let mut phases = vec![C64::new(0.0, 0.0); span];
            (0..np)
                .map(|j| {
                    let p = axis(spec.p_min, spec.p_max, np, j);
                    let s = (2.0 * (x * x + p * p)).sqrt();
                    let theta = p.atan2(x);
                    let step = C64::from_polar(1.0, theta);
                    let mut z = C64::from_polar(1.0, -theta * (n as f64 - 1.0));
                    for ph in phases.iter_mut() {
                        *ph = z;
                        z *= step;
                    }
                    let mut acc = C64::new(0.0, 0.0);
                    for (k, bk) in b.iter().enumerate() {
                        let c: C64 = bk.iter().zip(&phases).map(|(a, e)| a * e).sum();
                        acc += C64::from_polar(1.0, -s * lambda[k]) * c;
                    }
                    acc.re / PI
                })
                .collect()
        })
        .collect();
    let values = Array2::from_shape_fn((np, np), |(i, j)| rows[i][j]);

    let mut grid = WignerGrid {
        x_min: spec.x_min,
        x_max: spec.x_max,
        p_min: spec.p_min,
        p_max: spec.p_max,
        n_points: np,
        values,
        truncated_support: false,
    };
    let peak = grid.max_abs();
    let last = np - 1;
    let boundary = (0..np)
        .flat_map(|k| [grid.values[[0, k]], grid.values[[last, k]], grid.values[[k, 0]], grid.values[[k, last]]])
        .fold(0.0, |a: f64, w| a.max(w.abs()));
    if boundary > 1e-3 * peak {
        grid.truncated_support = true;
        log::warn!("Wigner grid truncates the support: boundary |W| = {boundary:.3e}, peak {peak:.3e}");
    }
    Ok(grid)
}

/// Summary of an oscillating trace.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscillationMetrics {
    pub peak_value: f64,
    pub t_peak: f64,
    /// Mean peak-to-peak spacing; `None` when fewer than two peaks are found.
    pub period: Option<f64>,
}

/// Peak by parabolic interpolation and period by peak-to-peak spacing of a
/// trajectory column.
pub fn oscillation_metrics(traj: &Trajectory, column: &str) -> Result<OscillationMetrics> {
    let ys = traj.column(column).ok_or_else(|| Error::Index(format!("no column named {column:?}")))?;
    series_metrics(&traj.times, ys)
}

/// [`oscillation_metrics`] on raw samples.
pub fn series_metrics(times: &[f64], ys: &[f64]) -> Result<OscillationMetrics> {
    if ys.len() != times.len() {
        return Err(Error::DimensionMismatch { expected: times.len(), got: ys.len() });
    }
    if ys.len() < 3 {
        return Err(Error::Degenerate("need at least three samples".into()));
    }
    let imax = argmax(ys, 0, ys.len());
    let (t_peak, peak_value) = refine_peak(times, ys, imax);

    let lo = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mid = 0.5 * (lo + hi);
    let band = 0.1 * (hi - lo);
    // Excursions above the midline with hysteresis; one peak per excursion.
    let mut peaks = Vec::new();
    let mut start: Option<usize> = None;
    for (i, &y) in ys.iter().enumerate() {
        match start {
            None if y > mid + band => start = Some(i),
            Some(s) if y < mid - band => {
                peaks.push(refine_peak(times, ys, argmax(ys, s, i)).0);
                start = None;
            }
            _ => {}
        }
    }
    // A trailing excursion only counts if its maximum is interior.
    if let Some(s) = start {
        let k = argmax(ys, s, ys.len());
        if k + 1 < ys.len() {
            peaks.push(refine_peak(times, ys, k).0);
        }
    }
    let period = (peaks.len() >= 2).then(|| (peaks[peaks.len() - 1] - peaks[0]) / (peaks.len() - 1) as f64);
    Ok(OscillationMetrics { peak_value, t_peak, period })
}

fn argmax(ys: &[f64], from: usize, to: usize) -> usize {
    (from..to).fold(from, |best, k| if ys[k] > ys[best] { k } else { best })
}

fn refine_peak(times: &[f64], ys: &[f64], i: usize) -> (f64, f64) {
    if i == 0 || i + 1 >= ys.len() {
        return (times[i], ys[i]);
    }
    let (y0, y1, y2) = (ys[i - 1], ys[i], ys[i + 1]);
    let denom = y0 - 2.0 * y1 + y2;
    if denom >= 0.0 {
        return (times[i], y1);
    }
    let delta = 0.5 * (y0 - y2) / denom;
    let h = 0.5 * (times[i + 1] - times[i - 1]);
    (times[i] + delta * h, y1 - 0.25 * (y0 - y2) * delta)
}

/// Cavity density matrix of a Fock state, convenient for checks.
pub fn fock_density(n: usize, cavity_dim: usize) -> Result<DensityMatrix> {
    if n >= cavity_dim {
        return Err(Error::Index(format!("Fock state {n} outside cavity dimension {cavity_dim}")));
    }
    let mut v = Array1::zeros(cavity_dim);
    v[n] = C64::new(1.0, 0.0);
    Ok(DensityMatrix::from_pure(&PureState::new(v)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::cavity_squeeze;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn squeezed_population_inverts_squeeze() {
        let space = FockSpace::new(40).unwrap();
        let psi = PureState::basis(space, Qubit::E, 0).unwrap().apply(&squeeze_operator(0.9, space).unwrap()).unwrap();
        assert!((squeezed_population(&psi, 0.9, Qubit::E, 0, space).unwrap() - 1.0).abs() < 1e-8);
        let one = PureState::basis(space, Qubit::G, 1).unwrap();
        assert!(squeezed_population(&one, 0.9, Qubit::G, 0, space).unwrap() < 1e-20);
        assert!(matches!(squeezed_population(&one, 0.0, Qubit::G, 41, space), Err(Error::Index(_))));
    }

    #[test]
    fn fidelity_examples() {
        let space = FockSpace::new(4).unwrap();
        let t = PureState::bell_target(space);
        let perp = PureState::superposition(
            space,
            &[(c(std::f64::consts::FRAC_1_SQRT_2), Qubit::E, 0), (c(std::f64::consts::FRAC_1_SQRT_2), Qubit::G, 3)],
        )
        .unwrap();
        assert!((fidelity(&t, &t).unwrap() - 1.0).abs() < 1e-14);
        assert!(fidelity(&perp, &t).unwrap() < 1e-14);
        let mix = DensityMatrix::mixture(&[(0.5, &t), (0.5, &perp)]).unwrap();
        assert!((fidelity(&mix, &t).unwrap() - 0.5).abs() < 1e-14);
        assert!(fidelity(&t, &PureState::bell_target(FockSpace::new(5).unwrap())).is_err());
    }

    #[test]
    fn concurrence_examples() {
        let space = FockSpace::new(5).unwrap();
        let product = PureState::basis(space, Qubit::E, 0).unwrap();
        let bell = PureState::bell_target(space);
        let partial =
            PureState::superposition(space, &[(c(0.9f64.sqrt()), Qubit::E, 0), (c(0.1f64.sqrt()), Qubit::G, 3)])
                .unwrap();
        assert!(concurrence(&product, space).unwrap().value < 1e-9);
        assert!((concurrence(&bell, space).unwrap().value - 1.0).abs() < 1e-9);
        assert!((concurrence(&partial, space).unwrap().value - 0.6).abs() < 1e-9);

        // The projected mixed-state measure agrees on states inside the subspace.
        let mixed = |s: &PureState| projected_concurrence(&DensityMatrix::from_pure(s), space).unwrap();
        assert!(mixed(&product).value < 1e-7);
        assert!((mixed(&bell).value - 1.0).abs() < 1e-7);
        assert!((mixed(&partial).value - 0.6).abs() < 1e-7);

        let dephased = DensityMatrix::mixture(&[
            (0.5, &PureState::basis(space, Qubit::E, 0).unwrap()),
            (0.5, &PureState::basis(space, Qubit::G, 3).unwrap()),
        ])
        .unwrap();
        assert!(concurrence(&dephased, space).unwrap().value < 1e-7);

        let outside = DensityMatrix::from_pure(&PureState::basis(space, Qubit::G, 1).unwrap());
        let res = concurrence(&outside, space).unwrap();
        assert!(res.warning.is_some());
        assert!((res.discarded_weight - 1.0).abs() < 1e-12);
    }

    #[test]
    fn photon_number_examples() {
        let space = FockSpace::new(5).unwrap();
        assert_eq!(photon_number(&PureState::basis(space, Qubit::G, 0).unwrap(), space).unwrap(), 0.0);
        assert!((photon_number(&PureState::basis(space, Qubit::G, 3).unwrap(), space).unwrap() - 3.0).abs() < 1e-14);
        assert!((photon_number(&PureState::bell_target(space), space).unwrap() - 1.5).abs() < 1e-14);
    }

    #[test]
    fn squeezed_vacuum_occupancy() {
        let space = FockSpace::new(40).unwrap();
        for &r in &[0.2, 0.5, 0.9, 1.0] {
            let psi = PureState::basis(space, Qubit::G, 0).unwrap().apply(&squeeze_operator(r, space).unwrap()).unwrap();
            let n = photon_number(&psi, space).unwrap();
            let expected = r.sinh().powi(2);
            assert!((n - expected).abs() <= 5e-3 * expected, "r = {r}: {n} vs {expected}");
        }
    }

    /// `W_n(x, p) = ((−1)ⁿ/π) e^{−(x²+p²)} L_n(2(x²+p²))`
    fn fock_wigner(n: usize, x: f64, p: f64) -> f64 {
        let u = 2.0 * (x * x + p * p);
        let (mut l0, mut l1) = (1.0, 1.0 - u);
        let l = if n == 0 {
            l0
        } else {
            for k in 1..n {
                let l2 = ((2 * k + 1) as f64 - u) * l1 / (k + 1) as f64 - k as f64 * l0 / (k + 1) as f64;
                l0 = l1;
                l1 = l2;
            }
            l1
        };
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        sign / PI * (-(x * x + p * p)).exp() * l
    }

    #[test]
    fn wigner_matches_laguerre_closed_form() {
        for n in [0usize, 1, 3] {
            let rho = fock_density(n, 8).unwrap();
            let spec = WignerSpec::square(4.0, 21);
            let w = wigner(&rho, &spec).unwrap();
            for i in 0..21 {
                for j in 0..21 {
                    let (x, p) = (w.x(i), w.p(j));
                    assert!((w.values[[i, j]] - fock_wigner(n, x, p)).abs() < 1e-9, "n={n} ({x},{p})");
                }
            }
        }
    }

    #[test]
    fn wigner_reference_points_and_normalization() {
        let vac = wigner(&fock_density(0, 6).unwrap(), &WignerSpec::square(5.0, 101)).unwrap();
        assert!((vac.values[[50, 50]] - 1.0 / PI).abs() < 1e-3);
        assert!((vac.integral() - 1.0).abs() < 1e-2);
        assert!(!vac.truncated_support);
        let three = wigner(&fock_density(3, 6).unwrap(), &WignerSpec::square(5.0, 101)).unwrap();
        assert!((three.values[[50, 50]] + 1.0 / PI).abs() < 1e-3);
        assert!((three.integral() - 1.0).abs() < 1e-2);
        assert!(three.max_abs() <= 1.0 / PI + 1e-6);
        let tight = wigner(&fock_density(3, 6).unwrap(), &WignerSpec::square(1.0, 11)).unwrap();
        assert!(tight.truncated_support);
    }

    #[test]
    fn squeezed_vacuum_wigner_variances() {
        let r = 0.9;
        let s = cavity_squeeze(r, 41).unwrap();
        let v = s.column(0).to_owned();
        let rho = DensityMatrix::from_pure(&PureState::normalized(v).unwrap());
        let spec = WignerSpec { x_min: -8.0, x_max: 8.0, p_min: -2.0, p_max: 2.0, n_points: 161 };
        let w = wigner(&rho, &spec).unwrap();
        let (vx, vp) = w.quadrature_variances();
        // With S(r) = exp[(r/2)(a†² − a²)] the x quadrature is stretched.
        assert!((vx / 0.5 / (2.0 * r).exp() - 1.0).abs() < 0.02, "{vx}");
        assert!((vp / 0.5 / (-2.0 * r).exp() - 1.0).abs() < 0.02, "{vp}");
        assert!((w.integral() - 1.0).abs() < 1e-2);
    }

    #[test]
    fn metrics_on_known_signal() {
        let omega = 0.37;
        let times: Vec<f64> = (0..4000).map(|k| k as f64 * 0.01).collect();
        let ys: Vec<f64> = times.iter().map(|t| (omega * t).sin().powi(2)).collect();
        let m = series_metrics(&times, &ys).unwrap();
        let period = m.period.unwrap();
        assert!((period / (PI / omega) - 1.0).abs() < 1e-3, "{period}");
        assert!((m.peak_value - 1.0).abs() < 1e-6);
        let phase = (m.t_peak * omega).rem_euclid(PI);
        assert!((phase - PI / 2.0).abs() < 1e-3, "{phase}");

        let short: Vec<f64> = times[..500].to_vec();
        let ys_short: Vec<f64> = short.iter().map(|t| (omega * t).sin().powi(2)).collect();
        let m = series_metrics(&short, &ys_short).unwrap();
        assert!(m.period.is_none());
        assert!((m.peak_value - 1.0).abs() < 1e-6);
    }
}
