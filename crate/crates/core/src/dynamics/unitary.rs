use ndarray::Array1;
use num_complex::Complex64 as C64;

use super::{KeepStates, Probe, Schedule, Snapshot, StoredState, TimeGrid, Trajectory};
use crate::error::{Error, Result};
use crate::qcore::{hermitian_eigs, Eigen, PureState, QOperator, I, ZERO};

/// Exact propagation under a static Hamiltonian,
/// `ψ(t) = V e^{−iΛt} V† ψ₀`.
#[derive(Clone, Debug)]
pub struct StaticPropagator {
    eig: Eigen,
    coeffs: Vec<C64>,
}

impl StaticPropagator {
    pub fn new(h: &QOperator, psi0: &PureState) -> Result<Self> {
        if h.dim() != psi0.dim() {
            return Err(Error::DimensionMismatch { expected: h.dim(), got: psi0.dim() });
        }
        let eig = hermitian_eigs(h)?;
        let v = psi0.amplitudes();
        let coeffs = (0..eig.dim())
            .map(|j| (0..eig.dim()).map(|k| eig.vectors[[k, j]].conj() * v[k]).sum())
            .collect();
        Ok(Self { eig, coeffs })
    }

    pub fn eigen(&self) -> &Eigen {
        &self.eig
    }

    pub fn state_at(&self, t: f64) -> PureState {
        let n = self.eig.dim();
        let phased: Vec<C64> =
            self.coeffs.iter().zip(&self.eig.values).map(|(c, &l)| c * (-I * l * t).exp()).collect();
        let mut out = Array1::zeros(n);
        for k in 0..n {
            let mut acc = ZERO;
            for j in 0..n {
                acc += self.eig.vectors[[k, j]] * phased[j];
            }
            out[k] = acc;
        }
        PureState::from_raw(out)
    }

    /// `⟨k|ψ(t)⟩` at O(dim) cost.
    pub fn amplitude_at(&self, k: usize, t: f64) -> C64 {
        self.coeffs
            .iter()
            .zip(&self.eig.values)
            .enumerate()
            .map(|(j, (c, &l))| self.eig.vectors[[k, j]] * c * (-I * l * t).exp())
            .sum()
    }

    /// Population of basis state `k` on many times, reusing per-eigenvalue weights.
    pub fn population_series(&self, k: usize, times: &[f64]) -> Vec<f64> {
        let w: Vec<C64> = self.coeffs.iter().enumerate().map(|(j, c)| self.eig.vectors[[k, j]] * c).collect();
        times
            .iter()
            .map(|&t| {
                w.iter().zip(&self.eig.values).map(|(wj, &l)| wj * (-I * l * t).exp()).sum::<C64>().norm_sqr()
            })
            .collect()
    }

    /// Population of basis state `k` at `t0 + j·dt`, `j = 0..n`, advancing the
    /// phases by recurrence and re-anchoring them every 1024 samples.
    pub fn population_grid(&self, k: usize, t0: f64, dt: f64, n: usize) -> Vec<f64> {
        let w: Vec<C64> = self.coeffs.iter().enumerate().map(|(j, c)| self.eig.vectors[[k, j]] * c).collect();
        let step: Vec<C64> = self.eig.values.iter().map(|&l| (-I * l * dt).exp()).collect();
        let mut phase = vec![ZERO; w.len()];
        let mut out = Vec::with_capacity(n);
        for s in 0..n {
            if s % 1024 == 0 {
                let t = t0 + s as f64 * dt;
                for (p, &l) in phase.iter_mut().zip(&self.eig.values) {
                    *p = (-I * l * t).exp();
                }
            }
            let mut acc = ZERO;
            for ((p, wj), st) in phase.iter_mut().zip(&w).zip(&step) {
                acc += wj * *p;
                *p *= st;
            }
            out.push(acc.norm_sqr());
        }
        out
    }
}

pub fn evolve_static(
    h: &QOperator,
    psi0: &PureState,
    grid: &TimeGrid,
    probes: &[Probe<'_, PureState>],
    keep: KeepStates,
) -> Result<Trajectory> {
    grid.validate()?;
    let prop = StaticPropagator::new(h, psi0)?;
    let mut traj = Trajectory::with_columns(probes.iter().map(|p| p.name.clone()));
    let n = grid.n_steps();
    let mut stored = 0;
    for k in 0..=n {
        if !grid.is_stored(k) {
            continue;
        }
        let t = grid.time(k);
        let psi = prop.state_at(t - grid.t_start);
        let drift = (psi.norm() - 1.0).abs();
        if drift > 1e-10 {
            return Err(Error::Contract(format!("static propagation lost norm: {drift:.3e}")));
        }
        traj.norm_drift = traj.norm_drift.max(drift);
        traj.record(t, &psi, probes);
        if keep.keeps(stored, k == n) {
            traj.snapshots.push(Snapshot { t, state: StoredState::Pure(psi) });
        }
        stored += 1;
    }
    Ok(traj)
}

/// Fixed-step fourth-order Runge-Kutta on `dψ/dt = −iH(t)ψ`.
pub fn evolve_time_dependent(
    h: &Schedule,
    psi0: &PureState,
    grid: &TimeGrid,
    probes: &[Probe<'_, PureState>],
    keep: KeepStates,
) -> Result<Trajectory> {
    grid.validate()?;
    if h.dim() != psi0.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), got: psi0.dim() });
    }
    let dt = grid.step();
    let h_max = h.max_abs_over(grid.t_start, grid.t_end);
    if dt * h_max > 0.2 + 1e-12 {
        return Err(Error::StepSize(format!(
            "dt * ||H||_max = {:.3} exceeds 0.2; use dt <= {:.3e}",
            dt * h_max,
            0.2 / h_max
        )));
    }

    let dim = h.dim();
    let mut psi: Vec<C64> = psi0.amplitudes().to_vec();
    let mut k1 = vec![ZERO; dim];
    let mut k2 = vec![ZERO; dim];
    let mut k3 = vec![ZERO; dim];
    let mut k4 = vec![ZERO; dim];
    let mut tmp = vec![ZERO; dim];

    let mut traj = Trajectory::with_columns(probes.iter().map(|p| p.name.clone()));
    let n = grid.n_steps();
    let mut stored = 0;
    for step in 0..=n {
        let t = grid.time(step);
        if grid.is_stored(step) {
            let state = PureState::from_raw(Array1::from(psi.clone()));
            let drift = (state.norm() - 1.0).abs();
            if drift > 1e-5 {
                return Err(Error::StepSize(format!(
                    "norm drift {drift:.3e} at t = {t}; reduce dt below {dt:.3e}"
                )));
            }
            traj.norm_drift = traj.norm_drift.max(drift);
            traj.record(t, &state, probes);
            if keep.keeps(stored, step == n) {
                traj.snapshots.push(Snapshot { t, state: StoredState::Pure(state) });
            }
            stored += 1;
        }
        if step == n {
            break;
        }

        let half = 0.5 * dt;
        k1.fill(ZERO);
        h.apply_minus_i(t, &psi, &mut k1);
        axpy(&psi, half, &k1, &mut tmp);
        k2.fill(ZERO);
        h.apply_minus_i(t + half, &tmp, &mut k2);
        axpy(&psi, half, &k2, &mut tmp);
        k3.fill(ZERO);
        h.apply_minus_i(t + half, &tmp, &mut k3);
        axpy(&psi, dt, &k3, &mut tmp);
        k4.fill(ZERO);
        h.apply_minus_i(t + dt, &tmp, &mut k4);
        let w = dt / 6.0;
        for i in 0..dim {
            psi[i] += w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
    if traj.norm_drift > 1e-6 {
        log::warn!("norm drift {:.3e} above 1e-6; consider a smaller dt", traj.norm_drift);
    }
    Ok(traj)
}

fn axpy(x: &[C64], a: f64, y: &[C64], out: &mut [C64]) {
    for ((o, xi), yi) in out.iter_mut().zip(x).zip(y) {
        *o = xi + a * yi;
    }
}
