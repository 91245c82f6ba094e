use serde::{Deserialize, Serialize};

use super::{evolve_time_dependent, stable_dt, KeepStates, Schedule, TimeGrid, Trajectory};
use crate::error::{Error, Result};
use crate::model::{anisotropic_rabi_parts, SqueezedParams};
use crate::observables::{concurrence, fidelity, photon_number};
use crate::qcore::{hermitian_eigs, FockSpace, PureState, QuantumState, Qubit};

/// Linear cavity-frequency ramp `ω_c(t) = ω_c(0) + v t` on `[0, t_end]`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepProtocol {
    pub omega_c_start: f64,
    pub v: f64,
    pub t_end: f64,
    /// `Ω_eff² / v`
    pub eta: f64,
    pub dt: f64,
    pub store_every: usize,
}

impl SweepProtocol {
    /// Ramp from `omega_c_start` that halts at `omega_c_stop`.
    pub fn new(
        omega_c_start: f64,
        omega_c_stop: f64,
        v: f64,
        omega_eff: f64,
        dt: f64,
        store_every: usize,
    ) -> Result<Self> {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Config(format!("sweep rate must be positive, got {v}")));
        }
        let t_end = (omega_c_stop - omega_c_start) / v;
        if !(t_end > 0.0) {
            return Err(Error::Config(format!(
                "sweep must run upward: start {omega_c_start} is not below stop {omega_c_stop}"
            )));
        }
        let eta = omega_eff * omega_eff / v;
        if !(eta > 0.0) {
            return Err(Error::Config("adiabatic parameter must be positive".into()));
        }
        Ok(Self { omega_c_start, v, t_end, eta, dt, store_every })
    }

    pub fn omega_c(&self, t: f64) -> f64 {
        self.omega_c_start + self.v * t
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(0.0, self.t_end, self.dt, self.store_every)
    }
}

/// `H(t) = ω_c(t) a†a + (ω_q/2)σ_z + λ₁(a†σ_+ + aσ_−) + λ₂(aσ_+ + a†σ_−)`
pub fn sweep_schedule(p: &SqueezedParams, proto: &SweepProtocol, space: FockSpace) -> Result<Schedule> {
    let (rest, n_op) = anisotropic_rabi_parts(p, space)?;
    let (w0, v) = (proto.omega_c_start, proto.v);
    Schedule::constant(&rest)?.with_fn(n_op, move |t| w0 + v * t)
}

/// How the tracked branch is chosen at the first time slice.
#[derive(Clone, Debug)]
pub enum BranchSeed {
    /// Eigenstate index in ascending energy order (4 = fourth excited).
    Index(usize),
    /// Eigenstate with the largest overlap onto this state.
    Overlap(PureState),
}

#[derive(Clone, Debug, Default)]
pub struct TrackedBranch {
    pub times: Vec<f64>,
    pub states: Vec<PureState>,
    pub energies: Vec<f64>,
    /// Position of the branch in the ascending spectrum at each slice.
    pub indices: Vec<usize>,
}

/// Follows one eigenstate of `H(t)` across the stored points of `grid` by
/// maximal overlap between consecutive slices.
pub fn instantaneous_eigenstate_track(h: &Schedule, grid: &TimeGrid, seed: BranchSeed) -> Result<TrackedBranch> {
    grid.validate()?;
    let times: Vec<f64> = (0..=grid.n_steps()).filter(|&k| grid.is_stored(k)).map(|k| grid.time(k)).collect();
    track_at_times(h, &times, seed)
}

/// Same as [`instantaneous_eigenstate_track`] on an explicit list of times.
pub fn track_at_times(h: &Schedule, times: &[f64], seed: BranchSeed) -> Result<TrackedBranch> {
    let mut branch = TrackedBranch::default();
    let mut prev: Option<PureState> = None;
    for &t in times {
        let eig = hermitian_eigs(&h.at(t))?;
        let idx = match (&prev, &seed) {
            (None, BranchSeed::Index(i)) => {
                if *i >= eig.dim() {
                    return Err(Error::Index(format!("branch index {i} outside dimension {}", eig.dim())));
                }
                *i
            }
            (None, BranchSeed::Overlap(target)) => best_overlap(&eig, target)?.0,
            (Some(p), _) => {
                let (i, w) = best_overlap(&eig, p)?;
                if w < 0.5 {
                    return Err(Error::Tracking(format!("branch overlap {w:.3} below 0.5 at t = {t}")));
                }
                i
            }
        };
        let e = eig.values[idx];
        let neighbour_gap = [idx.checked_sub(1), Some(idx + 1)]
            .into_iter()
            .flatten()
            .filter(|&j| j < eig.dim())
            .map(|j| (eig.values[j] - e).abs())
            .fold(f64::INFINITY, f64::min);
        if neighbour_gap <= 1e-12 {
            return Err(Error::Degenerate(format!("tracked level degenerate at t = {t}")));
        }
        let mut state = eig.state(idx);
        if let Some(p) = &prev {
            let ov = p.inner(&state);
            let phase = ov / ov.norm();
            state = PureState::from_raw(state.amplitudes().mapv(|z| z * phase.conj()));
        }
        branch.times.push(t);
        branch.energies.push(e);
        branch.indices.push(idx);
        branch.states.push(state.clone());
        prev = Some(state);
    }
    Ok(branch)
}

fn best_overlap(eig: &crate::qcore::Eigen, target: &PureState) -> Result<(usize, f64)> {
    if target.dim() != eig.dim() {
        return Err(Error::DimensionMismatch { expected: eig.dim(), got: target.dim() });
    }
    (0..eig.dim())
        .map(|i| (i, eig.state(i).overlap_with(target)))
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .ok_or_else(|| Error::Degenerate("empty spectrum".into()))
}

/// Adiabatic passage through the three-photon resonance. The run starts in
/// the instantaneous eigenstate closest to `|e,0⟩` and stops at `t_end`.
///
/// Columns: `omega_c`, `pop_e0`, `pop_g3`, `fidelity` (against
/// `(|e,0⟩ − |g,3⟩)/√2`), `photon_number`, `concurrence`,
/// `adiabatic_projection`, `branch_index`, `branch_energy`. The initial and
/// final states are kept as snapshots.
pub fn adiabatic_sweep(p: &SqueezedParams, proto: &SweepProtocol, space: FockSpace) -> Result<Trajectory> {
    if proto.eta < 1.0 {
        log::warn!("adiabatic parameter eta = {:.3} < 1: transfer will be partly diabatic", proto.eta);
    }
    let schedule = sweep_schedule(p, proto, space)?;
    let dt = stable_dt(&schedule, 0.0, proto.t_end, proto.dt);
    if dt < proto.dt {
        log::info!("time step reduced from {} to {dt:.4e} by the accuracy guard", proto.dt);
    }
    let grid = TimeGrid::new(0.0, proto.t_end, dt, proto.store_every)?;

    let e0 = PureState::basis(space, Qubit::E, 0)?;
    let eig0 = hermitian_eigs(&schedule.at(0.0))?;
    let (i0, _) = best_overlap(&eig0, &e0)?;
    let psi0 = eig0.state(i0);

    let mut traj = evolve_time_dependent(&schedule, &psi0, &grid, &[], KeepStates::All)?;
    let branch = track_at_times(&schedule, &traj.times, BranchSeed::Index(i0))?;

    let target = PureState::bell_target(space);
    let k_e0 = space.index(Qubit::E, 0);
    let k_g3 = space.index(Qubit::G, 3);
    let n = traj.times.len();
    let mut cols: [Vec<f64>; 9] = Default::default();
    for (k, (t, psi)) in traj.pure_states().enumerate() {
        cols[0].push(proto.omega_c(t));
        cols[1].push(psi.amplitude(k_e0).norm_sqr());
        cols[2].push(psi.amplitude(k_g3).norm_sqr());
        cols[3].push(fidelity(psi, &target)?);
        cols[4].push(photon_number(psi, space)?);
        cols[5].push(concurrence(psi, space)?.value);
        cols[6].push(branch.states[k].overlap_with(psi));
        cols[7].push(branch.indices[k] as f64);
        cols[8].push(branch.energies[k]);
    }
    debug_assert_eq!(cols[0].len(), n);
    let names = [
        "omega_c",
        "pop_e0",
        "pop_g3",
        "fidelity",
        "photon_number",
        "concurrence",
        "adiabatic_projection",
        "branch_index",
        "branch_energy",
    ];
    for (name, values) in names.iter().zip(cols) {
        traj.push_column(*name, values)?;
    }

    let first = traj.snapshots.first().cloned();
    let last = traj.snapshots.last().cloned();
    traj.snapshots = first.into_iter().chain(last).collect();
    Ok(traj)
}
