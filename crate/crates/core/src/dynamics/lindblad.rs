use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::{Coefficient, KeepStates, Probe, Schedule, Snapshot, StoredState, TimeGrid, Trajectory};
use crate::error::{Error, Result};
use crate::qcore::{build_operators, DensityMatrix, FockSpace};

/// Zero-temperature decay rates: cavity `κ` and qubit relaxation `γ`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DissipationParams {
    pub kappa: f64,
    pub gamma: f64,
}

impl DissipationParams {
    pub fn new(kappa: f64, gamma: f64) -> Result<Self> {
        let d = Self { kappa, gamma };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.kappa >= 0.0) || !(self.gamma >= 0.0) {
            return Err(Error::Config(format!("decay rates must be non-negative: {self:?}")));
        }
        Ok(())
    }

    pub fn is_closed(&self) -> bool {
        self.kappa == 0.0 && self.gamma == 0.0
    }
}

/// Sparse matrix whose values are a time-dependent combination of fixed
/// components sharing one union pattern.
struct SparseCombination {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    parts: Vec<(Coefficient, Vec<C64>)>,
    constant: Vec<C64>,
    vals: Vec<C64>,
}

impl SparseCombination {
    fn new(dim: usize, parts: Vec<(Coefficient, &Array2<C64>)>, constant: &Array2<C64>) -> Self {
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let zero = C64::new(0.0, 0.0);
        for i in 0..dim {
            for j in 0..dim {
                if constant[[i, j]] != zero || parts.iter().any(|(_, m)| m[[i, j]] != zero) {
                    cols.push(j);
                }
            }
            row_ptr.push(cols.len());
        }
        let gather = |m: &Array2<C64>| -> Vec<C64> {
            (0..dim).flat_map(|i| (row_ptr[i]..row_ptr[i + 1]).map(move |e| (i, e))).map(|(i, e)| m[[i, cols[e]]]).collect()
        };
        let parts = parts.into_iter().map(|(c, m)| (c, gather(m))).collect();
        let constant = gather(constant);
        let vals = constant.clone();
        Self { row_ptr, cols, parts, constant, vals }
    }

    fn update(&mut self, t: f64) {
        self.vals.copy_from_slice(&self.constant);
        for (coeff, v) in &self.parts {
            let c = coeff.at(t);
            for (out, x) in self.vals.iter_mut().zip(v) {
                *out += c * x;
            }
        }
    }

    /// `out = alpha · A x` for row-major `dim × dim` matrices.
    fn mul_mat(&self, alpha: C64, x: &[C64], out: &mut [C64], dim: usize) {
        out.fill(C64::new(0.0, 0.0));
        for i in 0..self.row_ptr.len() - 1 {
            let dst = &mut out[i * dim..(i + 1) * dim];
            for e in self.row_ptr[i]..self.row_ptr[i + 1] {
                let v = alpha * self.vals[e];
                let src = &x[self.cols[e] * dim..(self.cols[e] + 1) * dim];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += v * s;
                }
            }
        }
    }
}

/// Right-hand side of the master equation written with the non-Hermitian
/// generator `K = H − (i/2) Σ r L†L`:
/// `dρ/dt = X + X† + Σ r L (Lρ)†` with `X = −iKρ`, valid for Hermitian `ρ`.
struct Liouvillian {
    dim: usize,
    k: SparseCombination,
    jumps: Vec<(f64, SparseCombination)>,
    work: Vec<C64>,
    work2: Vec<C64>,
}

impl Liouvillian {
    fn new(h: &Schedule, diss: DissipationParams, space: FockSpace) -> Self {
        let dim = h.dim();
        let o = build_operators(space);
        let mut damping = Array2::<C64>::zeros((dim, dim));
        let mut jumps = Vec::new();
        for (rate, l) in [(diss.kappa, &o.a), (diss.gamma, &o.sm)] {
            if rate > 0.0 {
                let ldl = (&l.dagger() * l).into_matrix();
                damping = damping + ldl * C64::new(0.0, -0.5 * rate);
                jumps.push((rate, SparseCombination::new(dim, Vec::new(), l.matrix())));
            }
        }
        let parts = h.terms().map(|(op, c)| (c.clone(), op.matrix())).collect();
        let k = SparseCombination::new(dim, parts, &damping);
        Self { dim, k, jumps, work: vec![C64::new(0.0, 0.0); dim * dim], work2: vec![C64::new(0.0, 0.0); dim * dim] }
    }

    fn rhs(&mut self, t: f64, rho: &[C64], out: &mut [C64]) {
        let d = self.dim;
        self.k.update(t);
        self.k.mul_mat(C64::new(0.0, -1.0), rho, &mut self.work, d);
        for i in 0..d {
            for j in 0..d {
                out[i * d + j] = self.work[i * d + j] + self.work[j * d + i].conj();
            }
        }
        for (rate, l) in &self.jumps {
            l.mul_mat(C64::new(1.0, 0.0), rho, &mut self.work, d);
            for i in 0..d {
                for j in 0..d {
                    self.work2[i * d + j] = self.work[j * d + i].conj();
                }
            }
            l.mul_mat(C64::new(*rate, 0.0), &self.work2, &mut self.work, d);
            for (o, w) in out.iter_mut().zip(&self.work) {
                *o += w;
            }
        }
    }
}

/// Fixed-step RK4 on
/// `dρ/dt = −i[H(t), ρ] + κ D[a]ρ + γ D[σ_−]ρ`, `D[L]ρ = LρL† − ½{L†L, ρ}`.
/// The collapse operators act on the composite space described by `space`.
pub fn evolve_lindblad(
    h: &Schedule,
    rho0: &DensityMatrix,
    diss: DissipationParams,
    space: FockSpace,
    grid: &TimeGrid,
    probes: &[Probe<'_, DensityMatrix>],
    keep: KeepStates,
) -> Result<Trajectory> {
    grid.validate()?;
    diss.validate()?;
    if h.dim() != rho0.dim() || space.dim() != rho0.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), got: rho0.dim() });
    }
    let dim = rho0.dim();
    let mut liou = Liouvillian::new(h, diss, space);
    let dt = grid.step();
    let mut rho: Vec<C64> = rho0.matrix().iter().copied().collect();
    let zeros = || vec![C64::new(0.0, 0.0); dim * dim];
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (zeros(), zeros(), zeros(), zeros(), zeros());

    let mut traj = Trajectory::with_columns(probes.iter().map(|p| p.name.clone()));
    let mut min_eig = f64::INFINITY;
    let n = grid.n_steps();
    let mut stored = 0;
    for step in 0..=n {
        let t = grid.time(step);
        if grid.is_stored(step) {
            let mat = Array2::from_shape_vec((dim, dim), rho.clone())
                .map_err(|e| Error::Contract(e.to_string()))?;
            let state = DensityMatrix::from_raw(mat);
            let drift = (state.trace() - 1.0).abs();
            if drift > 1e-6 {
                return Err(Error::StepSize(format!(
                    "trace drift {drift:.3e} at t = {t}; reduce dt below {dt:.3e}"
                )));
            }
            let lam = state.min_eigenvalue()?;
            if lam < -1e-6 {
                return Err(Error::StepSize(format!(
                    "density matrix eigenvalue {lam:.3e} at t = {t}; reduce dt below {dt:.3e}"
                )));
            }
            min_eig = min_eig.min(lam);
            traj.norm_drift = traj.norm_drift.max(drift);
            traj.record(t, &state, probes);
            if keep.keeps(stored, step == n) {
                traj.snapshots.push(Snapshot { t, state: StoredState::Mixed(state) });
            }
            stored += 1;
        }
        if step == n {
            break;
        }

        let half = 0.5 * dt;
        liou.rhs(t, &rho, &mut k1);
        combine(&rho, half, &k1, &mut tmp);
        liou.rhs(t + half, &tmp, &mut k2);
        combine(&rho, half, &k2, &mut tmp);
        liou.rhs(t + half, &tmp, &mut k3);
        combine(&rho, dt, &k3, &mut tmp);
        liou.rhs(t + dt, &tmp, &mut k4);
        let w = dt / 6.0;
        for i in 0..rho.len() {
            rho[i] += w * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        symmetrize(&mut rho, dim);
    }
    traj.min_eigenvalue = Some(min_eig);
    Ok(traj)
}

fn combine(x: &[C64], a: f64, y: &[C64], out: &mut [C64]) {
    for ((o, xi), yi) in out.iter_mut().zip(x).zip(y) {
        *o = xi + a * yi;
    }
}

/// `ρ ← (ρ + ρ†)/2`
fn symmetrize(rho: &mut [C64], n: usize) {
    for i in 0..n {
        rho[i * n + i].im = 0.0;
        for j in (i + 1)..n {
            let avg = 0.5 * (rho[i * n + j] + rho[j * n + i].conj());
            rho[i * n + j] = avg;
            rho[j * n + i] = avg.conj();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::evolve_static;
    use crate::model::{build_anisotropic_rabi, SqueezedParams};
    use crate::qcore::{PureState, QOperator, QuantumState, Qubit};

    #[test]
    fn rates_are_validated() {
        assert!(DissipationParams::new(-1e-3, 0.0).is_err());
        assert!(DissipationParams::new(0.0, f64::NAN).is_err());
        assert!(DissipationParams::new(0.0, 0.0).unwrap().is_closed());
    }

    #[test]
    fn cavity_decay_is_exponential() {
        let space = FockSpace::new(4).unwrap();
        let o = build_operators(space);
        let rho0 = DensityMatrix::from_pure(&PureState::basis(space, Qubit::G, 1).unwrap());
        let kappa = 0.1;
        let grid = TimeGrid::new(0.0, 20.0, 0.01, 50).unwrap();
        let n_op = o.n_op.clone();
        let probes = [Probe::new("n", move |_, r: &DensityMatrix| r.expect(&n_op).re)];
        let h = Schedule::constant(&QOperator::zeros(space.dim())).unwrap();
        let traj = evolve_lindblad(
            &h,
            &rho0,
            DissipationParams::new(kappa, 0.0).unwrap(),
            space,
            &grid,
            &probes,
            KeepStates::FinalOnly,
        )
        .unwrap();
        for (t, n) in traj.times.iter().zip(traj.column("n").unwrap()) {
            assert!((n - (-kappa * t).exp()).abs() < 1e-6, "t = {t}: {n}");
        }
        assert!(traj.norm_drift < 1e-10);
    }

    #[test]
    fn closed_limit_matches_unitary_evolution() {
        let space = FockSpace::new(6).unwrap();
        let p = SqueezedParams::new(0.05, 0.5, 0.34, 1.0);
        let h = build_anisotropic_rabi(&p, space).unwrap();
        let psi0 = PureState::basis(space, Qubit::E, 0).unwrap();
        let grid = TimeGrid::new(0.0, 30.0, 0.01, 100).unwrap();
        let exact = evolve_static(&h, &psi0, &grid, &[], KeepStates::FinalOnly).unwrap();
        let open = evolve_lindblad(
            &Schedule::constant(&h).unwrap(),
            &DensityMatrix::from_pure(&psi0),
            DissipationParams::new(0.0, 0.0).unwrap(),
            space,
            &grid,
            &[],
            KeepStates::FinalOnly,
        )
        .unwrap();
        let target = DensityMatrix::from_pure(exact.final_pure().unwrap());
        let diff = open.final_mixed().unwrap().matrix() - target.matrix();
        let eig = crate::qcore::hermitian_eigs(&QOperator::new(diff).into_hermitian().unwrap()).unwrap();
        let trace_distance: f64 = 0.5 * eig.values.iter().map(|l| l.abs()).sum::<f64>();
        assert!(trace_distance < 1e-6, "{trace_distance}");
    }

    #[test]
    fn qubit_relaxation() {
        let space = FockSpace::new(3).unwrap();
        let rho0 = DensityMatrix::from_pure(&PureState::basis(space, Qubit::E, 2).unwrap());
        let gamma = 0.2;
        let grid = TimeGrid::new(0.0, 5.0, 0.01, 500).unwrap();
        let h = Schedule::constant(&QOperator::zeros(space.dim())).unwrap();
        let k = space.index(Qubit::E, 2);
        let probes = [Probe::new("pe", move |_, r: &DensityMatrix| r.population(k))];
        let traj =
            evolve_lindblad(&h, &rho0, DissipationParams::new(0.0, gamma).unwrap(), space, &grid, &probes, KeepStates::All)
                .unwrap();
        let last = *traj.column("pe").unwrap().last().unwrap();
        assert!((last - (-gamma * 5.0).exp()).abs() < 1e-8);
        assert_eq!(traj.snapshots.len(), 2);
        assert!(traj.min_eigenvalue.unwrap() > -1e-12);
    }
}
