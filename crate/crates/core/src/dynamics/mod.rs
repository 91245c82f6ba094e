//! Closed- and open-system propagation.

mod lindblad;
mod schedule;
mod sweep;
mod unitary;

pub use lindblad::{evolve_lindblad, DissipationParams};
pub use schedule::{Coefficient, Schedule};
pub use sweep::{
    adiabatic_sweep, instantaneous_eigenstate_track, sweep_schedule, track_at_times, BranchSeed,
    SweepProtocol, TrackedBranch,
};
pub use unitary::{evolve_static, evolve_time_dependent, StaticPropagator};

use crate::error::{Error, Result};
use crate::qcore::{DensityMatrix, PureState};

/// Uniform time grid. Observable columns are sampled every `store_every`
/// integration steps, always including the first and last step.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct TimeGrid {
    pub t_start: f64,
    pub t_end: f64,
    pub dt: f64,
    pub store_every: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, dt: f64, store_every: usize) -> Result<Self> {
        let grid = Self { t_start, t_end, dt, store_every };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0) || !(self.t_end > self.t_start) || self.store_every == 0 {
            return Err(Error::Config(format!("invalid time grid {self:?}")));
        }
        if (self.t_end - self.t_start) / self.dt > 1e8 {
            return Err(Error::Config("time grid exceeds 1e8 steps".into()));
        }
        Ok(())
    }

    /// Number of steps; the step is shrunk slightly so the grid lands on `t_end`.
    pub fn n_steps(&self) -> usize {
        (((self.t_end - self.t_start) / self.dt - 1e-9).ceil() as usize).max(1)
    }

    pub fn step(&self) -> f64 {
        (self.t_end - self.t_start) / self.n_steps() as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t_start + k as f64 * self.step()
    }

    pub(crate) fn is_stored(&self, k: usize) -> bool {
        k % self.store_every == 0 || k == self.n_steps()
    }

    pub fn halved(&self) -> Self {
        Self { dt: 0.5 * self.dt, store_every: 2 * self.store_every, ..*self }
    }
}

/// Largest step not exceeding `dt` that satisfies the RK4 accuracy guard
/// `dt · max‖H(t)‖ ≤ 0.2` on `[t0, t1]`.
pub fn stable_dt(h: &Schedule, t0: f64, t1: f64, dt: f64) -> f64 {
    let h_max = h.max_abs_over(t0, t1);
    if h_max > 0.0 {
        dt.min(0.2 / h_max)
    } else {
        dt
    }
}

/// Named scalar observable evaluated on stored states.
pub struct Probe<'a, S> {
    pub name: String,
    pub eval: Box<dyn Fn(f64, &S) -> f64 + Send + Sync + 'a>,
}

impl<'a, S> Probe<'a, S> {
    pub fn new(name: impl Into<String>, eval: impl Fn(f64, &S) -> f64 + Send + Sync + 'a) -> Self {
        Self { name: name.into(), eval: Box::new(eval) }
    }
}

/// Which stored points also keep the full state.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum KeepStates {
    All,
    FinalOnly,
    Stride(usize),
}

impl KeepStates {
    fn keeps(&self, stored_index: usize, last: bool) -> bool {
        match self {
            KeepStates::All => true,
            KeepStates::FinalOnly => last,
            KeepStates::Stride(s) => last || stored_index % s == 0,
        }
    }
}

#[derive(Clone, Debug)]
pub enum StoredState {
    Pure(PureState),
    Mixed(DensityMatrix),
}

#[derive(Clone, Debug)]
pub struct Snapshot {
    pub t: f64,
    pub state: StoredState,
}

#[derive(Clone, Debug, Default)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
}

/// Time series produced by an evolution.
#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub columns: Vec<Column>,
    pub snapshots: Vec<Snapshot>,
    /// Largest `|‖ψ‖ − 1|` or `|Tr ρ − 1|` seen at a stored point.
    pub norm_drift: f64,
    /// Smallest density-matrix eigenvalue at a stored point (open systems).
    pub min_eigenvalue: Option<f64>,
}

impl Trajectory {
    pub(crate) fn with_columns(names: impl IntoIterator<Item = String>) -> Self {
        Self {
            columns: names.into_iter().map(|name| Column { name, values: Vec::new() }).collect(),
            ..Default::default()
        }
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|c| c.name == name).map(|c| c.values.as_slice())
    }

    pub fn push_column(&mut self, name: impl Into<String>, values: Vec<f64>) -> Result<()> {
        if values.len() != self.times.len() {
            return Err(Error::DimensionMismatch { expected: self.times.len(), got: values.len() });
        }
        self.columns.push(Column { name: name.into(), values });
        Ok(())
    }

    pub fn final_state(&self) -> Option<&StoredState> {
        self.snapshots.last().map(|s| &s.state)
    }

    pub fn final_pure(&self) -> Option<&PureState> {
        match self.final_state() {
            Some(StoredState::Pure(p)) => Some(p),
            _ => None,
        }
    }

    pub fn final_mixed(&self) -> Option<&DensityMatrix> {
        match self.final_state() {
            Some(StoredState::Mixed(m)) => Some(m),
            _ => None,
        }
    }

    pub fn pure_states(&self) -> impl Iterator<Item = (f64, &PureState)> {
        self.snapshots.iter().filter_map(|s| match &s.state {
            StoredState::Pure(p) => Some((s.t, p)),
            _ => None,
        })
    }

    pub(crate) fn record<S>(&mut self, t: f64, state: &S, probes: &[Probe<'_, S>]) {
        self.times.push(t);
        for (col, probe) in self.columns.iter_mut().zip(probes) {
            col.values.push((probe.eval)(t, state));
        }
    }
}
