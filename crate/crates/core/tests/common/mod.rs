//! Measurements shared by the physics tests and the acceptance report.
#![allow(dead_code)]

use ndarray::arr2;
use num_complex::Complex64 as C64;

use sqfock::dynamics::{
    adiabatic_sweep, evolve_lindblad, evolve_static, evolve_time_dependent, stable_dt, sweep_schedule,
    DissipationParams, KeepStates, Probe, Schedule, StaticPropagator, SweepProtocol, TimeGrid,
};
use sqfock::model::{
    build_anisotropic_rabi, build_effective_hamiltonian, build_isotropic_rabi, build_lab_hamiltonian, decompose_rabi,
    frame_energy_offset, lab_to_squeezed, squeezed_to_lab, SqueezedParams,
};
use sqfock::observables::{fidelity, fock_density, series_metrics, wigner, WignerSpec};
use sqfock::qcore::{
    build_operators, hermitian_eigs, squeeze_operator, DensityMatrix, FockSpace, PureState, QOperator, QuantumState,
    Qubit,
};
use sqfock::spectrum::{find_avoided_crossing, resonance_frequency_subspace, default_scan, effective_rabi_frequency};

pub fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Largest Hermiticity defect over every builder at a few parameter points.
pub fn hermiticity_defect() -> f64 {
    let space = FockSpace::new(40).unwrap();
    let mut worst: f64 = 0.0;
    for &(g, r) in &[(0.01, 0.9), (0.06, 0.9), (0.06, 0.5), (0.01, 2.0)] {
        let p = SqueezedParams::new(g, r, 0.34, 1.0);
        let (a, b) = decompose_rabi(&p, space).unwrap();
        for h in [
            build_anisotropic_rabi(&p, space).unwrap(),
            build_isotropic_rabi(&p, space).unwrap(),
            build_effective_hamiltonian(&p, space).unwrap(),
            build_lab_hamiltonian(&squeezed_to_lab(&p), space).unwrap(),
            a,
            b,
        ] {
            worst = worst.max(h.hermiticity_defect());
        }
    }
    worst
}

pub fn squeeze_unitarity_defect() -> f64 {
    [0.5, 0.9, 1.2]
        .iter()
        .map(|&r: &f64| {
            let n = (8.0 * r.sinh().powi(2) + 12.0).ceil() as usize;
            squeeze_operator(r, FockSpace::new(n.max(40)).unwrap()).unwrap().unitarity_defect()
        })
        .fold(0.0, f64::max)
}

pub fn decompose_defect() -> f64 {
    let space = FockSpace::new(30).unwrap();
    let p = SqueezedParams::new(0.06, 0.9, 0.34, 1.0);
    let (a, b) = decompose_rabi(&p, space).unwrap();
    (&a + &b).max_abs_diff(&build_anisotropic_rabi(&p, space).unwrap())
}

/// Lowest ten levels of the lab Hamiltonian (large cutoff) against the
/// squeezed-frame model plus the constant frame offset.
pub fn frame_equivalence_defect() -> f64 {
    let sq = SqueezedParams::new(0.06, 0.9, 0.34, 1.0);
    let lab = squeezed_to_lab(&sq);
    let back = lab_to_squeezed(&lab).unwrap();
    let offset = frame_energy_offset(&lab).unwrap();
    let e_lab = hermitian_eigs(&build_lab_hamiltonian(&lab, FockSpace::new(120).unwrap()).unwrap()).unwrap();
    let e_sq = hermitian_eigs(&build_anisotropic_rabi(&back, FockSpace::new(40).unwrap()).unwrap()).unwrap();
    (0..10).map(|k| (e_lab.values[k] - (e_sq.values[k] + offset)).abs()).fold(0.0, f64::max)
}

/// Drift of `⟨σ_z (−1)^n⟩` along a static run, an RK4 sweep and a closed
/// master-equation run, each from a state of mixed parity.
pub fn parity_drift() -> f64 {
    let space = FockSpace::new(15).unwrap();
    let parity = build_operators(space).parity();
    let psi0 = PureState::superposition(
        space,
        &[(c(0.8), Qubit::E, 0), (C64::new(0.3, 0.4), Qubit::G, 1), (c(0.36), Qubit::G, 3)],
    )
    .unwrap();
    let p = SqueezedParams::new(0.06, 0.9, 0.34, 1.0);
    let pi0 = psi0.expect(&parity).re;

    let par = parity.clone();
    let probes = [Probe::new("parity", move |_, s: &PureState| s.expect(&par).re)];
    let h = build_anisotropic_rabi(&p, space).unwrap();
    let st = evolve_static(&h, &psi0, &TimeGrid::new(0.0, 500.0, 5.0, 1).unwrap(), &probes, KeepStates::FinalOnly)
        .unwrap();

    let proto = SweepProtocol::new(0.33, 0.34, 1e-4, 1e-3, 0.02, 50).unwrap();
    let sched = sweep_schedule(&p, &proto, space).unwrap();
    let dt = stable_dt(&sched, 0.0, 100.0, 0.02);
    let rk = evolve_time_dependent(&sched, &psi0, &TimeGrid::new(0.0, 100.0, dt, 50).unwrap(), &probes, KeepStates::FinalOnly)
        .unwrap();

    let par = parity.clone();
    let mprobes = [Probe::new("parity", move |_, s: &DensityMatrix| s.expect(&par).re)];
    let rho0 = DensityMatrix::from_pure(&psi0);
    let lb = evolve_lindblad(
        &Schedule::constant(&h).unwrap(),
        &rho0,
        DissipationParams::new(0.0, 0.0).unwrap(),
        space,
        &TimeGrid::new(0.0, 50.0, 0.02, 100).unwrap(),
        &mprobes,
        KeepStates::FinalOnly,
    )
    .unwrap();

    [st, rk, lb]
        .iter()
        .flat_map(|t| t.column("parity").unwrap().iter().map(|v| (v - pi0).abs()).collect::<Vec<_>>())
        .fold(0.0, f64::max)
}

/// Largest norm drift of the RK4 integrator and trace drift of the master
/// equation on short dissipative runs.
pub fn conservation_drift() -> (f64, f64) {
    let space = FockSpace::new(15).unwrap();
    let p = SqueezedParams::new(0.06, 0.9, 0.34, 1.0);
    let proto = SweepProtocol::new(0.33, 0.34, 1e-4, 1e-3, 0.02, 10).unwrap();
    let sched = sweep_schedule(&p, &proto, space).unwrap();
    let dt = stable_dt(&sched, 0.0, 100.0, 0.02);
    let psi0 = PureState::basis(space, Qubit::E, 0).unwrap();
    let rk = evolve_time_dependent(&sched, &psi0, &TimeGrid::new(0.0, 100.0, dt, 10).unwrap(), &[], KeepStates::FinalOnly)
        .unwrap();
    let probes = [Probe::new("trace", |_, s: &DensityMatrix| s.trace())];
    let lb = evolve_lindblad(
        &sched,
        &DensityMatrix::from_pure(&psi0),
        DissipationParams::new(0.01, 0.001).unwrap(),
        space,
        &TimeGrid::new(0.0, 100.0, 0.05, 20).unwrap(),
        &probes,
        KeepStates::FinalOnly,
    )
    .unwrap();
    let trace = lb.column("trace").unwrap().iter().map(|t| (t - 1.0).abs()).fold(0.0, f64::max);
    (rk.norm_drift, trace)
}

/// `(∫W, W(0,0))` for the cavity Fock state `|3⟩`.
pub fn fock3_wigner() -> (f64, f64) {
    let rho = fock_density(3, 20).unwrap();
    let w = wigner(&rho, &WignerSpec::square(7.0, 141)).unwrap();
    (w.integral(), w.values[[70, 70]])
}

/// Error reduction of RK4 when the step is halved, on a driven two-level
/// system with a time-dependent detuning.
pub fn rk4_order_ratio() -> f64 {
    let sx = QOperator::hermitian(arr2(&[[c(0.0), c(0.7)], [c(0.7), c(0.0)]])).unwrap();
    let sz = QOperator::diagonal(&[0.5, -0.5]);
    let sched = Schedule::constant(&sx).unwrap().with_fn(sz, |t| 1.0 + 0.8 * t).unwrap();
    let psi0 = PureState::new(ndarray::Array1::from(vec![c(1.0), c(0.0)])).unwrap();
    let run = |dt: f64| {
        let t = evolve_time_dependent(&sched, &psi0, &TimeGrid::new(0.0, 4.0, dt, 1).unwrap(), &[], KeepStates::FinalOnly)
            .unwrap();
        t.final_pure().unwrap().amplitudes().clone()
    };
    let exact = run(0.0005);
    let err = |dt: f64| (&run(dt) - &exact).iter().map(|z| z.norm()).fold(0.0, f64::max);
    err(0.04) / err(0.02)
}

/// Landau-Zener crossing of two diabatic levels whose splitting moves at
/// `dΔ/dω_c = 3` (three photons against one qubit flip) under a ramp of rate
/// `v = Ω²/η`. Returns `(numerical, exp(−2πΩ²/(3v)))` diabatic survival.
pub fn landau_zener(eta: f64) -> (f64, f64) {
    let omega = 1.0;
    let v = omega * omega / eta;
    let alpha = 3.0 * v;
    let t_half = 200.0 * omega / alpha;
    let off = QOperator::hermitian(arr2(&[[c(0.0), c(omega)], [c(omega), c(0.0)]])).unwrap();
    let sched = Schedule::constant(&off)
        .unwrap()
        .with_fn(QOperator::diagonal(&[0.0, 1.0]), move |t| alpha * (t - t_half))
        .unwrap();
    let t_end = 2.0 * t_half;
    // Start and finish in adiabatic states: the projection converges much
    // faster in the sweep length than the diabatic one.
    let start = hermitian_eigs(&sched.at(0.0)).unwrap().state(0);
    // Far from the crossing the diabatic energies dominate; keep ‖H‖·dt ≤ 0.02.
    let dt = 0.1 * stable_dt(&sched, 0.0, t_end, 0.1);
    let traj =
        evolve_time_dependent(&sched, &start, &TimeGrid::new(0.0, t_end, dt, 1_000_000).unwrap(), &[], KeepStates::FinalOnly)
            .unwrap();
    let upper = hermitian_eigs(&sched.at(t_end)).unwrap().state(1);
    let numeric = traj.final_pure().unwrap().overlap_with(&upper);
    (numeric, (-2.0 * std::f64::consts::PI * omega * omega / alpha).exp())
}

/// Overlap of the final state with the initial one and final Bell fidelity
/// for a sweep to the crossing with `η = Ω²/v`, full model at `n_max = 15`.
pub fn sudden_sweep(eta: f64) -> (f64, f64) {
    let space = FockSpace::new(15).unwrap();
    let (g, r) = (0.06, 0.9);
    let tmpl = SqueezedParams::new(g, r, 1.0 / 3.0, 1.0);
    let stop = find_avoided_crossing(&tmpl, default_scan(1.0), space).unwrap().omega_c_star;
    let omega = effective_rabi_frequency(&tmpl.with_omega_c(stop)).unwrap();
    let v = omega * omega / eta;
    let proto = SweepProtocol::new(stop - 0.01, stop, v, omega, 0.02, 1).unwrap();
    let traj = adiabatic_sweep(&tmpl, &proto, space).unwrap();
    let first = match &traj.snapshots[0].state {
        sqfock::dynamics::StoredState::Pure(p) => p.clone(),
        _ => unreachable!(),
    };
    let last = traj.final_pure().unwrap();
    (last.overlap_with(&first), fidelity(last, &PureState::bell_target(space)).unwrap())
}

/// Transfer period of the full model from `|e,0⟩` (time domain) against the
/// period of the effective Hamiltonian's `{|e,0⟩, |g,3⟩}` block, evolved on
/// its own. Returns `(full, effective)`.
pub fn effective_vs_full_period(g: f64, r: f64) -> (f64, f64) {
    let space = FockSpace::new(40).unwrap();
    let p = SqueezedParams::new(g, r, resonance_frequency_subspace(g, r, 1.0), 1.0);
    let h_eff = build_effective_hamiltonian(&p, space).unwrap();
    let (ie, ig) = (space.index(Qubit::E, 0), space.index(Qubit::G, 3));
    let block = arr2(&[[h_eff.get(ie, ie), h_eff.get(ie, ig)], [h_eff.get(ig, ie), h_eff.get(ig, ig)]]);
    let h2 = QOperator::hermitian(block).unwrap();
    let up = PureState::new(ndarray::Array1::from(vec![c(1.0), c(0.0)])).unwrap();
    let omega = effective_rabi_frequency(&p).unwrap().abs();
    let t_end = 2.5 * std::f64::consts::PI / omega;
    let n = 20_000;
    let times: Vec<f64> = (0..=n).map(|k| k as f64 * t_end / n as f64).collect();

    let eff = StaticPropagator::new(&h2, &up).unwrap().population_series(1, &times);
    let full = StaticPropagator::new(&build_anisotropic_rabi(&p, space).unwrap(), &PureState::basis(space, Qubit::E, 0).unwrap())
        .unwrap()
        .population_grid(ig, 0.0, t_end / n as f64, n + 1);
    let period = |ys: &[f64]| series_metrics(&times, ys).unwrap().period.unwrap();
    (period(&full), period(&eff))
}
