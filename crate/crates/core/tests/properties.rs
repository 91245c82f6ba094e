//! Randomized invariants of the core types and builders.

use ndarray::Array1;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

use sqfock::model::{
    build_anisotropic_rabi, build_effective_hamiltonian, build_isotropic_rabi, build_lab_hamiltonian, decompose_rabi,
    lab_to_squeezed, squeezed_to_lab, LabParams, SqueezedParams,
};
use sqfock::observables::{concurrence, fidelity, photon_number, wigner, WignerSpec};
use sqfock::qcore::{
    build_operators, partial_trace, squeeze_operator, DensityMatrix, FockSpace, PureState, Qubit,
    Subsystem,
};

fn random_state(space: FockSpace, re: &[f64], im: &[f64]) -> PureState {
    let amps: Array1<C64> = (0..space.dim()).map(|k| C64::new(re[k], im[k])).collect();
    PureState::normalized(amps).unwrap()
}

fn amps(dim: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (prop::collection::vec(-1.0..1.0f64, dim), prop::collection::vec(-1.0..1.0f64, dim))
        .prop_filter("non-zero", |(a, b)| a.iter().chain(b).any(|x| x.abs() > 1e-3))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn frame_conversion_round_trip(g in 0.001..0.1f64, r in -1.5..1.5f64, wc in 0.1..2.0f64, wq in 0.5..2.0f64) {
        let p = SqueezedParams::new(g, r, wc, wq);
        let back = lab_to_squeezed(&squeezed_to_lab(&p)).unwrap();
        prop_assert!((back.r() - r).abs() < 1e-10);
        prop_assert!((back.omega_c() - wc).abs() < 1e-10 * wc.max(1.0));
        prop_assert!((back.g() - g).abs() < 1e-15);
        prop_assert!((back.lambda1() - g * r.sinh()).abs() < 1e-12);
        prop_assert!((back.lambda2() - g * r.cosh()).abs() < 1e-12);
    }

    #[test]
    fn built_hamiltonians_are_hermitian(g in 0.0..0.2f64, r in 0.0..1.5f64, wc in 0.2..1.0f64) {
        let space = FockSpace::new(12).unwrap();
        let p = SqueezedParams::new(g, r, wc, 1.0);
        for h in [
            build_anisotropic_rabi(&p, space).unwrap(),
            build_isotropic_rabi(&p, space).unwrap(),
            build_effective_hamiltonian(&p, space).unwrap(),
            build_lab_hamiltonian(&squeezed_to_lab(&p), space).unwrap(),
        ] {
            prop_assert!(h.hermiticity_defect() < 1e-12);
        }
        let (rabi, anti) = decompose_rabi(&p, space).unwrap();
        let sum = &rabi + &anti;
        prop_assert!(sum.max_abs_diff(&build_anisotropic_rabi(&p, space).unwrap()) < 1e-12);
        prop_assert!(rabi.hermiticity_defect() < 1e-12 && anti.hermiticity_defect() < 1e-12);
    }

    #[test]
    fn squeeze_operator_is_unitary(r in -1.0..1.0f64) {
        let n_max = (8.0 * r.sinh().powi(2) + 12.0).ceil() as usize;
        let space = FockSpace::new(n_max).unwrap();
        let s = squeeze_operator(r, space).unwrap();
        prop_assert!(s.unitarity_defect() < 1e-9);
        let inv = squeeze_operator(-r, space).unwrap();
        prop_assert!(inv.max_abs_diff(&s.dagger()) < 1e-10);
    }

    #[test]
    fn partial_trace_preserves_trace_and_marginals((re, im) in amps(14), (re2, im2) in amps(14), w in 0.0..1.0f64) {
        let space = FockSpace::new(6).unwrap();
        let a = random_state(space, &re, &im);
        let b = random_state(space, &re2, &im2);
        let rho = DensityMatrix::mixture(&[(w, &a), (1.0 - w, &b)]).unwrap();
        let cav = partial_trace(&rho, Subsystem::Cavity, space).unwrap();
        let qub = partial_trace(&rho, Subsystem::Qubit, space).unwrap();
        prop_assert_eq!(cav.dim(), 7);
        prop_assert_eq!(qub.dim(), 2);
        prop_assert!((cav.trace() - 1.0).abs() < 1e-10);
        prop_assert!((qub.trace() - 1.0).abs() < 1e-10);
        let n_cav: f64 = (0..7).map(|n| n as f64 * cav.population(n)).sum();
        prop_assert!((n_cav - photon_number(&rho, space).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn fidelity_is_linear_in_mixtures((re, im) in amps(10), (re2, im2) in amps(10), w in 0.0..1.0f64) {
        let space = FockSpace::new(4).unwrap();
        let a = random_state(space, &re, &im);
        let b = random_state(space, &re2, &im2);
        let target = PureState::bell_target(space);
        let rho = DensityMatrix::mixture(&[(w, &a), (1.0 - w, &b)]).unwrap();
        let mixed = fidelity(&rho, &target).unwrap();
        let linear = w * fidelity(&a, &target).unwrap() + (1.0 - w) * fidelity(&b, &target).unwrap();
        prop_assert!((mixed - linear).abs() < 1e-12);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&mixed));
    }

    #[test]
    fn concurrence_extremes(theta in 0.0..std::f64::consts::PI, phi in 0.0..6.28f64) {
        let space = FockSpace::new(5).unwrap();
        let (c, s) = ((0.5 * theta).cos(), (0.5 * theta).sin());
        let product = PureState::superposition(
            space,
            &[(C64::new(c, 0.0), Qubit::G, 2), (C64::from_polar(s, phi), Qubit::E, 2)],
        )
        .unwrap();
        prop_assert!(concurrence(&product, space).unwrap().value < 1e-7);
        let bell = PureState::superposition(
            space,
            &[(C64::new(1.0, 0.0), Qubit::E, 0), (C64::from_polar(1.0, phi), Qubit::G, 3)],
        )
        .unwrap();
        prop_assert!((concurrence(&bell, space).unwrap().value - 1.0).abs() < 1e-9);
        let mixed = DensityMatrix::from_pure(&bell);
        prop_assert!((concurrence(&mixed, space).unwrap().value - 1.0).abs() < 1e-7, "mixed-state route");
    }

    #[test]
    fn wigner_is_normalized_and_bounded((re, im) in amps(5)) {
        let amps: Array1<C64> = re.iter().zip(&im).map(|(a, b)| C64::new(*a, *b)).collect();
        let rho = DensityMatrix::from_pure(&PureState::normalized(amps).unwrap());
        let w = wigner(&rho, &WignerSpec::square(7.0, 71)).unwrap();
        prop_assert!((w.integral() - 1.0).abs() < 1e-2);
        prop_assert!(w.max_abs() <= 1.0 / std::f64::consts::PI + 1e-6);
    }

    #[test]
    fn lab_params_validate(dc in 0.1..2.0f64, ratio in 0.0..0.95f64, g in 0.0..0.1f64) {
        let lab = LabParams::new(dc, 1.0, ratio * dc, g).unwrap();
        let sq = lab_to_squeezed(&lab).unwrap();
        let back = squeezed_to_lab(&sq);
        prop_assert!((back.delta_c - dc).abs() < 1e-10);
        prop_assert!((back.lambda_p - ratio * dc).abs() < 1e-10);
    }
}

#[test]
fn operator_set_is_consistent() {
    let space = FockSpace::new(6).unwrap();
    let o = build_operators(space);
    let n = &o.a_dag * &o.a;
    assert!(n.max_abs_diff(&o.n_op) < 1e-14);
    assert!(o.parity().is_hermitian());
}
