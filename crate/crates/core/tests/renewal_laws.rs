mod common;

use std::f64::consts::PI;

use common::*;
use proptest::prelude::*;
use qreset_core::models::{qubit_decay, qubit_dephasing, qubit_unitary, qutrit_sx};
use qreset_core::oracles::*;
use qreset_core::renewal::{build_matrices, closure_check, mean_times, solve};
use qreset_core::timing::MeasurementTimeDistribution;
use qreset_core::MeasurementBasis;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn return_time_is_n_tau_for_unital_evolutions(seed in any::<u64>(), n in 2usize..=5, variant in 0usize..3) {
        let mut r = rng(seed);
        let ev = random_unital(n, &mut r);
        let basis = random_basis(n, &mut r);
        let dist = random_distribution(variant, &mut r);
        let target = seed as usize % n;
        let m = build_matrices(&ev, &dist, &basis, target).unwrap();
        prop_assert!(closure_check(&m) <= 1e-8);
        let s = mean_times(&m).unwrap();
        prop_assert_eq!(s.n_connected, n);
        prop_assert!(rel(s.t_star, n as f64 * dist.mean()) < 1e-7, "{} vs {}", s.t_star, n as f64 * dist.mean());
        prop_assert!(s.switching.iter().all(|&t| t >= dist.mean() * (1.0 - 1e-9)));
    }
}

fn grid() -> Vec<(f64, f64, f64)> {
    let thetas = [0.3, 0.9, PI / 2.0, 2.2, 2.9];
    let rates = [(0.2, 1.0), (1.0, 0.5), (3.0, 2.0), (0.05, 1.7)];
    thetas
        .iter()
        .flat_map(|&th| rates.iter().map(move |&(k, w)| (th, k, w)))
        .collect()
}

#[test]
fn qubit_solver_matches_closed_forms() {
    let tau = 1.3;
    let dist = MeasurementTimeDistribution::exponential(tau).unwrap();
    for (theta, kt, wt) in grid() {
        let (omega, kappa) = (wt / tau, kt / tau);
        let basis = MeasurementBasis::qubit(theta).unwrap();
        let p = QubitParams::new(omega, kappa, theta, tau);

        let s = solve(&qubit_unitary(omega).unwrap(), &dist, &basis, 0).unwrap();
        assert!(rel(s.switching[0], qubit_unitary_t_minus(&p).unwrap()) < 1e-6);

        let s = solve(&qubit_dephasing(omega, kappa).unwrap(), &dist, &basis, 0).unwrap();
        assert!(rel(s.switching[0], qubit_dephasing_t_minus(&p).unwrap()) < 1e-6);

        let (t_minus, t_plus) = qubit_decay_times(&p).unwrap();
        let s = solve(&qubit_decay(omega, kappa).unwrap(), &dist, &basis, 0).unwrap();
        assert!(rel(s.switching[0], t_minus) < 1e-6, "{theta} {kt} {wt}");
        assert!(rel(s.t_star, t_plus) < 1e-6, "{theta} {kt} {wt}");
    }
}

#[test]
fn qutrit_solver_matches_closed_forms() {
    for (omega, tau) in [(1.0, 1.0), (0.7, 1.9), (2.5, 0.4)] {
        let ev = qutrit_sx(omega).unwrap();
        let dist = MeasurementTimeDistribution::exponential(tau).unwrap();
        let basis = MeasurementBasis::computational(3);
        let oracle = qutrit_unitary_times(omega, tau).unwrap();
        for target in 0..3 {
            let s = solve(&ev, &dist, &basis, target).unwrap();
            assert!(rel(s.t_star, oracle.get(target, target)) < 1e-6);
            for (k, &start) in s.states.iter().enumerate() {
                assert!(rel(s.switching[k], oracle.get(start, target)) < 1e-6);
            }
        }
    }
}

#[test]
fn decay_breaks_closure() {
    let dist = MeasurementTimeDistribution::exponential(1.0).unwrap();
    let m = build_matrices(
        &qubit_decay(1.0, 1.0).unwrap(),
        &dist,
        &MeasurementBasis::qubit(PI / 3.0).unwrap(),
        0,
    )
    .unwrap();
    assert!(closure_check(&m) > 1e-3);
    assert!((mean_times(&m).unwrap().t_star - 2.0).abs() > 1e-3);
}
