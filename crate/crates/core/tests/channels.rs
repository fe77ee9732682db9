mod common;

use common::*;
use nalgebra::DMatrix;
use proptest::prelude::*;
use qreset_core::quantum::{born_probabilities, DensityMatrix};
use qreset_core::TransitionKernel;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn lindblad_propagators_are_channels(seed in any::<u64>(), n in 2usize..=4, k in 1usize..=3, t in 0.01f64..5.0) {
        let mut r = rng(seed);
        let ev = random_lindblad(n, k, &mut r);
        let p = ev.propagator(t).unwrap();
        prop_assert!(p.trace_preservation_deviation() <= 1e-9);
        prop_assert!(p.min_choi_eigenvalue() >= -1e-8);

        let s = t * 0.37;
        let composed = ev.propagator(s).unwrap().compose(&ev.propagator(t - s).unwrap());
        let diff = (&composed.superoperator - &p.superoperator).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(diff <= 1e-8, "semigroup defect {diff}");
    }

    #[test]
    fn transition_matrices_are_column_stochastic(seed in any::<u64>(), n in 2usize..=5, t in 0.0f64..10.0) {
        let mut r = rng(seed);
        let ev = random_lindblad(n, 2, &mut r);
        let basis = random_basis(n, &mut r);
        let m = TransitionKernel::new(&ev, &basis).unwrap().matrix(t).unwrap();
        for col in m.column_iter() {
            prop_assert!((col.sum() - 1.0).abs() < 1e-9);
            prop_assert!(col.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }

    #[test]
    fn unital_transition_matrices_are_doubly_stochastic(seed in any::<u64>(), n in 2usize..=5, t in 0.0f64..10.0) {
        let mut r = rng(seed);
        let ev = random_unital(n, &mut r);
        let basis = random_basis(n, &mut r);
        let m: DMatrix<f64> = TransitionKernel::new(&ev, &basis).unwrap().matrix(t).unwrap();
        for row in m.row_iter() {
            prop_assert!((row.sum() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn born_probabilities_sum_to_one(seed in any::<u64>(), n in 2usize..=6) {
        let mut r = rng(seed);
        let rho = DensityMatrix::pure(&pure_state(n, &mut r)).unwrap();
        let p = born_probabilities(&rho, &random_basis(n, &mut r)).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(p.iter().all(|&v| v >= 0.0));
    }
}
