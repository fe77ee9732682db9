#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use qreset_core::evolution::{Dissipator, QuantumEvolution};
use qreset_core::timing::MeasurementTimeDistribution;
use qreset_core::{MeasurementBasis, Operator, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn ginibre<R: Rng>(n: usize, rng: &mut R) -> DMatrix<C64> {
    DMatrix::from_fn(n, n, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

pub fn hermitian<R: Rng>(n: usize, scale: f64, rng: &mut R) -> Operator {
    let g = ginibre(n, rng);
    Operator::new((&g + g.adjoint()) * C64::new(0.5 * scale, 0.0)).unwrap()
}

pub fn random_basis<R: Rng>(n: usize, rng: &mut R) -> MeasurementBasis {
    let q = ginibre(n, rng).qr().q();
    MeasurementBasis::from_unitary(&q).unwrap()
}

/// Lindbladian with `k` generic (non-Hermitian) jump operators.
pub fn random_lindblad<R: Rng>(n: usize, k: usize, rng: &mut R) -> QuantumEvolution {
    let h = hermitian(n, 1.0, rng);
    let dissipators = (0..k)
        .map(|_| {
            let rate = rng.gen_range(0.05..1.0);
            let j = ginibre(n, rng) * C64::new(1.0 / (n as f64).sqrt(), 0.0);
            Dissipator::new(rate, Operator::new(j).unwrap())
        })
        .collect();
    QuantumEvolution::lindblad(h, dissipators).unwrap()
}

/// Unital evolution: random Hamiltonian plus Hermitian jump operators.
pub fn random_unital<R: Rng>(n: usize, rng: &mut R) -> QuantumEvolution {
    let h = hermitian(n, 1.0, rng);
    if rng.gen_bool(0.25) {
        return QuantumEvolution::unitary(h).unwrap();
    }
    let k = rng.gen_range(1..=2);
    let dissipators = (0..k)
        .map(|_| {
            let j = hermitian(n, 1.0 / (n as f64).sqrt(), rng);
            Dissipator::new(rng.gen_range(0.05..0.8), j)
        })
        .collect();
    QuantumEvolution::lindblad(h, dissipators).unwrap()
}

pub fn random_distribution<R: Rng>(variant: usize, rng: &mut R) -> MeasurementTimeDistribution {
    let tau = rng.gen_range(0.3..2.0);
    match variant % 3 {
        0 => MeasurementTimeDistribution::exponential(tau),
        1 => MeasurementTimeDistribution::gamma(rng.gen_range(0.7..4.0), tau),
        _ => MeasurementTimeDistribution::deterministic(tau),
    }
    .unwrap()
}

pub fn pure_state<R: Rng>(n: usize, rng: &mut R) -> DVector<C64> {
    let v = DVector::from_fn(n, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let norm = v.norm();
    v / C64::new(norm, 0.0)
}

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}
