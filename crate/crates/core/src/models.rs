//! Standard operators and ready-made evolutions for the qubit and spin
//! examples.

use nalgebra::DMatrix;

use crate::error::Result;
use crate::evolution::{Dissipator, QuantumEvolution};
use crate::quantum::{Operator, C64};

fn real(n: usize, f: impl Fn(usize, usize) -> f64) -> Operator {
    Operator::new(DMatrix::from_fn(n, n, |i, j| C64::new(f(i, j), 0.0))).expect("finite")
}

/// `sigma_z` with `sigma_z|0> = |0>`, `sigma_z|1> = -|1>`.
pub fn sigma_z() -> Operator {
    real(2, |i, j| match (i, j) {
        (0, 0) => 1.0,
        (1, 1) => -1.0,
        _ => 0.0,
    })
}

pub fn sigma_x() -> Operator {
    real(2, |i, j| if i != j { 1.0 } else { 0.0 })
}

/// Lowering operator `|1><0|`.
pub fn sigma_minus() -> Operator {
    real(2, |i, j| if (i, j) == (1, 0) { 1.0 } else { 0.0 })
}

/// Spin-`(n-1)/2` operators `(S_x, S_z)` in the `S_z` eigenbasis ordered by
/// decreasing magnetic number.
pub fn spin_xz(n: usize) -> (Operator, Operator) {
    let j = (n as f64 - 1.0) / 2.0;
    let m = |k: usize| j - k as f64;
    // <m+1|S_+|m> lives at row k-1, column k
    let raise = |k: usize| (j * (j + 1.0) - m(k) * (m(k) + 1.0)).sqrt();
    let sx = real(n, |r, c| {
        if r + 1 == c {
            0.5 * raise(c)
        } else if c + 1 == r {
            0.5 * raise(r)
        } else {
            0.0
        }
    });
    let sz = real(n, |r, c| if r == c { m(r) } else { 0.0 });
    (sx, sz)
}

/// `H = omega sigma_z / 2`.
pub fn qubit_hamiltonian(omega: f64) -> Operator {
    sigma_z().scale(omega / 2.0)
}

pub fn qubit_unitary(omega: f64) -> Result<QuantumEvolution> {
    QuantumEvolution::unitary(qubit_hamiltonian(omega))
}

/// Dephasing channel `kappa (sigma_z rho sigma_z - rho)` on top of `omega sigma_z / 2`.
pub fn qubit_dephasing(omega: f64, kappa: f64) -> Result<QuantumEvolution> {
    QuantumEvolution::lindblad(
        qubit_hamiltonian(omega),
        vec![Dissipator::new(kappa, sigma_z())],
    )
}

/// Spontaneous decay through `sigma_- = |1><0|` at rate `kappa`.
pub fn qubit_decay(omega: f64, kappa: f64) -> Result<QuantumEvolution> {
    QuantumEvolution::lindblad(
        qubit_hamiltonian(omega),
        vec![Dissipator::new(kappa, sigma_minus())],
    )
}

/// `U(t) = exp(-i omega t S_x)` for spin 1.
pub fn qutrit_sx(omega: f64) -> Result<QuantumEvolution> {
    QuantumEvolution::unitary(spin_xz(3).0.scale(omega))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spin_half_matches_pauli() {
        let (sx, sz) = spin_xz(2);
        assert_eq!(sx, sigma_x().scale(0.5));
        assert_eq!(sz, sigma_z().scale(0.5));
    }

    #[test]
    fn spin_one_commutator() {
        // [S_z, S_x] = i S_y and S_x^2 + S_y^2 + S_z^2 = j(j+1)
        let (sx, sz) = spin_xz(3);
        let (x, z) = (sx.matrix(), sz.matrix());
        let sy = (z * x - x * z) * C64::new(0.0, -1.0);
        let casimir = x * x + &sy * &sy + z * z;
        let expected = DMatrix::<C64>::identity(3, 3) * C64::new(2.0, 0.0);
        assert!((casimir - expected).norm() < 1e-14);
        assert!((x[(0, 1)].re - 1.0 / 2f64.sqrt()).abs() < 1e-15);
    }
}
