//! Mean return and switching times from the renewal equations evaluated at
//! `s = 0`:
//!
//! ```text
//! T      = tau (1 - W^T)^-1 1
//! T_star = tau (1 + w_star^T (1 - W^T)^-1 1)
//! ```
//!
//! with `W[i][j] = a(i|j)` over non-target states and `w_star[i] = a(i|star)`.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector, SVD};

use crate::error::{Error, Result};
use crate::evolution::{log_grid, QuantumEvolution, TransitionKernel};
use crate::quantum::MeasurementBasis;
use crate::timing::{averaged_matrix, AveragingOptions, MeasurementTimeDistribution};

/// Below this smallest singular value `1 - W^T` is treated as singular.
pub const SINGULAR_THRESHOLD: f64 = 1e-10;
/// Averaged transitions at or below this are treated as absent.
pub const EDGE_TOL: f64 = 1e-9;
/// Allowed deviation of a column of the averaged matrix from unit sum.
pub const COLUMN_SUM_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct RenewalMatrices {
    pub target: usize,
    pub tau: f64,
    /// `A[i][j] = a(i|j)` over all states.
    pub averaged: DMatrix<f64>,
    /// Labels of the rows/columns of `w0`, ascending, target excluded.
    pub others: Vec<usize>,
    pub w0: DMatrix<f64>,
    pub wstar0: DVector<f64>,
}

impl RenewalMatrices {
    pub fn from_averaged(averaged: DMatrix<f64>, target: usize, tau: f64) -> Result<Self> {
        let n = averaged.nrows();
        if averaged.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: averaged.ncols(),
            });
        }
        if target >= n {
            return Err(Error::IndexOutOfRange {
                index: target,
                dim: n,
            });
        }
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidParameter(format!("tau = {tau}")));
        }
        if let Some(v) = averaged.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidParameter(format!(
                "averaged transition {v} outside [0, 1]"
            )));
        }
        for (j, col) in averaged.column_iter().enumerate() {
            let sum = col.sum();
            if (sum - 1.0).abs() > COLUMN_SUM_TOL {
                return Err(Error::InvalidParameter(format!(
                    "column {j} of the averaged matrix sums to {sum}"
                )));
            }
        }
        let others: Vec<usize> = (0..n).filter(|&i| i != target).collect();
        let w0 = DMatrix::from_fn(n - 1, n - 1, |r, c| averaged[(others[r], others[c])]);
        let wstar0 = DVector::from_fn(n - 1, |r, _| averaged[(others[r], target)]);
        Ok(Self {
            target,
            tau,
            averaged,
            others,
            w0,
            wstar0,
        })
    }

    pub fn dim(&self) -> usize {
        self.averaged.nrows()
    }
}

pub fn build_matrices(
    ev: &QuantumEvolution,
    dist: &MeasurementTimeDistribution,
    basis: &MeasurementBasis,
    target: usize,
) -> Result<RenewalMatrices> {
    build_matrices_with(ev, dist, basis, target, &AveragingOptions::default())
}

pub fn build_matrices_with(
    ev: &QuantumEvolution,
    dist: &MeasurementTimeDistribution,
    basis: &MeasurementBasis,
    target: usize,
    opts: &AveragingOptions,
) -> Result<RenewalMatrices> {
    ev.check_basis(basis)?;
    basis.check_index(target)?;
    let kernel = TransitionKernel::new(ev, basis)?;
    let averaged = averaged_matrix(dist, &kernel, opts)?;
    RenewalMatrices::from_averaged(averaged, target, dist.mean())
}

#[derive(Clone, Debug, PartialEq)]
pub struct RenewalSolution {
    pub target: usize,
    pub tau: f64,
    /// Mean return time to the target.
    pub t_star: f64,
    /// Mean switching times, aligned with `states`. Infinite for states from
    /// which the target is not reached with probability one.
    pub switching: Vec<f64>,
    pub states: Vec<usize>,
    /// States reachable from the target, target included.
    pub connected: Vec<bool>,
    pub n_connected: usize,
    pub singular: bool,
    pub smallest_singular_value: f64,
}

impl RenewalSolution {
    pub fn switching_time(&self, state: usize) -> Option<f64> {
        if state == self.target {
            return Some(self.t_star);
        }
        self.states
            .iter()
            .position(|&s| s == state)
            .map(|k| self.switching[k])
    }
}

/// Successors of `j` in one measurement cycle: `i` with `a(i|j) > EDGE_TOL`.
fn successors(a: &DMatrix<f64>, j: usize) -> impl Iterator<Item = usize> + '_ {
    (0..a.nrows()).filter(move |&i| a[(i, j)] > EDGE_TOL)
}

fn reachable_from(a: &DMatrix<f64>, start: usize) -> Vec<bool> {
    let mut seen = vec![false; a.nrows()];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(j) = queue.pop_front() {
        for i in successors(a, j) {
            if !seen[i] {
                seen[i] = true;
                queue.push_back(i);
            }
        }
    }
    seen
}

/// States whose switching time is finite: every path avoiding the target
/// stays among states that can still reach it.
fn finite_states(a: &DMatrix<f64>, target: usize) -> Vec<bool> {
    let n = a.nrows();
    // can reach the target, walking backwards from it
    let mut reaches = vec![false; n];
    reaches[target] = true;
    let mut queue = VecDeque::from([target]);
    while let Some(i) = queue.pop_front() {
        for j in 0..n {
            if !reaches[j] && a[(i, j)] > EDGE_TOL {
                reaches[j] = true;
                queue.push_back(j);
            }
        }
    }
    // can reach a trap without passing through the target
    let mut doomed: Vec<bool> = reaches.iter().map(|r| !r).collect();
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| doomed[i]).collect();
    while let Some(i) = queue.pop_front() {
        for j in 0..n {
            if j != target && !doomed[j] && a[(i, j)] > EDGE_TOL {
                doomed[j] = true;
                queue.push_back(j);
            }
        }
    }
    doomed.iter().map(|d| !d).collect()
}

fn solve_block(w: &DMatrix<f64>, tau: f64) -> Option<DVector<f64>> {
    let k = w.nrows();
    let m = DMatrix::identity(k, k) - w.transpose();
    let rhs = DVector::from_element(k, tau);
    m.col_piv_qr().solve(&rhs)
}

/// Solves the renewal equations for the mean times.
pub fn mean_times(m: &RenewalMatrices) -> Result<RenewalSolution> {
    let n = m.dim();
    let k = n - 1;
    let tau = m.tau;
    let connected = reachable_from(&m.averaged, m.target);
    let n_connected = connected.iter().filter(|&&c| c).count();

    let system = DMatrix::identity(k, k) - m.w0.transpose();
    let smallest_singular_value = if k == 0 {
        f64::INFINITY
    } else {
        SVD::new(system, false, false).singular_values.min()
    };
    let singular = smallest_singular_value < SINGULAR_THRESHOLD;

    let mut switching = vec![f64::INFINITY; k];
    if !singular {
        if k > 0 {
            let t = solve_block(&m.w0, tau).ok_or(Error::Singular {
                disconnected: vec![],
            })?;
            switching.copy_from_slice(t.as_slice());
        }
    } else {
        let finite = finite_states(&m.averaged, m.target);
        let keep: Vec<usize> = (0..k).filter(|&r| finite[m.others[r]]).collect();
        let sub = DMatrix::from_fn(keep.len(), keep.len(), |r, c| m.w0[(keep[r], keep[c])]);
        let t = solve_block(&sub, tau).ok_or_else(|| Error::Singular {
            disconnected: m.others.iter().copied().filter(|&s| !finite[s]).collect(),
        })?;
        for (r, &row) in keep.iter().enumerate() {
            switching[row] = t[r];
        }
    }

    let mut t_star = tau;
    let mut unreachable = Vec::new();
    for (r, &w) in m.wstar0.iter().enumerate() {
        if w > EDGE_TOL {
            if switching[r].is_finite() {
                t_star += w * switching[r];
            } else {
                unreachable.push(m.others[r]);
            }
        }
    }
    if !unreachable.is_empty() {
        return Err(Error::Singular {
            disconnected: unreachable,
        });
    }

    Ok(RenewalSolution {
        target: m.target,
        tau,
        t_star,
        switching,
        states: m.others.clone(),
        connected,
        n_connected,
        singular,
        smallest_singular_value,
    })
}

/// `max |w_star + W 1 - 1|`; vanishes for unital evolutions.
pub fn closure_check(m: &RenewalMatrices) -> f64 {
    let row_sums = &m.w0 * DVector::from_element(m.w0.ncols(), 1.0);
    (row_sums + &m.wstar0)
        .iter()
        .map(|v| (v - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Averages, then solves.
pub fn solve(
    ev: &QuantumEvolution,
    dist: &MeasurementTimeDistribution,
    basis: &MeasurementBasis,
    target: usize,
) -> Result<RenewalSolution> {
    mean_times(&build_matrices(ev, dist, basis, target)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConnectivityPartition {
    pub connected: Vec<usize>,
    pub disconnected: Vec<usize>,
    /// `max_t p(i,t|star)` over the grid, per state.
    pub evidence: Vec<f64>,
}

impl ConnectivityPartition {
    pub fn n_connected(&self) -> usize {
        self.connected.len()
    }
}

/// 256 uniform points on `[0, 10 tau]` and 64 log-spaced points on
/// `[tau/1000, tau]`.
pub fn default_connectivity_grid(tau: f64) -> Vec<f64> {
    let mut grid: Vec<f64> = (0..256).map(|k| 10.0 * tau * k as f64 / 255.0).collect();
    grid.extend(log_grid(tau / 1000.0, tau, 64));
    grid
}

pub const CONNECTIVITY_TOL: f64 = 1e-9;

/// Splits the states by whether the evolution ever moves the target into
/// them on the sample grid.
pub fn connectivity(
    ev: &QuantumEvolution,
    basis: &MeasurementBasis,
    target: usize,
    t_grid: &[f64],
    tol: f64,
) -> Result<ConnectivityPartition> {
    if t_grid.is_empty() {
        return Err(Error::InvalidParameter("empty time grid".into()));
    }
    basis.check_index(target)?;
    let kernel = TransitionKernel::new(ev, basis)?;
    let n = basis.dim();
    let mut evidence = vec![0.0f64; n];
    for &t in t_grid {
        let p = kernel.column(target, t)?;
        for (e, v) in evidence.iter_mut().zip(p) {
            *e = e.max(v);
        }
    }
    let (mut connected, mut disconnected) = (Vec::new(), Vec::new());
    for (i, &e) in evidence.iter().enumerate() {
        if i == target || e > tol {
            connected.push(i);
        } else {
            disconnected.push(i);
        }
    }
    Ok(ConnectivityPartition {
        connected,
        disconnected,
        evidence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::*;
    use crate::quantum::{Operator, C64};
    use std::f64::consts::PI;

    fn exp1() -> MeasurementTimeDistribution {
        MeasurementTimeDistribution::exponential(1.0).unwrap()
    }

    #[test]
    fn qubit_w0_is_scalar() {
        let ev = qubit_unitary(1.0).unwrap();
        let basis = MeasurementBasis::qubit(PI / 2.0).unwrap();
        let m = build_matrices(&ev, &exp1(), &basis, 0).unwrap();
        assert_eq!(m.w0.shape(), (1, 1));
        assert!((m.w0[(0, 0)] - m.averaged[(1, 1)]).abs() < 1e-15);
        assert!((m.wstar0[0] - 0.25).abs() < 1e-10);
    }

    #[test]
    fn identity_evolution_matrices() {
        let ev = QuantumEvolution::identity(3);
        let m = build_matrices(&ev, &exp1(), &MeasurementBasis::computational(3), 1).unwrap();
        assert!((m.w0.clone() - DMatrix::<f64>::identity(2, 2)).abs().max() < 1e-12);
        assert!(m.wstar0.abs().max() < 1e-12);
        // the target only ever returns to itself
        let sol = mean_times(&m).unwrap();
        assert!(sol.singular);
        assert_eq!(sol.n_connected, 1);
        assert!((sol.t_star - 1.0).abs() < 1e-12);
        assert!(sol.switching.iter().all(|t| t.is_infinite()));
    }

    #[test]
    fn unital_qubit_returns_in_two_tau() {
        for ev in [
            qubit_unitary(1.3).unwrap(),
            qubit_dephasing(0.7, 0.9).unwrap(),
        ] {
            for theta in [0.3, 1.0, 2.5] {
                let basis = MeasurementBasis::qubit(theta).unwrap();
                let d = MeasurementTimeDistribution::exponential(1.7).unwrap();
                let sol = solve(&ev, &d, &basis, 0).unwrap();
                assert!((sol.t_star - 2.0 * 1.7).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn unitary_qubit_switching_time() {
        let sol = solve(
            &qubit_unitary(1.0).unwrap(),
            &exp1(),
            &MeasurementBasis::qubit(PI / 2.0).unwrap(),
            0,
        )
        .unwrap();
        assert!((sol.switching[0] - 4.0).abs() < 1e-8);
    }

    #[test]
    fn qutrit_table_values() {
        let sol = solve(
            &qutrit_sx(1.0).unwrap(),
            &exp1(),
            &MeasurementBasis::computational(3),
            0,
        )
        .unwrap();
        assert!((sol.t_star - 3.0).abs() < 1e-8);
        assert!((sol.switching_time(1).unwrap() - 5.5).abs() < 1e-8);
        assert!((sol.switching_time(2).unwrap() - 6.0).abs() < 1e-8);
    }

    #[test]
    fn closure_holds_for_unital_and_fails_for_decay() {
        for theta in [0.2, 1.0, PI / 2.0, 2.8] {
            let basis = MeasurementBasis::qubit(theta).unwrap();
            for ev in [
                qubit_unitary(1.0).unwrap(),
                qubit_dephasing(1.0, 1.0).unwrap(),
            ] {
                let m = build_matrices(&ev, &exp1(), &basis, 0).unwrap();
                assert!(closure_check(&m) <= 1e-8);
            }
        }
        let basis = MeasurementBasis::qubit(PI / 3.0).unwrap();
        let m = build_matrices(&qubit_decay(1.0, 1.0).unwrap(), &exp1(), &basis, 0).unwrap();
        assert!(closure_check(&m) > 0.01);
        // the equatorial basis is symmetric under decay: a(-|+) = a(+|-)
        let basis = MeasurementBasis::qubit(PI / 2.0).unwrap();
        let m = build_matrices(&qubit_decay(1.0, 1.0).unwrap(), &exp1(), &basis, 0).unwrap();
        assert!(closure_check(&m) < 1e-8);
    }

    #[test]
    fn decay_asymmetry_formula() {
        let ev = qubit_decay(1.0, 0.8).unwrap();
        let basis = MeasurementBasis::qubit(1.0).unwrap();
        let m = build_matrices(&ev, &exp1(), &basis, 0).unwrap();
        let sol = mean_times(&m).unwrap();
        let (a_mp, a_pm) = (m.averaged[(1, 0)], m.averaged[(0, 1)]);
        assert!((sol.t_star - (1.0 + a_mp / a_pm)).abs() < 1e-10);
        assert!((sol.switching[0] - 1.0 / a_pm).abs() < 1e-10);
        assert!((sol.t_star - 2.0).abs() > 0.1);
    }

    #[test]
    fn energy_basis_qubit_is_blocked() {
        let ev = qubit_unitary(1.0).unwrap();
        let basis = MeasurementBasis::qubit(0.0).unwrap();
        let part = connectivity(
            &ev,
            &basis,
            0,
            &default_connectivity_grid(1.0),
            CONNECTIVITY_TOL,
        )
        .unwrap();
        assert_eq!(part.connected, vec![0]);
        assert_eq!(part.disconnected, vec![1]);
        let sol = solve(&ev, &exp1(), &basis, 0).unwrap();
        assert!(sol.singular);
        assert_eq!(sol.n_connected, 1);
        assert!((sol.t_star - 1.0).abs() < 1e-12);

        let mixing = MeasurementBasis::qubit(PI / 2.0).unwrap();
        let part = connectivity(
            &ev,
            &mixing,
            0,
            &default_connectivity_grid(1.0),
            CONNECTIVITY_TOL,
        )
        .unwrap();
        assert_eq!(part.n_connected(), 2);
    }

    fn block_hamiltonian() -> Operator {
        let mut h = DMatrix::<C64>::zeros(4, 4);
        h[(0, 0)] = C64::new(0.3, 0.0);
        h[(0, 1)] = C64::new(0.8, 0.2);
        h[(1, 0)] = C64::new(0.8, -0.2);
        h[(1, 1)] = C64::new(-0.5, 0.0);
        h[(2, 2)] = C64::new(1.0, 0.0);
        h[(2, 3)] = C64::new(0.0, 0.6);
        h[(3, 2)] = C64::new(0.0, -0.6);
        Operator::new(h).unwrap()
    }

    #[test]
    fn block_diagonal_four_level() {
        let ev = QuantumEvolution::unitary(block_hamiltonian()).unwrap();
        let basis = MeasurementBasis::computational(4);
        let part = connectivity(
            &ev,
            &basis,
            0,
            &default_connectivity_grid(1.0),
            CONNECTIVITY_TOL,
        )
        .unwrap();
        assert_eq!(part.connected, vec![0, 1]);
        let sol = solve(&ev, &exp1(), &basis, 0).unwrap();
        assert_eq!(sol.n_connected, 2);
        assert!((sol.t_star - 2.0).abs() < 1e-8);
        assert!(sol.switching_time(1).unwrap().is_finite());
        assert!(sol.switching_time(2).unwrap().is_infinite());
    }

    #[test]
    fn unreachable_return_is_an_error() {
        // target 0 leaks into an absorbing state 2 that never comes back
        let a = DMatrix::from_row_slice(3, 3, &[0.5, 0.5, 0.0, 0.25, 0.5, 0.0, 0.25, 0.0, 1.0]);
        let m = RenewalMatrices::from_averaged(a, 0, 1.0).unwrap();
        let err = mean_times(&m).unwrap_err();
        assert!(matches!(err, Error::Singular { disconnected } if disconnected.contains(&2)));
    }

    #[test]
    fn invalid_matrices_rejected() {
        let a = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.6, 0.5]);
        assert!(RenewalMatrices::from_averaged(a, 0, 1.0).is_err());
        let a = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.5]);
        assert!(RenewalMatrices::from_averaged(a.clone(), 2, 1.0).is_err());
        assert!(RenewalMatrices::from_averaged(a, 0, 0.0).is_err());
    }

    #[test]
    fn label_permutation_permutes_times() {
        let ev = qutrit_sx(0.7).unwrap();
        let d = MeasurementTimeDistribution::gamma(2.0, 1.3).unwrap();
        let basis = MeasurementBasis::computational(3);
        let sol = solve(&ev, &d, &basis, 1).unwrap();
        // swap the two non-target vectors
        let swapped = MeasurementBasis::new(vec![
            basis.vector(2).clone(),
            basis.vector(1).clone(),
            basis.vector(0).clone(),
        ])
        .unwrap();
        let sol2 = solve(&ev, &d, &swapped, 1).unwrap();
        assert!((sol.t_star - sol2.t_star).abs() < 1e-10);
        assert!((sol.switching_time(0).unwrap() - sol2.switching_time(2).unwrap()).abs() < 1e-8);
        assert!((sol.switching_time(2).unwrap() - sol2.switching_time(0).unwrap()).abs() < 1e-8);
    }
}
