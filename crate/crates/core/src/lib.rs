//! Mean return and switching times of finite-dimensional quantum systems
//! whose state is reset by repeated projective measurements.
//!
//! The analytic route ([`renewal`]) averages the transition probabilities
//! `p(i,t|j)` of a quantum evolution against the waiting-time density
//! `phi(t)` and solves the resulting renewal equations at `s = 0`. The
//! stochastic route ([`montecarlo`]) simulates the evolve / measure /
//! collapse loop directly. [`oracles`] holds closed-form qubit and qutrit
//! results used to check both.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod evolution;
pub mod models;
pub mod montecarlo;
pub mod optimize;
pub mod oracles;
pub mod quadrature;
pub mod quantum;
pub mod renewal;
pub mod rng;
pub mod spectral;
pub mod timing;

pub use error::{Error, Result};
pub use evolution::{Dissipator, KrausFamily, Propagator, QuantumEvolution, TransitionKernel};
pub use montecarlo::{estimate_mean_times, EstimateReport, Simulator};
pub use optimize::{minimize_tau, OptimizationResult};
pub use quantum::{born_probabilities, collapse, DensityMatrix, MeasurementBasis, Operator, C64};
pub use renewal::{connectivity, mean_times, RenewalMatrices, RenewalSolution};
pub use timing::{averaged_transition, MeasurementTimeDistribution};
