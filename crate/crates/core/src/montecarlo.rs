//! Direct simulation of the evolve / measure / collapse loop.
//!
//! A trajectory starts collapsed onto `|m_start>`. Each cycle draws a
//! waiting time from `phi`, evolves the projector for that long, and
//! measures in the basis; the trajectory ends at the first outcome equal to
//! the target. Elapsed time is the sum of the waiting times.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evolution::{QuantumEvolution, TransitionKernel};
use crate::quantum::{sample_index, MeasurementBasis};
use crate::rng::trajectory_rng;
use crate::timing::{DistributionKind, MeasurementTimeDistribution};

pub const DEFAULT_MEASUREMENT_CAP: u64 = 10_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryOutcome {
    pub elapsed: f64,
    pub n_measurements: u64,
    pub start: usize,
    pub target: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimateReport {
    pub start: usize,
    pub target: usize,
    pub mean: f64,
    /// Sample standard deviation over `sqrt(n_trajectories)`.
    pub std_error: f64,
    pub n_trajectories: usize,
    pub mean_measurements: f64,
    pub measurements_std_error: f64,
    /// `(t, Q(t))`: fraction of trajectories still undetected at `t`.
    pub empirical_survival: Option<Vec<(f64, f64)>>,
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Mean and standard error of the mean.
pub fn mean_and_std_error(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let mut total = CompensatedSum::default();
    let mut n = 0usize;
    for x in xs.clone() {
        total.add(x);
        n += 1;
    }
    let mean = total.value() / n as f64;
    let mut squares = CompensatedSum::default();
    for x in xs {
        squares.add((x - mean).powi(2));
    }
    let var = if n > 1 {
        squares.value() / (n - 1) as f64
    } else {
        0.0
    };
    (mean, (var / n as f64).sqrt())
}

/// `Q(t)` on a grid from observed first-detection times.
pub fn empirical_survival(elapsed: &[f64], grid: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted = elapsed.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    grid.iter()
        .map(|&t| {
            let done = sorted.partition_point(|&x| x <= t);
            (t, 1.0 - done as f64 / n)
        })
        .collect()
}

enum StepModel {
    /// Stroboscopic: one transition matrix for every cycle.
    Fixed(DMatrix<f64>),
    Kernel(TransitionKernel),
}

/// Simulates trajectories for one evolution, basis, distribution and target.
pub struct Simulator {
    step: StepModel,
    dist: MeasurementTimeDistribution,
    target: usize,
    dim: usize,
    pub cap: u64,
}

impl Simulator {
    pub fn new(
        ev: &QuantumEvolution,
        dist: &MeasurementTimeDistribution,
        basis: &MeasurementBasis,
        target: usize,
    ) -> Result<Self> {
        ev.check_basis(basis)?;
        basis.check_index(target)?;
        let kernel = TransitionKernel::new(ev, basis)?;
        let step = match dist.kind() {
            DistributionKind::Deterministic => StepModel::Fixed(kernel.matrix(dist.mean())?),
            _ => StepModel::Kernel(kernel),
        };
        Ok(Self {
            step,
            dist: *dist,
            target,
            dim: basis.dim(),
            cap: DEFAULT_MEASUREMENT_CAP,
        })
    }

    pub fn with_cap(mut self, cap: u64) -> Self {
        self.cap = cap;
        self
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn run_trajectory<R: Rng + ?Sized>(
        &self,
        start: usize,
        rng: &mut R,
    ) -> Result<TrajectoryOutcome> {
        if start >= self.dim {
            return Err(Error::IndexOutOfRange {
                index: start,
                dim: self.dim,
            });
        }
        let mut current = start;
        let mut elapsed = CompensatedSum::default();
        let mut probs = vec![0.0; self.dim];
        for n in 1..=self.cap {
            let dt = self.dist.sample(rng);
            elapsed.add(dt);
            match &self.step {
                StepModel::Fixed(p) => probs.copy_from_slice(p.column(current).as_slice()),
                StepModel::Kernel(k) => probs = k.column(current, dt)?,
            }
            let outcome = sample_index(&probs, rng.gen::<f64>());
            if outcome == self.target {
                return Ok(TrajectoryOutcome {
                    elapsed: elapsed.value(),
                    n_measurements: n,
                    start,
                    target: self.target,
                });
            }
            current = outcome;
        }
        Err(Error::MeasurementCap {
            start,
            target: self.target,
            cap: self.cap,
        })
    }

    /// Runs `n_trajectories` from `start`; trajectory `k` draws from the
    /// stream keyed by `(master_seed, start, k)`.
    pub fn outcomes(
        &self,
        start: usize,
        n_trajectories: usize,
        master_seed: u64,
    ) -> Result<Vec<TrajectoryOutcome>> {
        (0..n_trajectories as u64)
            .into_par_iter()
            .map(|k| self.run_trajectory(start, &mut trajectory_rng(master_seed, start, k)))
            .collect::<Vec<_>>()
            .into_iter()
            .collect()
    }

    pub fn estimate(
        &self,
        start: usize,
        n_trajectories: usize,
        master_seed: u64,
        survival_grid: Option<&[f64]>,
    ) -> Result<EstimateReport> {
        if n_trajectories < 2 {
            return Err(Error::InvalidParameter(format!(
                "need at least 2 trajectories, got {n_trajectories}"
            )));
        }
        let outcomes = self.outcomes(start, n_trajectories, master_seed)?;
        Ok(summarize(&outcomes, start, self.target, survival_grid))
    }
}

pub fn summarize(
    outcomes: &[TrajectoryOutcome],
    start: usize,
    target: usize,
    survival_grid: Option<&[f64]>,
) -> EstimateReport {
    let (mean, std_error) = mean_and_std_error(outcomes.iter().map(|o| o.elapsed));
    let (mean_measurements, measurements_std_error) =
        mean_and_std_error(outcomes.iter().map(|o| o.n_measurements as f64));
    let empirical_survival = survival_grid.map(|grid| {
        let elapsed: Vec<f64> = outcomes.iter().map(|o| o.elapsed).collect();
        empirical_survival(&elapsed, grid)
    });
    EstimateReport {
        start,
        target,
        mean,
        std_error,
        n_trajectories: outcomes.len(),
        mean_measurements,
        measurements_std_error,
        empirical_survival,
    }
}

pub fn run_trajectory<R: Rng + ?Sized>(
    ev: &QuantumEvolution,
    dist: &MeasurementTimeDistribution,
    basis: &MeasurementBasis,
    start: usize,
    target: usize,
    rng: &mut R,
) -> Result<TrajectoryOutcome> {
    Simulator::new(ev, dist, basis, target)?.run_trajectory(start, rng)
}

/// Estimates the mean time to detect `target` from every start state
/// (the return time when `start == target`).
pub fn estimate_mean_times(
    ev: &QuantumEvolution,
    dist: &MeasurementTimeDistribution,
    basis: &MeasurementBasis,
    target: usize,
    n_trajectories: usize,
    master_seed: u64,
) -> Result<BTreeMap<usize, EstimateReport>> {
    let sim = Simulator::new(ev, dist, basis, target)?;
    (0..basis.dim())
        .map(|start| {
            Ok((
                start,
                sim.estimate(start, n_trajectories, master_seed, None)?,
            ))
        })
        .collect()
}
