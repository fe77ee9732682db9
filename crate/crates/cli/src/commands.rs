use qreset_core::evolution::default_unitality_grid;
use qreset_core::montecarlo::{EstimateReport, Simulator};
use qreset_core::optimize::minimize_tau;
use qreset_core::renewal::{build_matrices, closure_check, mean_times, RenewalSolution};
use qreset_core::Error;
use rayon::prelude::*;

use crate::config::{Model, RunConfig, SweepParameter, SweepSpec};
use crate::error::CliError;
use crate::report::*;
use crate::svg::{self, Series, Style};

const UNITALITY_TOL: f64 = 1e-9;

fn renewal(model: &Model) -> Result<RenewalSolution, CliError> {
    let m = build_matrices(
        &model.evolution,
        &model.distribution,
        &model.basis,
        model.target,
    )?;
    Ok(mean_times(&m)?)
}

/// Mean time to the target from every state, target included; infinite
/// where the target is never reached.
fn times_by_state(s: &RenewalSolution, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| s.switching_time(i).unwrap_or(f64::INFINITY))
        .collect()
}

pub fn solve(config: &RunConfig) -> Result<SolveReport, CliError> {
    let model = config.model()?;
    let tau = model.distribution.mean();
    let m = build_matrices(
        &model.evolution,
        &model.distribution,
        &model.basis,
        model.target,
    )?;
    let s = mean_times(&m)?;
    Ok(SolveReport {
        command: "solve".into(),
        dimension: config.dimension,
        target: model.target,
        tau: sig12(tau),
        distribution: model.distribution.name().into(),
        t_star: sig12(s.t_star),
        t: s.switching.iter().map(|&t| finite12(t)).collect(),
        states: s.states.clone(),
        n_c: s.n_connected,
        connected: s.connected.clone(),
        unital: model
            .evolution
            .is_unital(&default_unitality_grid(tau), UNITALITY_TOL),
        closure_residual: sig12(closure_check(&m)),
        singular: s.singular,
        smallest_singular_value: finite12(s.smallest_singular_value),
    })
}

#[derive(Debug)]
pub struct Simulation {
    pub report: SimulateReport,
    pub estimates: Vec<EstimateReport>,
}

fn simulator(config: &RunConfig, model: &Model) -> Result<Simulator, CliError> {
    let sim = Simulator::new(
        &model.evolution,
        &model.distribution,
        &model.basis,
        model.target,
    )?;
    Ok(match config.measurement_cap {
        Some(cap) => sim.with_cap(cap),
        None => sim,
    })
}

/// Start states whose trajectories would never reach the target.
fn unreachable_starts(model: &Model) -> Result<Vec<usize>, CliError> {
    match renewal(model) {
        Ok(s) => Ok(times_by_state(&s, model.basis.dim())
            .iter()
            .enumerate()
            .filter(|(_, t)| !t.is_finite())
            .map(|(i, _)| i)
            .collect()),
        Err(CliError::Numerical(Error::Singular { disconnected })) => {
            let mut states = disconnected;
            states.push(model.target);
            states.sort_unstable();
            Ok(states)
        }
        Err(e) => Err(e),
    }
}

pub fn simulate(config: &RunConfig) -> Result<Simulation, CliError> {
    let model = config.model()?;
    let n = config.dimension;
    let blocked = unreachable_starts(&model)?;
    if !blocked.is_empty() {
        return Err(CliError::Disconnected {
            target: model.target,
            states: blocked,
            detail: "the evolution never carries these states into the target".into(),
        });
    }
    let sim = simulator(config, &model)?;
    let grid = config.survival.map(|s| {
        (0..s.points)
            .map(|k| s.t_max * k as f64 / (s.points - 1) as f64)
            .collect::<Vec<_>>()
    });
    let estimates = (0..n)
        .map(|start| sim.estimate(start, config.trajectories, config.seed, grid.as_deref()))
        .collect::<Result<Vec<_>, _>>()?;
    let report = SimulateReport {
        command: "simulate".into(),
        dimension: n,
        target: model.target,
        tau: sig12(model.distribution.mean()),
        distribution: model.distribution.name().into(),
        seed: config.seed,
        trajectories: config.trajectories,
        estimates: estimates.iter().map(entry).collect(),
    };
    Ok(Simulation { report, estimates })
}

fn entry(e: &EstimateReport) -> EstimateEntry {
    EstimateEntry {
        start: e.start,
        mean: sig12(e.mean),
        std_error: sig12(e.std_error),
        mean_measurements: sig12(e.mean_measurements),
        measurements_std_error: sig12(e.measurements_std_error),
    }
}

/// `t,Q_0,...,Q_{N-1}` from the empirical survival curves.
pub fn survival_csv(estimates: &[EstimateReport]) -> Option<String> {
    let curves: Vec<&Vec<(f64, f64)>> = estimates
        .iter()
        .map(|e| e.empirical_survival.as_ref())
        .collect::<Option<_>>()?;
    let mut out = String::from("t");
    for e in estimates {
        out.push_str(&format!(",Q_{}", e.start));
    }
    out.push('\n');
    for (k, &(t, _)) in curves.first()?.iter().enumerate() {
        out.push_str(&csv_cell(Some(t)));
        for c in &curves {
            out.push(',');
            out.push_str(&csv_cell(Some(c[k].1)));
        }
        out.push('\n');
    }
    Some(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    /// Renewal prediction per state (return time at the target).
    pub analytic: Option<Vec<f64>>,
    /// `(mean, std_error, mean_measurements)` per state; `None` for states
    /// that never reach the target.
    pub monte_carlo: Option<Vec<Option<(f64, f64, f64)>>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepTable {
    pub parameter: SweepParameter,
    pub dimension: usize,
    pub target: usize,
    pub rows: Vec<SweepRow>,
}

fn point_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64 + 1).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

fn sweep_point(
    config: &RunConfig,
    spec: &SweepSpec,
    index: usize,
    value: f64,
) -> Result<SweepRow, CliError> {
    let model = config.model_at(Some((spec.parameter, value)))?;
    let n = config.dimension;
    let times = match renewal(&model) {
        Ok(s) => times_by_state(&s, n),
        Err(CliError::Numerical(Error::Singular { .. })) => vec![f64::INFINITY; n],
        Err(e) => return Err(e),
    };
    let monte_carlo = if spec.mode.monte_carlo() {
        let sim = simulator(config, &model)?;
        let seed = point_seed(config.seed, index);
        let per_state = (0..n)
            .map(|start| {
                if !times[start].is_finite() {
                    return Ok(None);
                }
                let e = sim.estimate(start, config.trajectories, seed, None)?;
                Ok(Some((e.mean, e.std_error, e.mean_measurements)))
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        Some(per_state)
    } else {
        None
    };
    Ok(SweepRow {
        value,
        analytic: spec.mode.analytic().then_some(times),
        monte_carlo,
    })
}

pub fn sweep(config: &RunConfig) -> Result<SweepTable, CliError> {
    let spec = config
        .sweep
        .ok_or_else(|| CliError::Config("sweep: missing sweep block".into()))?;
    let rows = spec
        .values()
        .into_par_iter()
        .enumerate()
        .map(|(k, v)| sweep_point(config, &spec, k, v))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SweepTable {
        parameter: spec.parameter,
        dimension: config.dimension,
        target: config.target,
        rows,
    })
}

impl SweepTable {
    /// Columns: `index`, the swept parameter, then per state `i`
    /// `analytic_i`, `mc_mean_i`, `mc_se_i`, `mc_measurements_i`.
    pub fn header(&self) -> String {
        let mut h = format!("index,{}", self.parameter.name());
        for i in 0..self.dimension {
            h.push_str(&format!(
                ",analytic_{i},mc_mean_{i},mc_se_{i},mc_measurements_{i}"
            ));
        }
        h
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header();
        out.push('\n');
        for (k, row) in self.rows.iter().enumerate() {
            out.push_str(&format!("{k},{}", csv_cell(Some(row.value))));
            for i in 0..self.dimension {
                let analytic = row.analytic.as_ref().map(|a| a[i]);
                let mc = row.monte_carlo.as_ref().and_then(|m| m[i]);
                out.push(',');
                out.push_str(&csv_cell(analytic));
                for v in [mc.map(|m| m.0), mc.map(|m| m.1), mc.map(|m| m.2)] {
                    out.push(',');
                    out.push_str(&csv_cell(v));
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn to_svg(&self) -> String {
        let label = |i: usize| {
            if i == self.target {
                format!("return to {}", self.target)
            } else {
                format!("{i} to {}", self.target)
            }
        };
        let mut series = Vec::new();
        for i in 0..self.dimension {
            if self.rows.iter().any(|r| r.analytic.is_some()) {
                series.push(Series {
                    name: format!("analytic, {}", label(i)),
                    style: Style::Line,
                    points: self
                        .rows
                        .iter()
                        .filter_map(|r| r.analytic.as_ref().map(|a| (r.value, a[i])))
                        .collect(),
                });
            }
            if self.rows.iter().any(|r| r.monte_carlo.is_some()) {
                series.push(Series {
                    name: format!("simulated, {}", label(i)),
                    style: Style::Markers,
                    points: self
                        .rows
                        .iter()
                        .filter_map(|r| {
                            r.monte_carlo
                                .as_ref()
                                .and_then(|m| m[i])
                                .map(|m| (r.value, m.0))
                        })
                        .collect(),
                });
            }
        }
        svg::plot(
            &format!("mean times to state {}", self.target),
            self.parameter.name(),
            "mean time",
            &series,
        )
    }
}

pub fn optimize(config: &RunConfig) -> Result<OptimizeReport, CliError> {
    let spec = config
        .optimize
        .ok_or_else(|| CliError::Config("optimize: missing optimize block".into()))?;
    let objective = |tau: f64| -> qreset_core::Result<f64> {
        let model = config
            .model_at(Some((SweepParameter::Tau, tau)))
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
        let m = build_matrices(
            &model.evolution,
            &model.distribution,
            &model.basis,
            model.target,
        )?;
        let s = mean_times(&m)?;
        Ok(s.switching_time(spec.start).unwrap_or(f64::INFINITY))
    };
    let r = minimize_tau(objective, spec.tau_lo, spec.tau_hi).map_err(|e| match e {
        Error::InvalidParameter(msg) => CliError::Config(format!("optimize: {msg}")),
        e => CliError::Numerical(e),
    })?;
    Ok(OptimizeReport {
        command: "optimize".into(),
        start: spec.start,
        target: config.target,
        distribution: config.model()?.distribution.name().into(),
        tau_star: sig12(r.tau_star),
        t_min: sig12(r.t_min),
        bracket: [sig12(r.bracket.0), sig12(r.bracket.1)],
        search_range: [sig12(spec.tau_lo), sig12(spec.tau_hi)],
        converged: r.converged,
        interior: r.interior,
        best_probes: r
            .best_probes
            .iter()
            .map(|&(t, v)| [sig12(t), sig12(v)])
            .collect(),
        evaluations: r.evaluations,
    })
}
