//! Report types. Every number is rounded to 12 significant digits; times
//! that are infinite (the target is never reached) appear as `null`.

use serde::{Deserialize, Serialize};

pub fn sig12(x: f64) -> f64 {
    if x.is_finite() {
        format!("{x:.11e}").parse().expect("formatted float")
    } else {
        x
    }
}

pub fn finite12(x: f64) -> Option<f64> {
    x.is_finite().then(|| sig12(x))
}

/// CSV cell: 12 significant digits, `inf` for divergent times, empty when
/// the quantity was not computed.
pub fn csv_cell(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => format!("{v:.11e}"),
        Some(v) if v.is_nan() => String::new(),
        Some(v) if v > 0.0 => "inf".into(),
        Some(_) => "-inf".into(),
        None => String::new(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveReport {
    pub command: String,
    pub dimension: usize,
    pub target: usize,
    pub tau: f64,
    pub distribution: String,
    #[serde(rename = "T_star")]
    pub t_star: f64,
    /// Switching times from `states`, in the same order.
    #[serde(rename = "T")]
    pub t: Vec<Option<f64>>,
    pub states: Vec<usize>,
    #[serde(rename = "N_c")]
    pub n_c: usize,
    pub connected: Vec<bool>,
    pub unital: bool,
    pub closure_residual: f64,
    pub singular: bool,
    pub smallest_singular_value: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateEntry {
    pub start: usize,
    pub mean: f64,
    pub std_error: f64,
    pub mean_measurements: f64,
    pub measurements_std_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateReport {
    pub command: String,
    pub dimension: usize,
    pub target: usize,
    pub tau: f64,
    pub distribution: String,
    pub seed: u64,
    pub trajectories: usize,
    /// One entry per start state; `start == target` is the return time.
    pub estimates: Vec<EstimateEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeReport {
    pub command: String,
    pub start: usize,
    pub target: usize,
    pub distribution: String,
    pub tau_star: f64,
    #[serde(rename = "T_min")]
    pub t_min: f64,
    pub bracket: [f64; 2],
    pub search_range: [f64; 2],
    pub converged: bool,
    pub interior: bool,
    pub best_probes: Vec<[f64; 2]>,
    pub evaluations: usize,
}

pub fn to_json<T: Serialize>(report: &T) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("serializable report");
    s.push('\n');
    s
}
