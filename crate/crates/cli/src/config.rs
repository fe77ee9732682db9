//! JSON run configuration.
//!
//! ```json
//! {
//!   "dimension": 2,
//!   "evolution": {
//!     "kind": "lindblad",
//!     "omega": 1.0,
//!     "hamiltonian": [[[0.5, 0], [0, 0]], [[0, 0], [-0.5, 0]]],
//!     "dissipators": [{"rate": 1.0, "jump": [[0, 0], [1, 0]]}]
//!   },
//!   "basis": {"qubit_theta": 1.5707963267948966},
//!   "distribution": {"kind": "exponential", "tau": 1.0},
//!   "target": 0,
//!   "seed": 7,
//!   "trajectories": 10000
//! }
//! ```
//!
//! Complex entries are `[re, im]` pairs; a bare number is read as real.
//! State indices are 0-based in basis order.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use qreset_core::evolution::{Dissipator, QuantumEvolution};
use qreset_core::{MeasurementBasis, MeasurementTimeDistribution, Operator, C64};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, expecting = "a complex number as [re, im] or a real number")]
pub enum ComplexSpec {
    Pair([f64; 2]),
    Real(f64),
}

impl ComplexSpec {
    fn value(self) -> C64 {
        match self {
            ComplexSpec::Pair([re, im]) => C64::new(re, im),
            ComplexSpec::Real(re) => C64::new(re, 0.0),
        }
    }
}

/// Row-major matrix of complex entries.
pub type MatrixSpec = Vec<Vec<ComplexSpec>>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvolutionTag {
    Unitary,
    Lindblad,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DissipatorSpec {
    pub rate: f64,
    pub jump: MatrixSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSpec {
    pub kind: EvolutionTag,
    pub hamiltonian: MatrixSpec,
    /// Multiplies the Hamiltonian.
    #[serde(default = "one")]
    pub omega: f64,
    #[serde(default)]
    pub dissipators: Vec<DissipatorSpec>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(
    untagged,
    expecting = "a basis: {\"qubit_theta\": angle}, {\"spin_z\": N}, {\"vectors\": [...]} or a list of vectors"
)]
pub enum BasisSpec {
    QubitTheta { qubit_theta: f64 },
    SpinZ { spin_z: usize },
    Vectors { vectors: Vec<Vec<ComplexSpec>> },
    Explicit(Vec<Vec<ComplexSpec>>),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionSpec {
    Exponential { tau: f64 },
    Deterministic { tau: f64 },
    Gamma { shape: f64, tau: f64 },
    TruncatedNormal { mu: f64, sigma: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Theta,
    Kappa,
    Tau,
    Omega,
}

impl SweepParameter {
    pub fn name(self) -> &'static str {
        match self {
            SweepParameter::Theta => "theta",
            SweepParameter::Kappa => "kappa",
            SweepParameter::Tau => "tau",
            SweepParameter::Omega => "omega",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    #[default]
    Solve,
    Simulate,
    Both,
}

impl SweepMode {
    pub fn analytic(self) -> bool {
        matches!(self, SweepMode::Solve | SweepMode::Both)
    }

    pub fn monte_carlo(self) -> bool {
        matches!(self, SweepMode::Simulate | SweepMode::Both)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
    #[serde(default)]
    pub mode: SweepMode,
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        (0..self.steps)
            .map(|k| self.from + (self.to - self.from) * k as f64 / (self.steps - 1) as f64)
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeSpec {
    /// Start state of the minimized time; the target itself selects the
    /// return time.
    pub start: usize,
    pub tau_lo: f64,
    pub tau_hi: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurvivalSpec {
    pub t_max: f64,
    #[serde(default = "default_survival_points")]
    pub points: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dimension: usize,
    pub evolution: EvolutionSpec,
    pub basis: BasisSpec,
    pub distribution: DistributionSpec,
    pub target: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trajectories")]
    pub trajectories: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measurement_cap: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub survival: Option<SurvivalSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimize: Option<OptimizeSpec>,
}

fn one() -> f64 {
    1.0
}

fn default_trajectories() -> usize {
    10_000
}

fn default_survival_points() -> usize {
    101
}

/// Core objects built from a configuration.
pub struct Model {
    pub evolution: QuantumEvolution,
    pub basis: MeasurementBasis,
    pub distribution: MeasurementTimeDistribution,
    pub target: usize,
}

fn config_error(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {msg}"))
}

fn matrix(field: &str, spec: &MatrixSpec, n: usize) -> Result<Operator, CliError> {
    if spec.len() != n || spec.iter().any(|row| row.len() != n) {
        let cols: Vec<usize> = spec.iter().map(Vec::len).collect();
        return Err(config_error(
            field,
            format!(
                "expected a {n}x{n} matrix, found {} rows of lengths {cols:?}",
                spec.len()
            ),
        ));
    }
    Operator::new(DMatrix::from_fn(n, n, |i, j| spec[i][j].value()))
        .map_err(|e| config_error(field, e))
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let config: RunConfig =
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Checks everything that does not need a numerical solve.
    pub fn validate(&self) -> Result<(), CliError> {
        let n = self.dimension;
        if n < 2 {
            return Err(config_error(
                "dimension",
                format!("must be at least 2, got {n}"),
            ));
        }
        if self.target >= n {
            return Err(config_error(
                "target",
                format!("index {} out of range for dimension {n}", self.target),
            ));
        }
        if self.trajectories < 2 {
            return Err(config_error("trajectories", "need at least 2"));
        }
        if self.evolution.kind == EvolutionTag::Unitary && !self.evolution.dissipators.is_empty() {
            return Err(config_error(
                "evolution.dissipators",
                "a unitary evolution takes no dissipators",
            ));
        }
        if let Some(s) = &self.sweep {
            if s.steps < 2 {
                return Err(config_error(
                    "sweep.steps",
                    format!("need at least 2, got {}", s.steps),
                ));
            }
            if !(s.from.is_finite() && s.to.is_finite()) || s.from == s.to {
                return Err(config_error(
                    "sweep",
                    format!("empty range [{}, {}]", s.from, s.to),
                ));
            }
            match s.parameter {
                SweepParameter::Theta if !matches!(self.basis, BasisSpec::QubitTheta { .. }) => {
                    return Err(config_error(
                        "sweep.parameter",
                        "theta needs a {\"qubit_theta\"} basis",
                    ))
                }
                SweepParameter::Kappa if self.evolution.dissipators.is_empty() => {
                    return Err(config_error(
                        "sweep.parameter",
                        "kappa needs a lindblad evolution with dissipators",
                    ))
                }
                _ => {}
            }
        }
        if let Some(o) = &self.optimize {
            if o.start >= n {
                return Err(config_error(
                    "optimize.start",
                    format!("index {} out of range", o.start),
                ));
            }
        }
        if let Some(s) = &self.survival {
            if !(s.t_max > 0.0) || s.points < 2 {
                return Err(config_error(
                    "survival",
                    "need t_max > 0 and at least 2 points",
                ));
            }
        }
        self.model().map(|_| ())
    }

    pub fn model(&self) -> Result<Model, CliError> {
        self.model_at(None)
    }

    /// Builds the model with one parameter overridden.
    pub fn model_at(&self, over: Option<(SweepParameter, f64)>) -> Result<Model, CliError> {
        let n = self.dimension;
        let ev = &self.evolution;
        let mut omega = ev.omega;
        let mut kappa = None;
        let mut theta = None;
        let mut tau = None;
        match over {
            Some((SweepParameter::Omega, v)) => omega = v,
            Some((SweepParameter::Kappa, v)) => kappa = Some(v),
            Some((SweepParameter::Theta, v)) => theta = Some(v),
            Some((SweepParameter::Tau, v)) => tau = Some(v),
            None => {}
        }

        let hamiltonian = matrix("evolution.hamiltonian", &ev.hamiltonian, n)?.scale(omega);
        let evolution = match ev.kind {
            EvolutionTag::Unitary => QuantumEvolution::unitary(hamiltonian),
            EvolutionTag::Lindblad => {
                let dissipators = ev
                    .dissipators
                    .iter()
                    .enumerate()
                    .map(|(k, d)| {
                        let jump = matrix(&format!("evolution.dissipators[{k}].jump"), &d.jump, n)?;
                        Ok(Dissipator::new(kappa.unwrap_or(d.rate), jump))
                    })
                    .collect::<Result<Vec<_>, CliError>>()?;
                QuantumEvolution::lindblad(hamiltonian, dissipators)
            }
        }
        .map_err(|e| config_error("evolution", e))?;

        let basis = match &self.basis {
            BasisSpec::QubitTheta { qubit_theta } => {
                if n != 2 {
                    return Err(config_error(
                        "basis.qubit_theta",
                        format!("needs dimension 2, got {n}"),
                    ));
                }
                MeasurementBasis::qubit(theta.unwrap_or(*qubit_theta))
            }
            BasisSpec::SpinZ { spin_z } => {
                if *spin_z != n {
                    return Err(config_error(
                        "basis.spin_z",
                        format!("{spin_z} does not match dimension {n}"),
                    ));
                }
                Ok(MeasurementBasis::computational(n))
            }
            BasisSpec::Vectors { vectors } | BasisSpec::Explicit(vectors) => {
                if vectors.len() != n || vectors.iter().any(|v| v.len() != n) {
                    return Err(config_error(
                        "basis.vectors",
                        format!("expected {n} vectors of length {n}"),
                    ));
                }
                MeasurementBasis::new(
                    vectors
                        .iter()
                        .map(|v| DVector::from_iterator(n, v.iter().map(|c| c.value())))
                        .collect(),
                )
            }
        }
        .map_err(|e| config_error("basis", e))?;

        let distribution = match self.distribution {
            DistributionSpec::Exponential { tau } => MeasurementTimeDistribution::exponential(tau),
            DistributionSpec::Deterministic { tau } => {
                MeasurementTimeDistribution::deterministic(tau)
            }
            DistributionSpec::Gamma { shape, tau } => {
                MeasurementTimeDistribution::gamma(shape, tau)
            }
            DistributionSpec::TruncatedNormal { mu, sigma } => {
                MeasurementTimeDistribution::truncated_normal(mu, sigma)
            }
        }
        .and_then(|d| match tau {
            Some(t) => d.with_mean(t),
            None => Ok(d),
        })
        .map_err(|e| config_error("distribution", e))?;

        Ok(Model {
            evolution,
            basis,
            distribution,
            target: self.target,
        })
    }
}

/// Serializes a matrix for a configuration file.
pub fn matrix_spec(m: &DMatrix<C64>) -> MatrixSpec {
    m.row_iter()
        .map(|row| {
            row.iter()
                .map(|z| ComplexSpec::Pair([z.re, z.im]))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const QUBIT: &str = r#"{
        "dimension": 2,
        "evolution": {"kind": "unitary", "hamiltonian": [[0.5, 0], [0, [-0.5, 0]]]},
        "basis": {"qubit_theta": 1.0},
        "distribution": {"kind": "exponential", "tau": 1.0},
        "target": 0
    }"#;

    #[test]
    fn parses_minimal_config() {
        let c = RunConfig::from_json(QUBIT).unwrap();
        assert_eq!(c.trajectories, 10_000);
        assert_eq!(c.evolution.omega, 1.0);
        let m = c.model().unwrap();
        assert_eq!(m.basis.dim(), 2);
    }

    #[test]
    fn field_level_errors() {
        let bad = QUBIT.replace("\"target\": 0", "\"target\": 5");
        let err = RunConfig::from_json(&bad).unwrap_err().to_string();
        assert!(err.contains("target"), "{err}");

        let bad = QUBIT.replace("[[0.5, 0], [0, [-0.5, 0]]]", "[[0.5, 0]]");
        let err = RunConfig::from_json(&bad).unwrap_err().to_string();
        assert!(err.contains("evolution.hamiltonian"), "{err}");

        let bad = QUBIT.replace("\"tau\": 1.0", "\"tau\": -1.0");
        let err = RunConfig::from_json(&bad).unwrap_err().to_string();
        assert!(err.contains("distribution"), "{err}");

        let bad = QUBIT.replace("\"target\": 0", "\"target\": 0, \"colour\": 1");
        let err = RunConfig::from_json(&bad).unwrap_err().to_string();
        assert!(err.contains("colour"), "{err}");
    }

    #[test]
    fn non_orthonormal_basis_rejected() {
        let bad = QUBIT.replace(r#"{"qubit_theta": 1.0}"#, "[[1, 0], [1, 0]]");
        let err = RunConfig::from_json(&bad).unwrap_err().to_string();
        assert!(err.starts_with("basis"), "{err}");
    }

    #[test]
    fn kappa_sweep_needs_dissipators() {
        let bad = QUBIT.replace(
            "\"target\": 0",
            r#""target": 0, "sweep": {"parameter": "kappa", "from": 0.1, "to": 1, "steps": 3}"#,
        );
        let err = RunConfig::from_json(&bad).unwrap_err().to_string();
        assert!(err.contains("kappa"), "{err}");
    }

    #[test]
    fn sweep_values_cover_the_range() {
        let s = SweepSpec {
            parameter: SweepParameter::Tau,
            from: 1.0,
            to: 2.0,
            steps: 5,
            mode: SweepMode::Solve,
        };
        assert_eq!(s.values(), vec![1.0, 1.25, 1.5, 1.75, 2.0]);
    }
}
