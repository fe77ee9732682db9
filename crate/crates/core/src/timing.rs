//! Waiting-time distributions between measurements and the time-averaged
//! transition probabilities `a(i|j) = int_0^inf phi(t) p(i,t|j) dt`.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::erf::erfc;
use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::error::{Error, Result};
use crate::evolution::{QuantumEvolution, TransitionKernel};
use crate::quadrature::{integrate_vec, QuadratureOptions};
use crate::quantum::{normalize_probabilities, MeasurementBasis, C64};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DistributionKind {
    Exponential,
    Deterministic,
    /// Gamma law with the given shape; the rate is `shape / mean`.
    Gamma {
        shape: f64,
    },
    /// Normal law restricted to `[0, inf)` and renormalized.
    TruncatedNormal {
        mu: f64,
        sigma: f64,
    },
}

/// Density `phi(t)` of the waiting time between consecutive measurements.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementTimeDistribution {
    kind: DistributionKind,
    mean: f64,
}

fn positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::InvalidDistribution(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `P(Z > x)` for a standard normal `Z`.
fn std_normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

impl MeasurementTimeDistribution {
    pub fn exponential(mean: f64) -> Result<Self> {
        Ok(Self {
            kind: DistributionKind::Exponential,
            mean: positive("mean", mean)?,
        })
    }

    /// Stroboscopic measurements every `time`.
    pub fn deterministic(time: f64) -> Result<Self> {
        Ok(Self {
            kind: DistributionKind::Deterministic,
            mean: positive("time", time)?,
        })
    }

    pub fn gamma(shape: f64, mean: f64) -> Result<Self> {
        Ok(Self {
            kind: DistributionKind::Gamma {
                shape: positive("shape", shape)?,
            },
            mean: positive("mean", mean)?,
        })
    }

    pub fn truncated_normal(mu: f64, sigma: f64) -> Result<Self> {
        let sigma = positive("sigma", sigma)?;
        if !mu.is_finite() {
            return Err(Error::InvalidDistribution(format!("mu = {mu}")));
        }
        let alpha = mu / sigma;
        let z = std_normal_sf(-alpha);
        if z < 1e-12 {
            return Err(Error::InvalidDistribution(format!(
                "almost no mass on [0, inf) for mu = {mu}, sigma = {sigma}"
            )));
        }
        let mean = mu + sigma * std_normal_pdf(alpha) / z;
        Ok(Self {
            kind: DistributionKind::TruncatedNormal { mu, sigma },
            mean,
        })
    }

    pub fn kind(&self) -> DistributionKind {
        self.kind
    }

    /// Mean waiting time `tau`.
    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Same family rescaled in time so that the mean becomes `tau`.
    pub fn with_mean(&self, tau: f64) -> Result<Self> {
        let tau = positive("mean", tau)?;
        match self.kind {
            DistributionKind::TruncatedNormal { mu, sigma } => {
                let c = tau / self.mean;
                Self::truncated_normal(mu * c, sigma * c)
            }
            kind => Ok(Self { kind, mean: tau }),
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            DistributionKind::Exponential => "exponential",
            DistributionKind::Deterministic => "deterministic",
            DistributionKind::Gamma { .. } => "gamma",
            DistributionKind::TruncatedNormal { .. } => "truncated_normal",
        }
    }

    /// `phi(t)`; `None` for the deterministic law, which has no density.
    pub fn density(&self, t: f64) -> Option<f64> {
        if t < 0.0 {
            return Some(0.0);
        }
        let tau = self.mean;
        match self.kind {
            DistributionKind::Exponential => Some((-t / tau).exp() / tau),
            DistributionKind::Deterministic => None,
            DistributionKind::Gamma { shape } => {
                let rate = shape / tau;
                if t == 0.0 {
                    return Some(if shape < 1.0 {
                        f64::INFINITY
                    } else if shape == 1.0 {
                        rate
                    } else {
                        0.0
                    });
                }
                let log = shape * rate.ln() + (shape - 1.0) * t.ln() - rate * t - ln_gamma(shape);
                Some(log.exp())
            }
            DistributionKind::TruncatedNormal { mu, sigma } => {
                let z = std_normal_sf(-mu / sigma);
                Some(std_normal_pdf((t - mu) / sigma) / (sigma * z))
            }
        }
    }

    /// Probability that no measurement happened by time `t`.
    pub fn survival(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 1.0;
        }
        let tau = self.mean;
        match self.kind {
            DistributionKind::Exponential => (-t / tau).exp(),
            DistributionKind::Deterministic => {
                if t < tau {
                    1.0
                } else {
                    0.0
                }
            }
            DistributionKind::Gamma { shape } => gamma_ur(shape, shape * t / tau),
            DistributionKind::TruncatedNormal { mu, sigma } => {
                (std_normal_sf((t - mu) / sigma) / std_normal_sf(-mu / sigma)).min(1.0)
            }
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        1.0 - self.survival(t)
    }

    /// Smallest convenient `T` with `survival(T) < eps`.
    pub fn tail_cutoff(&self, eps: f64) -> f64 {
        match self.kind {
            DistributionKind::Exponential => self.mean * (1.0 / eps).ln(),
            DistributionKind::Deterministic => self.mean,
            _ => {
                let mut hi = self.mean.max(f64::MIN_POSITIVE);
                while self.survival(hi) >= eps {
                    hi *= 2.0;
                }
                let mut lo = hi / 2.0;
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if self.survival(mid) >= eps {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                hi
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let tau = self.mean;
        match self.kind {
            DistributionKind::Exponential => {
                Exp::new(1.0 / tau).expect("positive rate").sample(rng)
            }
            DistributionKind::Deterministic => tau,
            DistributionKind::Gamma { shape } => Gamma::new(shape, tau / shape)
                .expect("positive parameters")
                .sample(rng),
            DistributionKind::TruncatedNormal { mu, sigma } => {
                // invert the survival function: S(t) = v with v uniform on (0, 1]
                let z = std_normal_sf(-mu / sigma);
                let v = 1.0 - rng.gen::<f64>();
                let q = Normal::new(0.0, 1.0)
                    .expect("standard normal")
                    .inverse_cdf(v * z);
                (mu - sigma * q).max(0.0)
            }
        }
    }

    /// `E[e^{lambda T}]` for `Re lambda <= 0`, when available in closed form.
    pub(crate) fn moment_generating(&self, lambda: C64) -> Option<C64> {
        let tau = self.mean;
        let one = C64::new(1.0, 0.0);
        match self.kind {
            DistributionKind::Exponential => Some(one / (one - lambda * tau)),
            DistributionKind::Deterministic => Some((lambda * tau).exp()),
            DistributionKind::Gamma { shape } => {
                let rate = shape / tau;
                Some((one - lambda / rate).powf(-shape))
            }
            DistributionKind::TruncatedNormal { .. } => None,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct AveragingOptions {
    pub quadrature: QuadratureOptions,
    /// Integrate up to `T` with `survival(T)` below this.
    pub tail: f64,
}

impl Default for AveragingOptions {
    fn default() -> Self {
        Self {
            quadrature: QuadratureOptions::default(),
            tail: 1e-16,
        }
    }
}

/// Column-stochastic matrix `A[i][j] = a(i|j)`.
pub fn averaged_matrix(
    dist: &MeasurementTimeDistribution,
    kernel: &TransitionKernel,
    opts: &AveragingOptions,
) -> Result<DMatrix<f64>> {
    let n = kernel.dim();
    let mut a = match dist.kind() {
        DistributionKind::Deterministic => kernel.matrix(dist.mean())?,
        _ => {
            let t_max = dist.tail_cutoff(opts.tail);
            let mut p = vec![0.0; n * n];
            let r = integrate_vec(
                |t, out: &mut [f64]| {
                    let w = dist.density(t).expect("continuous density");
                    kernel.raw_into(t, &mut p)?;
                    for (o, v) in out.iter_mut().zip(&p) {
                        *o = w * v;
                    }
                    Ok::<(), Error>(())
                },
                0.0,
                t_max,
                n * n,
                &opts.quadrature,
            )?;
            if !r.converged {
                let (worst, _) = r
                    .errors
                    .iter()
                    .enumerate()
                    .max_by(|x, y| x.1.total_cmp(y.1))
                    .expect("nonempty");
                return Err(Error::Quadrature {
                    i: worst % n,
                    j: worst / n,
                    estimate: r.values[worst],
                    error_bound: r.errors[worst],
                });
            }
            DMatrix::from_column_slice(n, n, &r.values)
        }
    };
    for mut col in a.column_iter_mut() {
        normalize_probabilities(col.as_mut_slice())?;
    }
    Ok(a)
}

/// Closed-form `A` from the eigenvalues of the generator. Available for the
/// exponential, gamma and deterministic laws when the evolution is
/// diagonalized; used to cross-check the quadrature.
pub fn averaged_matrix_spectral(
    dist: &MeasurementTimeDistribution,
    kernel: &TransitionKernel,
) -> Option<DMatrix<f64>> {
    dist.moment_generating(C64::new(0.0, 0.0))?;
    kernel.spectral_transform(|l| dist.moment_generating(l).expect("closed form"))
}

/// `a(i|j) = int_0^inf phi(t) p(i,t|j) dt`.
pub fn averaged_transition(
    dist: &MeasurementTimeDistribution,
    ev: &QuantumEvolution,
    basis: &MeasurementBasis,
    i: usize,
    j: usize,
) -> Result<f64> {
    ev.check_basis(basis)?;
    basis.check_index(i)?;
    basis.check_index(j)?;
    let kernel = TransitionKernel::new(ev, basis)?;
    Ok(averaged_matrix(dist, &kernel, &AveragingOptions::default())?[(i, j)])
}
