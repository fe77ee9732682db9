//! Closed-form mean times for the qubit and spin-1 examples under
//! exponentially distributed measurement times.
//!
//! Each formula is written out term by term as it is usually printed, with
//! no algebraic simplification, so that it stays independent of the
//! renewal solver it is used to check.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitParams {
    pub omega: f64,
    pub kappa: f64,
    /// Measurement angle, strictly inside `(0, pi)`.
    pub theta: f64,
    pub tau: f64,
}

impl QubitParams {
    pub fn new(omega: f64, kappa: f64, theta: f64, tau: f64) -> Self {
        Self {
            omega,
            kappa,
            theta,
            tau,
        }
    }

    fn validate(&self) -> Result<()> {
        let p = std::f64::consts::PI;
        if !(self.theta > 0.0 && self.theta < p) {
            return Err(Error::InvalidParameter(format!(
                "theta = {} must lie strictly inside (0, pi); the endpoints are blocked and obey T_star = N_c tau",
                self.theta
            )));
        }
        if !(self.tau > 0.0) || !(self.kappa >= 0.0) || !self.omega.is_finite() {
            return Err(Error::InvalidParameter(format!("{self:?}")));
        }
        Ok(())
    }
}

/// Unitary qubit: `T_- = 2 tau / sin^2(theta) (1 + 1/(omega tau)^2)`.
pub fn qubit_unitary_t_minus(p: &QubitParams) -> Result<f64> {
    p.validate()?;
    let QubitParams {
        omega, theta, tau, ..
    } = *p;
    Ok(2.0 * tau / theta.sin().powi(2) * (1.0 + 1.0 / (omega * tau).powi(2)))
}

/// Dephasing qubit:
/// `T_- = 2 tau / sin^2(theta) ((2 kappa tau + 1)^2 + (omega tau)^2) / ((2 kappa tau)^2 + 2 kappa tau + (omega tau)^2)`.
pub fn qubit_dephasing_t_minus(p: &QubitParams) -> Result<f64> {
    p.validate()?;
    let QubitParams {
        omega,
        kappa,
        theta,
        tau,
    } = *p;
    let numerator = (2.0 * kappa * tau + 1.0).powi(2) + (omega * tau).powi(2);
    let denominator = (2.0 * kappa * tau).powi(2) + 2.0 * kappa * tau + (omega * tau).powi(2);
    Ok(2.0 * tau / theta.sin().powi(2) * numerator / denominator)
}

/// Decaying qubit: `(T_-, T_+)`.
pub fn qubit_decay_times(p: &QubitParams) -> Result<(f64, f64)> {
    p.validate()?;
    let QubitParams {
        omega,
        kappa,
        theta,
        tau,
    } = *p;
    let kt = kappa * tau;
    let wt2 = (2.0 * omega * tau).powi(2);
    let csc2_half = 1.0 / (theta / 2.0).sin().powi(2);
    let cot2_half = ((theta / 2.0).cos() / (theta / 2.0).sin()).powi(2);

    let t_minus = tau * ((kt + 1.0) * csc2_half * ((kt + 2.0).powi(2) + wt2))
        / ((kt + 1.0) * (kt * (kt + 2.0) + wt2) - theta.cos() * (kt * (kt + 2.0) - wt2));

    let t_plus = tau
        * (1.0
            + (cot2_half
                * (theta.cos() * (kt * (kt + 2.0) - wt2) + (kt + 1.0) * (kt * (kt + 2.0) + wt2)))
                / ((kt + 1.0) * (kt * (kt + 2.0) + wt2) - theta.cos() * (kt * (kt + 2.0) - wt2)));
    Ok((t_minus, t_plus))
}

/// Mean times for spin 1 under `exp(-i omega t S_x)`, measured in the `S_z`
/// basis `{+1, 0, -1}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QutritTimes {
    pub t_pp: f64,
    pub t_0p: f64,
    pub t_mp: f64,
    pub t_p0: f64,
    pub t_00: f64,
    pub t_m0: f64,
    pub t_pm: f64,
    pub t_0m: f64,
    pub t_mm: f64,
}

impl QutritTimes {
    /// `(T_++, T_0+, T_-+, T_+0, T_00, T_-0, T_+-, T_0-, T_--)`.
    pub fn as_array(&self) -> [f64; 9] {
        [
            self.t_pp, self.t_0p, self.t_mp, self.t_p0, self.t_00, self.t_m0, self.t_pm, self.t_0m,
            self.t_mm,
        ]
    }

    /// `T` for a walk starting in `start` and ending on `target`, with
    /// indices `0, 1, 2` for `+1, 0, -1`.
    pub fn get(&self, start: usize, target: usize) -> f64 {
        self.as_array()[3 * target + start]
    }
}

pub fn qutrit_unitary_times(omega: f64, tau: f64) -> Result<QutritTimes> {
    if !(omega * tau > 0.0) || !(omega * tau).is_finite() {
        return Err(Error::InvalidParameter(format!(
            "omega tau = {} must be positive",
            omega * tau
        )));
    }
    let wt = omega * tau;
    let t_0p = tau * (7.0 / 2.0 + 2.0 / wt.powi(2));
    let t_mp = 3.0 * tau * (1.0 + 1.0 / wt.powi(2));
    let t_p0 = tau * (4.0 + 1.0 / wt.powi(2));
    let t_m0 = t_p0;
    let t_pm = t_mp;
    let t_0m = t_0p;
    let ret = 3.0 * tau;
    Ok(QutritTimes {
        t_pp: ret,
        t_0p,
        t_mp,
        t_p0,
        t_00: ret,
        t_m0,
        t_pm,
        t_0m,
        t_mm: ret,
    })
}

/// The mean measurement time minimizing the unitary-qubit switching time.
pub fn optimal_tau_unitary_qubit(omega: f64) -> Result<f64> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::InvalidParameter(format!("omega = {omega}")));
    }
    Ok(1.0 / omega)
}
