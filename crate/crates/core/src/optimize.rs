//! One-dimensional search for the mean measurement time that minimizes a
//! mean switching time.

use crate::error::{Error, Result};
use crate::evolution::log_grid;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    /// Width of the final bracket in `ln tau`, i.e. relative tolerance on tau.
    pub rel_tol: f64,
    /// Log-spaced probes scanned before the golden-section refinement.
    pub prescan: usize,
    pub max_iter: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-4,
            prescan: 32,
            max_iter: 200,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizationResult {
    pub tau_star: f64,
    pub t_min: f64,
    /// Pre-scan neighbours enclosing the refined minimum.
    pub bracket: (f64, f64),
    pub converged: bool,
    /// False when the minimum sits within one tolerance of a search boundary.
    pub interior: bool,
    /// Three lowest pre-scan probes `(tau, T)`, best first. Several far-apart
    /// entries with similar values hint at a multimodal objective.
    pub best_probes: Vec<(f64, f64)>,
    pub evaluations: usize,
}

/// Golden-section search over `ln tau` in `[lo, hi]`, seeded by a coarse
/// log-spaced scan.
pub fn minimize_tau<F>(objective: F, lo: f64, hi: f64) -> Result<OptimizationResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    minimize_tau_with(objective, lo, hi, &SearchOptions::default())
}

pub fn minimize_tau_with<F>(
    mut objective: F,
    lo: f64,
    hi: f64,
    opts: &SearchOptions,
) -> Result<OptimizationResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo > 0.0 && lo < hi && hi.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "search range [{lo}, {hi}] must satisfy 0 < lo < hi"
        )));
    }
    let mut evaluations = 0;
    let mut eval = |tau: f64| -> Result<f64> {
        evaluations += 1;
        let v = objective(tau)?;
        if v.is_nan() {
            return Err(Error::InvalidParameter(format!(
                "objective is NaN at tau = {tau}"
            )));
        }
        Ok(v)
    };

    let grid = log_grid(lo, hi, opts.prescan.max(3));
    let values = grid.iter().map(|&t| eval(t)).collect::<Result<Vec<_>>>()?;
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let best_probes = order
        .iter()
        .take(3)
        .map(|&k| (grid[k], values[k]))
        .collect();
    let b = order[0];
    let left = grid[b.saturating_sub(1)];
    let right = grid[(b + 1).min(grid.len() - 1)];

    let (mut a, mut c) = (left.ln(), right.ln());
    let mut x1 = c - INV_PHI * (c - a);
    let mut x2 = a + INV_PHI * (c - a);
    let mut f1 = eval(x1.exp())?;
    let mut f2 = eval(x2.exp())?;
    let mut best = (grid[b], values[b]);
    let mut iterations = 0;
    while c - a > opts.rel_tol && iterations < opts.max_iter {
        iterations += 1;
        if f1 <= f2 {
            c = x2;
            x2 = x1;
            f2 = f1;
            x1 = c - INV_PHI * (c - a);
            f1 = eval(x1.exp())?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (c - a);
            f2 = eval(x2.exp())?;
        }
        for (x, f) in [(x1, f1), (x2, f2)] {
            if f < best.1 {
                best = (x.exp(), f);
            }
        }
    }
    let converged = c - a <= opts.rel_tol;
    let (tau_star, t_min) = best;
    let interior = (tau_star / lo).ln() > opts.rel_tol && (hi / tau_star).ln() > opts.rel_tol;
    Ok(OptimizationResult {
        tau_star,
        t_min,
        bracket: (left, right),
        converged,
        interior,
        best_probes,
        evaluations,
    })
}
