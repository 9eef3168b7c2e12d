use serde::Serialize;

use crate::dynamics::total_gain;
use crate::error::{Error, Result};
use crate::stochastic::{averaged_gain, StochasticParams};
use crate::trajectory::{Record, Trajectory};

pub const MIN_STAGES: usize = 10;

/// Per-stage log growth rate of `|v|`.
///
/// `analytic` is `ln(q) / 2` for noise-free trajectories. For stochastic ones it
/// is the mean-square rate `ln(qbar) / 4`, which bounds the expected log growth
/// from above.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthEstimate {
    pub lyapunov: f64,
    pub analytic: f64,
    pub residual: f64,
    /// Parity (0 even, 1 odd) of the stages the slope was fitted on.
    pub parity: u64,
    pub points: usize,
}

/// Least-squares slope of `ln|v[n]|` against `n`.
///
/// The first 20% of stages are dropped and only one parity class is fitted:
/// the larger class whose increments are all nonzero, preferring the parity
/// of the first retained stage on ties.
pub fn estimate_growth_rate(trajectory: &Trajectory) -> Result<GrowthEstimate> {
    let recs = trajectory.records();
    if recs.len() < MIN_STAGES {
        return Err(Error::Estimation(format!(
            "trajectory has {} stages, at least {MIN_STAGES} needed",
            recs.len()
        )));
    }
    let window = &recs[recs.len() / 5..];

    let class = |parity: u64| -> Vec<&Record> {
        window.iter().filter(|r| r.stage % 2 == parity).collect()
    };
    let usable = |c: &Vec<&Record>| c.len() >= 2 && c.iter().all(|r| r.v != 0.0);

    let first_parity = window[0].stage % 2;
    let candidates = [first_parity, 1 - first_parity];
    let chosen = candidates
        .iter()
        .map(|&p| (p, class(p)))
        .filter(|(_, c)| usable(c))
        .max_by_key(|(p, c)| (c.len(), *p == first_parity))
        .ok_or_else(|| {
            Error::Estimation("no parity class with nonzero increments; growth undefined".into())
        })?;
    let (parity, points) = chosen;

    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|r| r.stage as f64).collect();
    let ys: Vec<f64> = points.iter().map(|r| r.v.abs().ln()).collect();
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxy += (x - xbar) * (y - ybar);
        sxx += (x - xbar) * (x - xbar);
    }
    let lyapunov = sxy / sxx;

    let analytic = match trajectory.noise() {
        None => 0.5 * total_gain(trajectory.params()).ln(),
        Some(noise) => 0.25 * averaged_gain(&StochasticParams::new(*trajectory.params(), *noise)).ln(),
    };

    Ok(GrowthEstimate {
        lyapunov,
        analytic,
        residual: (lyapunov - analytic).abs(),
        parity,
        points: points.len(),
    })
}
