//! Monte Carlo estimate of the two-stage mean-square growth factor of `v`.
//!
//! Paths start from one fixed increment state. Only stages of a single parity
//! are used, because the dynamics decouple across parity: with `k` counting
//! two-stage hops, `ln E[v^2]` is linear in `k` with slope `ln qbar`. The
//! slope is fitted by least squares on the log sample mean squares.
//!
//! The 99% interval is a normal approximation on the log scale. Its standard
//! error comes from the per-path influence values of the fitted slope, which
//! accounts for the correlation between stages of one path. With fewer than
//! [`BOOTSTRAP_BELOW`] paths a percentile bootstrap over paths is used instead.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{averaged_gain, channel_rng, step_stochastic, Channel, RandomSource, StochasticParams};
use crate::dynamics::{classify_stability, IncrementState, StabilityVerdict, DEFAULT_TOLERANCE};
use crate::error::{Error, Result};

/// Two-sided 99.5% standard normal quantile.
const Z_995: f64 = 2.575_829_303_548_901;
pub const BOOTSTRAP_BELOW: u64 = 1000;
const BOOTSTRAP_RESAMPLES: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloConfig {
    pub n_trajectories: u64,
    /// Stages per path, counting the initial one. Must be odd and at least 3.
    pub horizon: u64,
    pub initial: IncrementState,
    pub execution: Execution,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CiMethod {
    NormalLog,
    Bootstrap,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarloReport {
    pub n_trajectories: u64,
    pub horizon: u64,
    pub empirical_ms_ratio: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub ci_method: CiMethod,
    /// Standard error of `ln(empirical_ms_ratio)`.
    pub log_ratio_std_error: f64,
    /// Stage parity the fit used: the initial stage's (`0`) or the next one (`1`).
    pub parity_offset: u64,
    pub analytic_qbar: f64,
    pub verdict: StabilityVerdict,
    pub master_seed: u64,
}

impl MonteCarloReport {
    pub fn ci_contains(&self, value: f64) -> bool {
        self.ci_low <= value && value <= self.ci_high
    }
}

pub fn monte_carlo_ms_growth(
    params: &StochasticParams,
    config: &MonteCarloConfig,
    master_seed: u64,
) -> Result<MonteCarloReport> {
    if config.n_trajectories < 2 {
        return Err(Error::Config(format!(
            "n_trajectories = {} but at least 2 are needed",
            config.n_trajectories
        )));
    }
    if config.horizon < 3 || config.horizon % 2 == 0 {
        return Err(Error::Config(format!(
            "horizon = {} must be odd and >= 3",
            config.horizon
        )));
    }

    let init = config.initial;
    let parity_offset = if init.v != 0.0 {
        0
    } else if init.w != 0.0 && config.horizon >= 5 {
        1
    } else {
        return Err(Error::Estimation(
            "initial increments give an identically zero like-parity sequence".into(),
        ));
    };
    let points = ((config.horizon - parity_offset - 1) / 2 + 1) as usize;

    let run = |i: u64| -> Result<Vec<f64>> {
        let mut rng = RandomSource::new(master_seed, i);
        let mut state = init;
        let mut out = Vec::with_capacity(points);
        for j in 0..config.horizon {
            if j > 0 {
                state = step_stochastic(&state, params, &mut rng);
            }
            if j >= parity_offset && (j - parity_offset) % 2 == 0 {
                let sq = state.v * state.v;
                if !sq.is_finite() {
                    return Err(Error::Estimation(format!(
                        "path {i} overflowed at stage {}",
                        state.stage
                    )));
                }
                out.push(sq);
            }
        }
        Ok(out)
    };

    let n = config.n_trajectories;
    let paths: Vec<Vec<f64>> = match config.execution {
        Execution::Serial => (0..n).map(run).collect::<Result<_>>()?,
        Execution::Parallel => (0..n).into_par_iter().map(run).collect::<Result<_>>()?,
    };

    let all: Vec<usize> = (0..paths.len()).collect();
    let means = mean_squares(&paths, &all, points);
    if let Some(k) = means.iter().position(|&m| m == 0.0) {
        return Err(Error::Estimation(format!(
            "every path is exactly zero at hop {k}; growth is undefined"
        )));
    }
    let weights = slope_weights(points);
    let slope = log_slope(&means, &weights);
    let ratio = slope.exp();

    let analytic_qbar = averaged_gain(params);
    let verdict = classify_stability(analytic_qbar, DEFAULT_TOLERANCE)?;

    let (mut ci_low, mut ci_high, se, ci_method) = if n < BOOTSTRAP_BELOW {
        let (lo, hi, se) = bootstrap_ci(&paths, points, &weights, master_seed);
        (lo, hi, se, CiMethod::Bootstrap)
    } else {
        let se = influence_std_error(&paths, &means, &weights);
        ((slope - Z_995 * se).exp(), (slope + Z_995 * se).exp(), se, CiMethod::NormalLog)
    };
    ci_low = ci_low.min(ratio);
    ci_high = ci_high.max(ratio);

    Ok(MonteCarloReport {
        n_trajectories: n,
        horizon: config.horizon,
        empirical_ms_ratio: ratio,
        ci_low,
        ci_high,
        ci_method,
        log_ratio_std_error: se,
        parity_offset,
        analytic_qbar,
        verdict,
        master_seed,
    })
}

fn mean_squares(paths: &[Vec<f64>], idx: &[usize], points: usize) -> Vec<f64> {
    let mut sums = vec![0.0; points];
    for &i in idx {
        for (s, v) in sums.iter_mut().zip(&paths[i]) {
            *s += v;
        }
    }
    let n = idx.len() as f64;
    sums.into_iter().map(|s| s / n).collect()
}

/// Least-squares slope weights for equally spaced abscissae `0..points`.
fn slope_weights(points: usize) -> Vec<f64> {
    let mean = (points as f64 - 1.0) / 2.0;
    let sxx: f64 = (0..points).map(|k| (k as f64 - mean).powi(2)).sum();
    (0..points).map(|k| (k as f64 - mean) / sxx).collect()
}

fn log_slope(means: &[f64], weights: &[f64]) -> f64 {
    means.iter().zip(weights).map(|(m, c)| c * m.ln()).sum()
}

fn influence_std_error(paths: &[Vec<f64>], means: &[f64], weights: &[f64]) -> f64 {
    let z: Vec<f64> = paths
        .iter()
        .map(|p| {
            p.iter()
                .zip(means)
                .zip(weights)
                .map(|((v, m), c)| c * v / m)
                .sum()
        })
        .collect();
    let n = z.len() as f64;
    let zbar = z.iter().sum::<f64>() / n;
    let var = z.iter().map(|x| (x - zbar).powi(2)).sum::<f64>() / (n - 1.0);
    (var / n).sqrt()
}

fn bootstrap_ci(paths: &[Vec<f64>], points: usize, weights: &[f64], seed: u64) -> (f64, f64, f64) {
    let mut rng = channel_rng(seed, Channel::Bootstrap, 0);
    let n = paths.len();
    let mut idx = vec![0usize; n];
    let mut slopes = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    for _ in 0..BOOTSTRAP_RESAMPLES {
        for slot in idx.iter_mut() {
            *slot = rng.random_range(0..n);
        }
        let means = mean_squares(paths, &idx, points);
        if means.iter().all(|&m| m > 0.0) {
            slopes.push(log_slope(&means, weights));
        }
    }
    if slopes.is_empty() {
        return (f64::INFINITY, f64::NEG_INFINITY, 0.0);
    }
    slopes.sort_by(f64::total_cmp);
    let quantile = |p: f64| {
        let pos = p * (slopes.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        slopes[lo] + (slopes[hi] - slopes[lo]) * (pos - lo as f64)
    };
    let m = slopes.len() as f64;
    let mean = slopes.iter().sum::<f64>() / m;
    let sd = (slopes.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0)).sqrt();
    (quantile(0.005).exp(), quantile(0.995).exp(), sd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::ModelParams;
    use crate::stochastic::NoiseSpec;

    fn sp(a: f64, b: f64, sx: f64, sy: f64) -> StochasticParams {
        StochasticParams::new(ModelParams::new(a, b).unwrap(), NoiseSpec::gaussian(sx, sy).unwrap())
    }

    fn cfg(n: u64, horizon: u64) -> MonteCarloConfig {
        MonteCarloConfig {
            n_trajectories: n,
            horizon,
            initial: IncrementState::new(1.0, 1.0, 1).unwrap(),
            execution: Execution::Serial,
        }
    }

    #[test]
    fn noiseless_ratio_is_exact() {
        for n in [5, 2000] {
            let r = monte_carlo_ms_growth(&sp(0.5, 0.5, 0.0, 0.0), &cfg(n, 11), 3).unwrap();
            assert!((r.empirical_ms_ratio - 0.0625).abs() < 1e-14, "{}", r.empirical_ms_ratio);
            assert!((r.ci_high - r.ci_low).abs() < 1e-14);
            assert_eq!(r.analytic_qbar, 0.0625);
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let p = sp(0.5, 0.5, 0.1, 0.1);
        assert!(matches!(monte_carlo_ms_growth(&p, &cfg(1, 11), 0), Err(Error::Config(_))));
        assert!(matches!(monte_carlo_ms_growth(&p, &cfg(10, 10), 0), Err(Error::Config(_))));
        assert!(matches!(monte_carlo_ms_growth(&p, &cfg(10, 1), 0), Err(Error::Config(_))));
        let mut c = cfg(10, 11);
        c.initial = IncrementState::new(0.0, 0.0, 1).unwrap();
        assert!(matches!(monte_carlo_ms_growth(&p, &c, 0), Err(Error::Estimation(_))));
    }

    #[test]
    fn falls_back_to_even_stages() {
        let mut c = cfg(3000, 11);
        c.initial = IncrementState::new(0.0, 1.0, 1).unwrap();
        let r = monte_carlo_ms_growth(&sp(0.8, 0.8, 0.3, 0.3), &c, 17).unwrap();
        assert_eq!(r.parity_offset, 1);
        assert!(r.ci_contains(0.5329), "{r:?}");
    }

    #[test]
    fn small_samples_use_bootstrap() {
        let r = monte_carlo_ms_growth(&sp(0.8, 0.8, 0.3, 0.3), &cfg(500, 7), 4).unwrap();
        assert_eq!(r.ci_method, CiMethod::Bootstrap);
        assert!(r.ci_low <= r.empirical_ms_ratio && r.empirical_ms_ratio <= r.ci_high);
        assert!(r.ci_high > r.ci_low);
    }

    #[test]
    fn serial_and_parallel_agree_bitwise() {
        let p = sp(0.8, 1.1, 0.4, 0.2);
        let mut c = cfg(4000, 9);
        let serial = monte_carlo_ms_growth(&p, &c, 99).unwrap();
        c.execution = Execution::Parallel;
        let parallel = monte_carlo_ms_growth(&p, &c, 99).unwrap();
        assert_eq!(serial, parallel);
    }
}
