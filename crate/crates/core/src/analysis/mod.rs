//! Stability maps over the gain plane, growth-rate fits, and Monte Carlo
//! checks of the averaged-gain criterion.

mod growth;
mod sweep;

pub use growth::{estimate_growth_rate, GrowthEstimate, MIN_STAGES};
pub use sweep::{linear_axis, sweep_stability_region, sweep_with_tolerance, GridCell, StabilityGrid, SweepMode};

use serde::Serialize;

use crate::dynamics::{classify_stability, ModelParams, StabilityClass, DEFAULT_TOLERANCE};
use crate::error::{Error, Result};
use crate::stochastic::{monte_carlo_ms_growth, MonteCarloConfig, MonteCarloReport, StochasticParams};

/// Relative slack on the interval bounds when testing membership; absorbs
/// last-bit differences when the interval has zero width.
const ROUNDING_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison {
    pub analytic_qbar: f64,
    pub empirical_ratio: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// `analytic_qbar` lies inside the confidence interval.
    pub agrees: bool,
    pub analytic_class: StabilityClass,
    pub empirical_class: StabilityClass,
    pub report: MonteCarloReport,
}

pub fn compare_empirical_analytic(
    params: &StochasticParams,
    config: &MonteCarloConfig,
    master_seed: u64,
) -> Result<Comparison> {
    let report = monte_carlo_ms_growth(params, config, master_seed)?;
    let qbar = report.analytic_qbar;
    let agrees = report.ci_low * (1.0 - ROUNDING_SLACK) <= qbar && qbar <= report.ci_high * (1.0 + ROUNDING_SLACK);
    Ok(Comparison {
        analytic_qbar: qbar,
        empirical_ratio: report.empirical_ms_ratio,
        ci_low: report.ci_low,
        ci_high: report.ci_high,
        agrees,
        analytic_class: report.verdict.class,
        empirical_class: classify_stability(report.empirical_ms_ratio, DEFAULT_TOLERANCE)?.class,
        report,
    })
}

/// Per-cell Monte Carlo check of a mean-square grid.
///
/// Cell `idx` (row-major) runs with master seed
/// `master_seed + idx * 0x9E37_79B9_7F4A_7C15` (wrapping), so cells draw from
/// unrelated key families while staying reproducible.
pub fn verify_grid_monte_carlo(
    grid: &StabilityGrid,
    config: &MonteCarloConfig,
    master_seed: u64,
) -> Result<Vec<Comparison>> {
    let noise = match (grid.mode(), grid.noise()) {
        (SweepMode::MeanSquare, Some(n)) => *n,
        _ => return Err(Error::Config("Monte Carlo verification needs a mean-square grid".into())),
    };
    grid.cells()
        .iter()
        .enumerate()
        .map(|(idx, cell)| {
            let params = StochasticParams::new(ModelParams::new(cell.alpha, cell.beta)?, noise);
            let seed = master_seed.wrapping_add((idx as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            compare_empirical_analytic(&params, config, seed)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::IncrementState;
    use crate::stochastic::{Execution, NoiseSpec};

    fn cfg(n: u64) -> MonteCarloConfig {
        MonteCarloConfig {
            n_trajectories: n,
            horizon: 11,
            initial: IncrementState::new(1.0, 1.0, 1).unwrap(),
            execution: Execution::Parallel,
        }
    }

    #[test]
    fn noiseless_comparison_agrees_exactly() {
        let p = StochasticParams::new(ModelParams::new(0.5, 0.5).unwrap(), NoiseSpec::gaussian(0.0, 0.0).unwrap());
        let c = compare_empirical_analytic(&p, &cfg(1000), 1).unwrap();
        assert!(c.agrees);
        assert_eq!(c.ci_low, c.ci_high);
    }

    #[test]
    fn unstable_case_is_unstable_both_ways() {
        let p = StochasticParams::new(ModelParams::new(1.0, 1.0).unwrap(), NoiseSpec::gaussian(0.5, 0.5).unwrap());
        let c = compare_empirical_analytic(&p, &cfg(20_000), 8).unwrap();
        assert!((c.analytic_qbar - 1.5625).abs() < 1e-12);
        assert_eq!(c.analytic_class, StabilityClass::Unstable);
        assert_eq!(c.empirical_class, StabilityClass::Unstable);
        assert!(c.empirical_ratio > 1.0);
    }

    #[test]
    fn grid_verification_needs_mean_square_mode() {
        let g = sweep_stability_region(&[0.5], &[0.5], SweepMode::Deterministic, None).unwrap();
        assert!(verify_grid_monte_carlo(&g, &cfg(100), 0).is_err());

        let g = sweep_stability_region(&[0.5, 0.9], &[0.6], SweepMode::MeanSquare, Some(NoiseSpec::gaussian(0.2, 0.2).unwrap())).unwrap();
        let checks = verify_grid_monte_carlo(&g, &cfg(5000), 0).unwrap();
        assert_eq!(checks.len(), 2);
        for (c, cell) in checks.iter().zip(g.cells()) {
            assert_eq!(c.analytic_qbar, cell.gain);
        }
    }
}
