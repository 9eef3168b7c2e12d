//! Discrete model of iterated sanctions and counter-sanctions between two
//! opponents: deterministic and randomly perturbed recurrences, their
//! stability criteria, Monte Carlo checks, and stability maps over the
//! cross-gain plane.

pub mod analysis;
pub mod cli;
pub mod dynamics;
pub mod error;
pub mod io;
pub mod lanchester;
pub mod stochastic;
pub mod trajectory;

pub use dynamics::{
    classify_stability, closed_form_increments, cumulative_limit, decoupled_step, simulate_deterministic,
    step_increments, step_pressures, total_gain, IncrementState, ModelParams, PressureState, StabilityClass,
    StabilityVerdict, DEFAULT_TOLERANCE,
};
pub use error::{Error, Result};
pub use lanchester::{lanchester_step, simulate_lanchester, LanchesterRun, LanchesterState};
pub use stochastic::{
    averaged_gain, classify_mean_square, min_achievable_gain, monte_carlo_ms_growth, simulate_stochastic,
    step_stochastic, MonteCarloConfig, MonteCarloReport, NoiseDistribution, NoiseSpec, RandomSource,
    StochasticParams,
};
pub use trajectory::{Record, Trajectory};
