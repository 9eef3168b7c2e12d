//! The model with randomly perturbed cross-gains and its mean-square criterion.
//!
//! Each stage uses `alpha + xi[n]` and `beta + eta[n]` in place of the fixed
//! gains, with `xi`, `eta` zero-mean, independent across stages and of each
//! other. Mean squares of the increments then evolve as
//! `E[v[n+1]^2] = qbar * E[v[n-1]^2]` with
//! `qbar = (alpha^2 + sigma_x^2) * (beta^2 + sigma_y^2)`.

mod montecarlo;
mod noise;

pub use montecarlo::{monte_carlo_ms_growth, CiMethod, Execution, MonteCarloConfig, MonteCarloReport};
pub use noise::{NoiseDistribution, NoiseSpec, RandomSource};

pub(crate) use noise::{channel_rng, Channel};

use serde::{Deserialize, Serialize};

use crate::dynamics::{classify_stability, IncrementState, ModelParams, PressureState, StabilityVerdict};
use crate::error::Result;
use crate::trajectory::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StochasticParams {
    pub base: ModelParams,
    pub noise: NoiseSpec,
}

impl StochasticParams {
    pub fn new(base: ModelParams, noise: NoiseSpec) -> Self {
        Self { base, noise }
    }
}

/// `qbar = (alpha^2 + sigma_x^2) * (beta^2 + sigma_y^2)`.
pub fn averaged_gain(params: &StochasticParams) -> f64 {
    let (a, b) = (params.base.alpha(), params.base.beta());
    let (sx, sy) = (params.noise.sigma_x(), params.noise.sigma_y());
    (a * a + sx * sx) * (b * b + sy * sy)
}

/// Infimum of [`averaged_gain`] over all positive cross-gains: `sigma_x^2 * sigma_y^2`.
///
/// Mean-square stability can be reached by some choice of gains iff this is
/// below one. Note that it is the product of the variances, not their sum,
/// that matters: `sigma_x = 0` makes stability reachable for any `sigma_y`.
pub fn min_achievable_gain(noise: &NoiseSpec) -> f64 {
    let (sx, sy) = (noise.sigma_x(), noise.sigma_y());
    (sx * sx) * (sy * sy)
}

pub fn classify_mean_square(params: &StochasticParams, tolerance: f64) -> Result<StabilityVerdict> {
    classify_stability(averaged_gain(params), tolerance)
}

/// One stage with freshly drawn gain perturbations.
pub fn step_stochastic(
    state: &IncrementState,
    params: &StochasticParams,
    rng: &mut RandomSource,
) -> IncrementState {
    let (xi, eta) = rng.draw(&params.noise);
    IncrementState {
        v: (params.base.alpha() + xi) * state.w,
        w: (params.base.beta() + eta) * state.v,
        stage: state.stage + 1,
    }
}

/// One sample path. Pressures are the running sums of the increments,
/// anchored at `initial`.
pub fn simulate_stochastic(
    initial: &PressureState,
    params: &StochasticParams,
    steps: u64,
    rng: &mut RandomSource,
) -> Trajectory {
    Trajectory::accumulate(initial, params.base, Some(params.noise), steps, |inc| {
        step_stochastic(&inc, params, rng)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{
        simulate_deterministic, step_increments, total_gain, StabilityClass, DEFAULT_TOLERANCE,
    };

    fn sp(a: f64, b: f64, sx: f64, sy: f64) -> StochasticParams {
        StochasticParams::new(ModelParams::new(a, b).unwrap(), NoiseSpec::gaussian(sx, sy).unwrap())
    }

    #[test]
    fn averaged_gain_examples() {
        assert_eq!(averaged_gain(&sp(1.0, 1.0, 0.0, 0.0)), 1.0);
        let tiny = averaged_gain(&sp(1e-9, 1e-9, 1.0, 1.0));
        assert!((tiny - 1.0).abs() < 1e-15);
        let g = averaged_gain(&sp(0.8, 0.8, 0.3, 0.3));
        assert!((g - 0.5329).abs() < 1e-12, "{g}");
    }

    #[test]
    fn noiseless_averaged_gain_is_q_squared() {
        for (a, b) in [(0.3, 0.7), (1.9, 0.05), (1.0, 1.0), (2.0, 2.0)] {
            let params = sp(a, b, 0.0, 0.0);
            let q = total_gain(&params.base);
            assert!((averaged_gain(&params) / (q * q) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn noise_floor_examples() {
        assert_eq!(min_achievable_gain(&NoiseSpec::gaussian(0.0, 5.0).unwrap()), 0.0);
        assert_eq!(min_achievable_gain(&NoiseSpec::gaussian(1.0, 1.0).unwrap()), 1.0);
        let f = min_achievable_gain(&NoiseSpec::gaussian(1.1, 1.1).unwrap());
        assert!((f - 1.4641).abs() < 1e-12);
        assert_eq!(classify_stability(f, DEFAULT_TOLERANCE).unwrap().class, StabilityClass::Unstable);
    }

    #[test]
    fn mean_square_classification() {
        let t = DEFAULT_TOLERANCE;
        assert_eq!(classify_mean_square(&sp(0.8, 0.8, 0.3, 0.3), t).unwrap().class, StabilityClass::Stable);
        assert_eq!(classify_mean_square(&sp(1.0, 1.0, 0.0, 0.0), t).unwrap().class, StabilityClass::Marginal);
        let v = classify_mean_square(&sp(1.0, 1.0, 0.5, 0.5), t).unwrap();
        assert_eq!(v.class, StabilityClass::Unstable);
        assert!((v.gain - 1.5625).abs() < 1e-12);
    }

    #[test]
    fn stochastic_step_contracts() {
        let params = sp(0.8, 1.3, 0.4, 0.9);
        let mut rng = RandomSource::new(9, 0);
        let zero = IncrementState::new(0.0, 0.0, 1).unwrap();
        let next = step_stochastic(&zero, &params, &mut rng);
        assert_eq!((next.v.abs(), next.w.abs()), (0.0, 0.0));

        let s = IncrementState::new(0.7, -1.2, 3).unwrap();
        let a = step_stochastic(&s, &params, &mut RandomSource::new(5, 11));
        let b = step_stochastic(&s, &params, &mut RandomSource::new(5, 11));
        assert_eq!(a, b);

        let quiet = sp(0.8, 1.3, 0.0, 0.0);
        let a = step_stochastic(&s, &quiet, &mut RandomSource::new(5, 11));
        assert_eq!(a, step_increments(&s, &quiet.base));
    }

    #[test]
    fn silent_path_equals_deterministic_path() {
        let init = PressureState::initial(0.3, -1.0, 2.0, 0.5).unwrap();
        let params = StochasticParams::new(
            ModelParams::new(0.9, 1.05).unwrap(),
            NoiseSpec::uniform(0.0, 0.0).unwrap(),
        );
        let det = simulate_deterministic(&init, &params.base, 300);
        let sto = simulate_stochastic(&init, &params, 300, &mut RandomSource::new(77, 0));
        assert_eq!(det.records(), sto.records());
        assert_eq!(simulate_stochastic(&init, &params, 0, &mut RandomSource::new(1, 1)).len(), 1);
    }

    #[test]
    fn stable_mean_square_paths_decay_in_median() {
        let init = PressureState::initial(0.0, 1.0, 0.0, 1.0).unwrap();
        let params = sp(0.8, 0.8, 0.3, 0.3);
        let steps = 40u64;
        let at = |stage: u64| {
            let mut vals: Vec<f64> = (0..1000)
                .map(|seed| {
                    let t = simulate_stochastic(&init, &params, steps, &mut RandomSource::new(seed, 0));
                    t.record(stage).unwrap().v.abs()
                })
                .collect();
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            vals[vals.len() / 2]
        };
        let (m1, m11, m21, m41) = (at(1), at(11), at(21), at(41));
        assert!(m1 > m11 && m11 > m21 && m21 > m41, "{m1} {m11} {m21} {m41}");
    }
}
