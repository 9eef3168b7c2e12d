//! Deterministic sanction / counter-sanction dynamics.
//!
//! Each opponent raises its pressure by its cross-gain times the other
//! side's most recent escalation:
//!
//! ```text
//! x[n+1] = x[n] + alpha * (y[n] - y[n-1])
//! y[n+1] = y[n] + beta  * (x[n] - x[n-1])
//! ```
//!
//! In increment form `v[n] = x[n] - x[n-1]`, `w[n] = y[n] - y[n-1]` this is
//! `v[n+1] = alpha * w[n]`, `w[n+1] = beta * v[n]`, and two stages later every
//! increment is multiplied by the total gain `q = alpha * beta`.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::trajectory::Trajectory;

/// Half-width of the marginal band around a gain of one.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Cross-gains of the two opponents. Both are strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    alpha: f64,
    beta: f64,
}

impl ModelParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        check_positive("alpha", alpha)?;
        check_positive("beta", beta)?;
        let q = alpha * beta;
        if !q.is_finite() {
            return Err(Error::Domain {
                name: "alpha*beta",
                value: q,
                rule: "total gain must be finite",
            });
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// The same model with the opponents' roles exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            alpha: self.beta,
            beta: self.alpha,
        }
    }
}

fn check_positive(name: &'static str, value: f64) -> Result<()> {
    ensure_finite(name, value)?;
    if value > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            rule: "cross-gain must be > 0",
        })
    }
}

/// Two consecutive pressure samples per opponent, at stages `stage - 1` and `stage`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PressureState {
    pub x_prev: f64,
    pub x_curr: f64,
    pub y_prev: f64,
    pub y_curr: f64,
    pub stage: u64,
}

impl PressureState {
    pub fn new(x_prev: f64, x_curr: f64, y_prev: f64, y_curr: f64, stage: u64) -> Result<Self> {
        ensure_finite("x_prev", x_prev)?;
        ensure_finite("x_curr", x_curr)?;
        ensure_finite("y_prev", y_prev)?;
        ensure_finite("y_curr", y_curr)?;
        Ok(Self {
            x_prev,
            x_curr,
            y_prev,
            y_curr,
            stage,
        })
    }

    /// The usual starting point: `(x0, x1)` and `(y0, y1)` given, current stage 1.
    pub fn initial(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        Self::new(x0, x1, y0, y1, 1)
    }

    pub fn increments(&self) -> IncrementState {
        IncrementState {
            v: self.x_curr - self.x_prev,
            w: self.y_curr - self.y_prev,
            stage: self.stage,
        }
    }

    /// Exchange the two opponents' histories.
    pub fn swapped(&self) -> Self {
        Self {
            x_prev: self.y_prev,
            x_curr: self.y_curr,
            y_prev: self.x_prev,
            y_curr: self.x_curr,
            stage: self.stage,
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            x_prev: c * self.x_prev,
            x_curr: c * self.x_curr,
            y_prev: c * self.y_prev,
            y_curr: c * self.y_curr,
            stage: self.stage,
        }
    }
}

/// First differences of the pressures at one stage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncrementState {
    pub v: f64,
    pub w: f64,
    pub stage: u64,
}

impl IncrementState {
    pub fn new(v: f64, w: f64, stage: u64) -> Result<Self> {
        ensure_finite("v", v)?;
        ensure_finite("w", w)?;
        Ok(Self { v, w, stage })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StabilityClass {
    Stable,
    Marginal,
    Unstable,
}

impl StabilityClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            StabilityClass::Stable => "stable",
            StabilityClass::Marginal => "marginal",
            StabilityClass::Unstable => "unstable",
        }
    }
}

impl std::fmt::Display for StabilityClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub class: StabilityClass,
    pub gain: f64,
    pub tolerance: f64,
}

impl StabilityVerdict {
    pub fn is_stable(&self) -> bool {
        self.class == StabilityClass::Stable
    }
}

/// `q = alpha * beta`.
pub fn total_gain(params: &ModelParams) -> f64 {
    params.alpha * params.beta
}

/// Stable below `1 - tolerance`, unstable above `1 + tolerance`, marginal in between.
pub fn classify_stability(gain: f64, tolerance: f64) -> Result<StabilityVerdict> {
    if gain.is_nan() || gain < 0.0 {
        return Err(Error::Domain {
            name: "gain",
            value: gain,
            rule: "gain must be >= 0",
        });
    }
    if !(tolerance >= 0.0) || !tolerance.is_finite() {
        return Err(Error::Domain {
            name: "tolerance",
            value: tolerance,
            rule: "tolerance must be finite and >= 0",
        });
    }
    let class = if gain < 1.0 - tolerance {
        StabilityClass::Stable
    } else if gain > 1.0 + tolerance {
        StabilityClass::Unstable
    } else {
        StabilityClass::Marginal
    };
    Ok(StabilityVerdict {
        class,
        gain,
        tolerance,
    })
}

/// One stage of the pressure recurrence, evaluated literally on the pressures.
pub fn step_pressures(state: &PressureState, params: &ModelParams) -> PressureState {
    let x_next = state.x_curr + params.alpha * (state.y_curr - state.y_prev);
    let y_next = state.y_curr + params.beta * (state.x_curr - state.x_prev);
    PressureState {
        x_prev: state.x_curr,
        x_curr: x_next,
        y_prev: state.y_curr,
        y_curr: y_next,
        stage: state.stage + 1,
    }
}

pub fn step_increments(state: &IncrementState, params: &ModelParams) -> IncrementState {
    IncrementState {
        v: params.alpha * state.w,
        w: params.beta * state.v,
        stage: state.stage + 1,
    }
}

/// The value an increment takes two stages later.
pub fn decoupled_step(increment: f64, gain: f64) -> f64 {
    gain * increment
}

/// Iterate the model `steps` times from `initial`.
///
/// Increments are propagated in product form and the pressures are their
/// running sums, so every stored `x[n]` is exactly `x[n-1] + v[n]` in floating
/// point. If a value stops being finite the trajectory ends there and
/// [`Trajectory::overflow_at`] names the offending stage.
pub fn simulate_deterministic(
    initial: &PressureState,
    params: &ModelParams,
    steps: u64,
) -> Trajectory {
    Trajectory::accumulate(initial, *params, None, steps, |inc| {
        step_increments(&inc, params)
    })
}

/// Increments at `stage` without iterating, given the stage-1 increments.
///
/// Odd stages `2k+1` carry `q^k * v1` (resp. `q^k * w1`); even stages `2k+2`
/// carry `q^k * alpha * w1` (resp. `q^k * beta * v1`).
pub fn closed_form_increments(
    v1: f64,
    w1: f64,
    params: &ModelParams,
    stage: u64,
) -> Result<(f64, f64)> {
    if stage == 0 {
        return Err(Error::Domain {
            name: "stage",
            value: 0.0,
            rule: "closed form is anchored at stage 1",
        });
    }
    let q = total_gain(params);
    let k = (stage - 1) / 2;
    let qk = pow_u64(q, k);
    if (stage - 1) % 2 == 0 {
        Ok((qk * v1, qk * w1))
    } else {
        Ok((qk * (params.alpha * w1), qk * (params.beta * v1)))
    }
}

fn pow_u64(base: f64, exp: u64) -> f64 {
    match i32::try_from(exp) {
        Ok(e) => base.powi(e),
        Err(_) => base.powf(exp as f64),
    }
}

/// Limits of both pressure sequences when `q < 1`.
///
/// `x_inf = x1 + (alpha*w1 + q*v1) / (1 - q)`, and symmetrically for `y`.
pub fn cumulative_limit(initial: &PressureState, params: &ModelParams) -> Result<(f64, f64)> {
    let q = total_gain(params);
    if q >= 1.0 {
        return Err(Error::Divergent { gain: q });
    }
    let inc = initial.increments();
    let tail = 1.0 - q;
    let x_inf = initial.x_curr + (params.alpha * inc.w + q * inc.v) / tail;
    let y_inf = initial.y_curr + (params.beta * inc.v + q * inc.w) / tail;
    Ok((x_inf, y_inf))
}
