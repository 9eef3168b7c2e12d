//! Discrete Osipov-Lanchester attrition, kept as a baseline comparator.

use crate::dynamics::ModelParams;
use crate::error::{ensure_finite, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanchesterState {
    pub r: f64,
    pub g: f64,
    pub dt: f64,
}

impl LanchesterState {
    pub fn new(r: f64, g: f64, dt: f64) -> Result<Self> {
        ensure_finite("r", r)?;
        ensure_finite("g", g)?;
        ensure_finite("dt", dt)?;
        if dt <= 0.0 {
            return Err(Error::Domain {
                name: "dt",
                value: dt,
                rule: "sampling interval must be > 0",
            });
        }
        Ok(Self { r, g, dt })
    }
}

/// `R' = R - alpha*dt*G`, `G' = G - beta*dt*R`.
pub fn lanchester_step(state: &LanchesterState, params: &ModelParams) -> LanchesterState {
    LanchesterState {
        r: state.r - params.alpha() * state.dt * state.g,
        g: state.g - params.beta() * state.dt * state.r,
        dt: state.dt,
    }
}

/// Force levels at stages `0..=steps`, cut short (with the stage reported)
/// if a level stops being finite.
#[derive(Debug, Clone, PartialEq)]
pub struct LanchesterRun {
    pub states: Vec<LanchesterState>,
    pub overflow_at: Option<u64>,
}

pub fn simulate_lanchester(initial: &LanchesterState, params: &ModelParams, steps: u64) -> LanchesterRun {
    let mut states = vec![*initial];
    let mut overflow_at = None;
    let mut cur = *initial;
    for n in 1..=steps {
        let next = lanchester_step(&cur, params);
        if !(next.r.is_finite() && next.g.is_finite()) {
            overflow_at = Some(n);
            break;
        }
        states.push(next);
        cur = next;
    }
    LanchesterRun { states, overflow_at }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_point_and_hand_step() {
        let params = ModelParams::new(0.1, 0.1).unwrap();
        let z = LanchesterState::new(0.0, 0.0, 1.0).unwrap();
        let n = lanchester_step(&z, &params);
        assert_eq!((n.r, n.g), (0.0, 0.0));

        let s = LanchesterState::new(100.0, 100.0, 1.0).unwrap();
        let n = lanchester_step(&s, &params);
        assert_eq!((n.r, n.g), (90.0, 90.0));
    }

    #[test]
    fn symmetric_forces_stay_equal() {
        let params = ModelParams::new(0.037, 0.037).unwrap();
        let s = LanchesterState::new(123.4, 123.4, 0.5).unwrap();
        let run = simulate_lanchester(&s, &params, 100);
        assert_eq!(run.states.len(), 101);
        assert!(run.states.iter().all(|st| st.r == st.g));
    }

    #[test]
    fn rejects_bad_interval() {
        assert!(LanchesterState::new(1.0, 1.0, 0.0).is_err());
        assert!(LanchesterState::new(1.0, 1.0, -1.0).is_err());
    }
}
