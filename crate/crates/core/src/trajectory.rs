use serde::Serialize;

use crate::dynamics::{IncrementState, ModelParams, PressureState};
use crate::stochastic::NoiseSpec;

/// One stage of a simulated path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Record {
    #[serde(rename = "n")]
    pub stage: u64,
    pub x: f64,
    pub y: f64,
    pub v: f64,
    pub w: f64,
}

/// An ordered run of consecutive stages plus the parameters that produced it.
///
/// `x[n]` is stored as the floating-point sum `x[n-1] + v[n]` (same for `y`),
/// so the increment columns carry full relative precision even when the
/// pressures have converged.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    records: Vec<Record>,
    params: ModelParams,
    noise: Option<NoiseSpec>,
    overflow_at: Option<u64>,
}

impl Trajectory {
    pub(crate) fn accumulate<F>(
        initial: &PressureState,
        params: ModelParams,
        noise: Option<NoiseSpec>,
        steps: u64,
        mut next: F,
    ) -> Self
    where
        F: FnMut(IncrementState) -> IncrementState,
    {
        let mut inc = initial.increments();
        let mut records = Vec::with_capacity(steps.saturating_add(1).min(1 << 20) as usize);
        let mut overflow_at = None;

        let first = Record {
            stage: initial.stage,
            x: initial.x_curr,
            y: initial.y_curr,
            v: inc.v,
            w: inc.w,
        };
        if first.v.is_finite() && first.w.is_finite() {
            records.push(first);
        } else {
            overflow_at = Some(initial.stage);
        }

        let (mut x, mut y) = (initial.x_curr, initial.y_curr);
        if overflow_at.is_none() {
            for _ in 0..steps {
                inc = next(inc);
                let (nx, ny) = (x + inc.v, y + inc.w);
                if !(inc.v.is_finite() && inc.w.is_finite() && nx.is_finite() && ny.is_finite()) {
                    overflow_at = Some(inc.stage);
                    break;
                }
                x = nx;
                y = ny;
                records.push(Record {
                    stage: inc.stage,
                    x,
                    y,
                    v: inc.v,
                    w: inc.w,
                });
            }
        }

        Self {
            records,
            params,
            noise,
            overflow_at,
        }
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Noise that drove the path, `None` for deterministic runs.
    pub fn noise(&self) -> Option<&NoiseSpec> {
        self.noise.as_ref()
    }

    /// Stage at which a value would have become non-finite, if the run was cut short.
    pub fn overflow_at(&self) -> Option<u64> {
        self.overflow_at
    }

    pub fn first_stage(&self) -> Option<u64> {
        self.records.first().map(|r| r.stage)
    }

    pub fn record(&self, stage: u64) -> Option<&Record> {
        let first = self.first_stage()?;
        let idx = usize::try_from(stage.checked_sub(first)?).ok()?;
        self.records.get(idx)
    }
}
