use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{classify_stability, total_gain, ModelParams, StabilityVerdict, DEFAULT_TOLERANCE};
use crate::error::{Error, Result};
use crate::stochastic::{averaged_gain, NoiseSpec, StochasticParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    /// Classify `q = alpha * beta`.
    Deterministic,
    /// Classify `qbar` for the given noise.
    MeanSquare,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridCell {
    pub alpha: f64,
    pub beta: f64,
    pub gain: f64,
    pub verdict: StabilityVerdict,
}

/// Verdicts over an `alpha x beta` lattice, row-major with `alpha` as the row.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityGrid {
    alpha_axis: Vec<f64>,
    beta_axis: Vec<f64>,
    cells: Vec<GridCell>,
    mode: SweepMode,
    noise: Option<NoiseSpec>,
}

impl StabilityGrid {
    pub fn alpha_axis(&self) -> &[f64] {
        &self.alpha_axis
    }

    pub fn beta_axis(&self) -> &[f64] {
        &self.beta_axis
    }

    pub fn mode(&self) -> SweepMode {
        self.mode
    }

    pub fn noise(&self) -> Option<&NoiseSpec> {
        self.noise.as_ref()
    }

    pub fn cells(&self) -> &[GridCell] {
        &self.cells
    }

    pub fn cell(&self, i: usize, j: usize) -> &GridCell {
        &self.cells[i * self.beta_axis.len() + j]
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.alpha_axis.len(), self.beta_axis.len())
    }

    pub fn stable_count(&self) -> usize {
        self.cells.iter().filter(|c| c.verdict.is_stable()).count()
    }
}

/// `count` evenly spaced values from `start` to `stop`, both included.
pub fn linear_axis(start: f64, stop: f64, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::Config("axis needs at least one sample".into()));
    }
    if !(start.is_finite() && stop.is_finite()) {
        return Err(Error::Config("axis bounds must be finite".into()));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let step = (stop - start) / (count - 1) as f64;
    let mut axis: Vec<f64> = (0..count).map(|i| start + step * i as f64).collect();
    axis[count - 1] = stop;
    Ok(axis)
}

fn check_axis(name: &str, axis: &[f64]) -> Result<()> {
    if axis.is_empty() {
        return Err(Error::Config(format!("{name} axis is empty")));
    }
    if let Some(bad) = axis.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::Config(format!("{name} axis value {bad} is not a positive finite gain")));
    }
    if axis.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config(format!("{name} axis must be strictly increasing")));
    }
    Ok(())
}

pub fn sweep_stability_region(
    alpha_axis: &[f64],
    beta_axis: &[f64],
    mode: SweepMode,
    noise: Option<NoiseSpec>,
) -> Result<StabilityGrid> {
    sweep_with_tolerance(alpha_axis, beta_axis, mode, noise, DEFAULT_TOLERANCE)
}

pub fn sweep_with_tolerance(
    alpha_axis: &[f64],
    beta_axis: &[f64],
    mode: SweepMode,
    noise: Option<NoiseSpec>,
    tolerance: f64,
) -> Result<StabilityGrid> {
    check_axis("alpha", alpha_axis)?;
    check_axis("beta", beta_axis)?;
    match (mode, noise) {
        (SweepMode::MeanSquare, None) => {
            return Err(Error::Config("mean-square sweep requires a noise specification".into()))
        }
        (SweepMode::Deterministic, Some(_)) => {
            return Err(Error::Config("deterministic sweep takes no noise specification".into()))
        }
        _ => {}
    }

    let nb = beta_axis.len();
    let cells = (0..alpha_axis.len() * nb)
        .into_par_iter()
        .map(|idx| {
            let (alpha, beta) = (alpha_axis[idx / nb], beta_axis[idx % nb]);
            let params = ModelParams::new(alpha, beta)?;
            let gain = match noise {
                Some(noise) => averaged_gain(&StochasticParams::new(params, noise)),
                None => total_gain(&params),
            };
            Ok(GridCell {
                alpha,
                beta,
                gain,
                verdict: classify_stability(gain, tolerance)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(StabilityGrid {
        alpha_axis: alpha_axis.to_vec(),
        beta_axis: beta_axis.to_vec(),
        cells,
        mode,
        noise,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::StabilityClass;
    use proptest::prelude::*;

    #[test]
    fn single_cell() {
        let g = sweep_stability_region(&[0.5], &[0.5], SweepMode::Deterministic, None).unwrap();
        assert_eq!(g.shape(), (1, 1));
        assert_eq!(g.cell(0, 0).verdict.class, StabilityClass::Stable);
        assert_eq!(g.cell(0, 0).gain, 0.25);
    }

    #[test]
    fn axis_construction() {
        let a = linear_axis(0.01, 2.0, 101).unwrap();
        assert_eq!(a.len(), 101);
        assert_eq!(a[0], 0.01);
        assert_eq!(a[100], 2.0);
        assert!(a.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(linear_axis(3.0, 9.0, 1).unwrap(), vec![3.0]);
        assert!(linear_axis(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(sweep_stability_region(&[], &[1.0], SweepMode::Deterministic, None).is_err());
        assert!(sweep_stability_region(&[0.0, 1.0], &[1.0], SweepMode::Deterministic, None).is_err());
        assert!(sweep_stability_region(&[1.0, 0.5], &[1.0], SweepMode::Deterministic, None).is_err());
        assert!(matches!(
            sweep_stability_region(&[1.0], &[1.0], SweepMode::MeanSquare, None),
            Err(Error::Config(_))
        ));
    }

    proptest! {
        #[test]
        fn more_noise_never_stabilizes(
            alpha in 0.01f64..2.0, beta in 0.01f64..2.0,
            sx in 0.0f64..1.0, sy in 0.0f64..1.0,
            dx in 0.0f64..0.5, dy in 0.0f64..0.5,
        ) {
            let lo = sweep_stability_region(&[alpha], &[beta], SweepMode::MeanSquare,
                Some(NoiseSpec::gaussian(sx, sy).unwrap())).unwrap();
            let hi = sweep_stability_region(&[alpha], &[beta], SweepMode::MeanSquare,
                Some(NoiseSpec::gaussian(sx + dx, sy + dy).unwrap())).unwrap();
            let rank = |c: StabilityClass| match c {
                StabilityClass::Stable => 0,
                StabilityClass::Marginal => 1,
                StabilityClass::Unstable => 2,
            };
            prop_assert!(rank(hi.cell(0, 0).verdict.class) >= rank(lo.cell(0, 0).verdict.class));
            prop_assert!(hi.cell(0, 0).gain >= lo.cell(0, 0).gain);
        }
    }
}
