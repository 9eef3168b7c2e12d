use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseDistribution {
    #[default]
    Gaussian,
    Uniform,
}

impl NoiseDistribution {
    pub fn as_str(&self) -> &'static str {
        match self {
            NoiseDistribution::Gaussian => "gaussian",
            NoiseDistribution::Uniform => "uniform",
        }
    }
}

impl std::str::FromStr for NoiseDistribution {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "gaussian" => Ok(NoiseDistribution::Gaussian),
            "uniform" => Ok(NoiseDistribution::Uniform),
            other => Err(format!("unknown distribution `{other}` (expected gaussian or uniform)")),
        }
    }
}

/// Zero-mean perturbations of the two cross-gains, given by their standard deviations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    sigma_x: f64,
    sigma_y: f64,
    distribution: NoiseDistribution,
}

impl NoiseSpec {
    pub fn new(sigma_x: f64, sigma_y: f64, distribution: NoiseDistribution) -> Result<Self> {
        check_sigma("sigma_x", sigma_x)?;
        check_sigma("sigma_y", sigma_y)?;
        Ok(Self {
            sigma_x,
            sigma_y,
            distribution,
        })
    }

    pub fn gaussian(sigma_x: f64, sigma_y: f64) -> Result<Self> {
        Self::new(sigma_x, sigma_y, NoiseDistribution::Gaussian)
    }

    pub fn uniform(sigma_x: f64, sigma_y: f64) -> Result<Self> {
        Self::new(sigma_x, sigma_y, NoiseDistribution::Uniform)
    }

    pub fn sigma_x(&self) -> f64 {
        self.sigma_x
    }

    pub fn sigma_y(&self) -> f64 {
        self.sigma_y
    }

    pub fn distribution(&self) -> NoiseDistribution {
        self.distribution
    }

    pub fn is_silent(&self) -> bool {
        self.sigma_x == 0.0 && self.sigma_y == 0.0
    }
}

fn check_sigma(name: &'static str, value: f64) -> Result<()> {
    ensure_finite(name, value)?;
    if value < 0.0 {
        return Err(Error::Domain {
            name,
            value,
            rule: "standard deviation must be >= 0",
        });
    }
    Ok(())
}

// Key-separation byte for the independent ChaCha keys derived from one master seed.
#[derive(Clone, Copy)]
#[repr(u8)]
pub(crate) enum Channel {
    Xi = 0,
    Eta = 1,
    Bootstrap = 2,
}

pub(crate) fn channel_rng(master_seed: u64, channel: Channel, stream: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master_seed.to_le_bytes());
    key[8] = channel as u8;
    key[16..23].copy_from_slice(b"sancdyn");
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

/// Seeded source of gain perturbations.
///
/// `(master_seed, stream_index)` fully determines the draws. The two
/// opponents' perturbations come from separately keyed ChaCha8 generators, and
/// `stream_index` selects the ChaCha stream, so distinct indices never overlap.
#[derive(Debug, Clone)]
pub struct RandomSource {
    master_seed: u64,
    stream_index: u64,
    xi: ChaCha8Rng,
    eta: ChaCha8Rng,
}

impl RandomSource {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
            xi: channel_rng(master_seed, Channel::Xi, stream_index),
            eta: channel_rng(master_seed, Channel::Eta, stream_index),
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// One `(xi, eta)` pair. Zero standard deviation yields exactly `0.0`.
    pub fn draw(&mut self, noise: &NoiseSpec) -> (f64, f64) {
        let xi = sample(&mut self.xi, noise.distribution, noise.sigma_x);
        let eta = sample(&mut self.eta, noise.distribution, noise.sigma_y);
        (xi, eta)
    }
}

fn sample(rng: &mut ChaCha8Rng, dist: NoiseDistribution, sigma: f64) -> f64 {
    let unit: f64 = match dist {
        NoiseDistribution::Gaussian => rng.sample(StandardNormal),
        // U(-sqrt3, sqrt3) has unit variance
        NoiseDistribution::Uniform => (2.0 * rng.random::<f64>() - 1.0) * 3f64.sqrt(),
    };
    if sigma == 0.0 {
        0.0
    } else {
        sigma * unit
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moments(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (mean, var)
    }

    #[test]
    fn same_stream_same_draws() {
        let noise = NoiseSpec::gaussian(0.3, 0.7).unwrap();
        let mut a = RandomSource::new(42, 7);
        let mut b = RandomSource::new(42, 7);
        for _ in 0..1000 {
            assert_eq!(a.draw(&noise), b.draw(&noise));
        }
        let mut c = RandomSource::new(42, 8);
        let mut a = RandomSource::new(42, 7);
        assert_ne!(a.draw(&noise), c.draw(&noise));
    }

    #[test]
    fn silent_noise_is_exact_zero() {
        let noise = NoiseSpec::uniform(0.0, 0.0).unwrap();
        let mut src = RandomSource::new(1, 0);
        for _ in 0..100 {
            let (xi, eta) = src.draw(&noise);
            assert!(xi == 0.0 && eta == 0.0);
        }
    }

    #[test]
    fn rejects_negative_sigma() {
        assert!(NoiseSpec::gaussian(-0.1, 0.0).is_err());
        assert!(NoiseSpec::gaussian(0.1, f64::NAN).is_err());
    }

    #[test]
    fn realized_moments_and_correlation() {
        const N: usize = 1_000_000;
        for noise in [NoiseSpec::gaussian(0.3, 1.1).unwrap(), NoiseSpec::uniform(0.3, 1.1).unwrap()] {
            let mut src = RandomSource::new(2024, 3);
            let (mut xs, mut ys) = (Vec::with_capacity(N), Vec::with_capacity(N));
            for _ in 0..N {
                let (xi, eta) = src.draw(&noise);
                xs.push(xi);
                ys.push(eta);
            }
            let (mx, vx) = moments(&xs);
            let (my, vy) = moments(&ys);
            assert!(mx.abs() < 4.0 * 0.3 / 1e3, "{noise:?} mean {mx}");
            assert!(my.abs() < 4.0 * 1.1 / 1e3, "{noise:?} mean {my}");
            assert!((vx / 0.09 - 1.0).abs() < 0.02, "{noise:?} var {vx}");
            assert!((vy / 1.21 - 1.0).abs() < 0.02, "{noise:?} var {vy}");

            let cov = xs.iter().zip(&ys).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / (N as f64 - 1.0);
            let corr = cov / (vx * vy).sqrt();
            assert!(corr.abs() < 4e-3, "{noise:?} corr {corr}");
        }
    }
}
