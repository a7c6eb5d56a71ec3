//! Laser intensity fluctuation model.
//!
//! A fluctuation level `f` is drawn once per sample from a normal
//! distribution truncated at zero. The Rabi frequency is rescaled by `1 + δ`
//! with `δ ~ N(0, f)` and the dephasing rate grows with `f` (power
//! broadening). Both couplings can be switched off independently.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the per-sample noise draw. Rates are in rad/μs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    /// Mean relative intensity fluctuation (0.03 = 3%).
    pub intensity_mean: f64,
    /// Standard deviation of the fluctuation level.
    pub intensity_std: f64,
    pub base_dephasing: f64,
    pub base_decay: f64,
    /// Fluctuation perturbs the Rabi frequency.
    pub couple_rabi: bool,
    /// Fluctuation broadens the dephasing rate.
    pub couple_dephasing: bool,
}

impl Default for NoiseParams {
    fn default() -> Self {
        NoiseParams {
            intensity_mean: 0.03,
            intensity_std: 0.01,
            base_dephasing: mhz(0.05),
            base_decay: mhz(0.01),
            couple_rabi: true,
            couple_dephasing: true,
        }
    }
}

/// Converts a frequency in MHz to an angular rate in rad/μs.
pub fn mhz(f: f64) -> f64 {
    2.0 * std::f64::consts::PI * f
}

impl NoiseParams {
    /// No fluctuation, no dissipation.
    pub fn noiseless() -> Self {
        NoiseParams {
            intensity_mean: 0.0,
            intensity_std: 0.0,
            base_dephasing: 0.0,
            base_decay: 0.0,
            ..NoiseParams::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("intensity_mean", self.intensity_mean),
            ("intensity_std", self.intensity_std),
            ("base_dephasing", self.base_dephasing),
            ("base_decay", self.base_decay),
        ];
        for (name, value) in fields {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} must be ≥ 0, got {value}")));
            }
        }
        Ok(())
    }
}

/// One quasi-static noise draw, held fixed for a whole trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseRealization {
    pub fluctuation: f64,
    pub rabi_multiplier: f64,
    pub dephasing_rate: f64,
    pub decay_rate: f64,
}

impl NoiseRealization {
    pub fn from_params_without_fluctuation(p: &NoiseParams) -> Self {
        NoiseRealization {
            fluctuation: 0.0,
            rabi_multiplier: 1.0,
            dephasing_rate: p.base_dephasing,
            decay_rate: p.base_decay,
        }
    }
}

/// Draws the fluctuation level by rejection of negative values.
pub fn sample_fluctuation<R: Rng + ?Sized>(p: &NoiseParams, rng: &mut R) -> f64 {
    if p.intensity_std == 0.0 {
        return p.intensity_mean;
    }
    let normal = Normal::new(p.intensity_mean, p.intensity_std).expect("validated std");
    loop {
        let f = normal.sample(rng);
        if f >= 0.0 {
            return f;
        }
    }
}

pub fn sample_noise<R: Rng + ?Sized>(p: &NoiseParams, rng: &mut R) -> NoiseRealization {
    let f = sample_fluctuation(p, rng);
    let rabi_multiplier = if p.couple_rabi && f > 0.0 {
        let normal = Normal::new(0.0, f).expect("f is finite and positive");
        loop {
            let m = 1.0 + normal.sample(rng);
            if m > 0.0 {
                break m;
            }
        }
    } else {
        1.0
    };
    let broadening = if p.couple_dephasing && p.intensity_mean > 0.0 {
        1.0 + f / p.intensity_mean
    } else {
        1.0
    };
    NoiseRealization {
        fluctuation: f,
        rabi_multiplier,
        dephasing_rate: p.base_dephasing * broadening,
        decay_rate: p.base_decay,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn noiseless_limit() {
        let p = NoiseParams {
            intensity_mean: 0.0,
            intensity_std: 0.0,
            ..NoiseParams::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let r = sample_noise(&p, &mut rng);
        assert_eq!(r.rabi_multiplier, 1.0);
        assert_eq!(r.dephasing_rate, p.base_dephasing);
        assert_eq!(r.decay_rate, p.base_decay);
    }

    #[test]
    fn default_fluctuation_statistics() {
        let p = NoiseParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let draws: Vec<f64> = (0..100_000).map(|_| sample_fluctuation(&p, &mut rng)).collect();
        let mean = draws.iter().sum::<f64>() / draws.len() as f64;
        assert!((mean - 0.03).abs() < 0.001, "mean {mean}");
        let inside = draws.iter().filter(|f| (0.0..=0.06).contains(*f)).count();
        assert!(inside as f64 / draws.len() as f64 > 0.99);
        assert!(draws.iter().all(|&f| f >= 0.0));
    }

    #[test]
    fn larger_levels_spread_more() {
        let spread = |mean: f64, std: f64| {
            let p = NoiseParams {
                intensity_mean: mean,
                intensity_std: std,
                ..NoiseParams::default()
            };
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            let m: Vec<f64> = (0..20_000)
                .map(|_| sample_noise(&p, &mut rng).rabi_multiplier)
                .collect();
            let mu = m.iter().sum::<f64>() / m.len() as f64;
            (m.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / m.len() as f64).sqrt()
        };
        let low = spread(0.03, 0.01);
        let high = spread(0.10, 0.05);
        assert!(high > 2.0 * low, "{low} vs {high}");
    }

    #[test]
    fn rejects_negative_parameters() {
        let p = NoiseParams {
            intensity_std: -0.1,
            ..NoiseParams::default()
        };
        assert!(p.validate().is_err());
        assert!(NoiseParams::default().validate().is_ok());
    }
}
