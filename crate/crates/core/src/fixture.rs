//! Synthetic reaction-yield data: a smooth response surface over the four
//! reaction conditions with an interior optimum, plus seeded Gaussian noise.
//!
//! Used as the stand-in dataset for the search, sweep and trial workflows;
//! the generator is deterministic in its seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::{Dataset, Sample};
use crate::error::{Error, Result};

pub const DEFAULT_SAMPLES: usize = 150;
pub const DEFAULT_SEED: u64 = 2016;
/// Standard deviation of the additive yield noise, in percent.
pub const DEFAULT_NOISE_SD: f64 = 1.5;

/// Sampling box for the conditions: (low, high) per feature.
pub const CONDITION_RANGES: [(f64, f64); 4] = [
    (4.0, 48.0),   // time, h
    (35.0, 65.0),  // temperature, °C
    (10.0, 120.0), // enzyme, mg
    (0.5, 3.0),    // molar ratio
];

/// Floor applied to noisy yields so every value stays strictly positive.
const MIN_YIELD: f64 = 1.0;

/// Noise-free yield (percent) at the given conditions. Peaks at 80% near
/// 30 h, 52 °C, 75 mg and ratio 1.6; never drops below 15%.
pub fn yield_surface(time_h: f64, temperature_c: f64, enzyme_mg: f64, molar_ratio: f64) -> f64 {
    let t = (time_h - 30.0) / 18.0;
    let temp = (temperature_c - 52.0) / 12.0;
    let e = (enzyme_mg - 75.0) / 55.0;
    let r = (molar_ratio - 1.6) / 1.1;
    15.0 + 65.0 * (-(t * t) - temp * temp - e * e - r * r).exp()
}

/// `n` samples drawn uniformly over [`CONDITION_RANGES`] with yields from
/// [`yield_surface`] plus `N(0, noise_sd^2)` noise.
pub fn synthetic_yield(n: usize, seed: u64, noise_sd: f64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::InvalidParameter("fixture size must be positive".into()));
    }
    if !(noise_sd.is_finite() && noise_sd >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "noise standard deviation must be finite and non-negative, got {noise_sd}"
        )));
    }
    let noise = Normal::new(0.0, noise_sd).map_err(|e| {
        Error::InvalidParameter(format!("noise standard deviation {noise_sd}: {e}"))
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples: Vec<Sample> = (0..n)
        .map(|_| {
            let mut draw = |k: usize| {
                let (lo, hi) = CONDITION_RANGES[k];
                rng.random_range(lo..=hi)
            };
            let (t, temp, e, r) = (draw(0), draw(1), draw(2), draw(3));
            let y = (yield_surface(t, temp, e, r) + noise.sample(&mut rng)).max(MIN_YIELD);
            Sample {
                time_h: t,
                temperature_c: temp,
                enzyme_mg: e,
                molar_ratio: r,
                yield_pct: y,
            }
        })
        .collect();
    Dataset::from_samples(&samples, format!("synthetic-yield(n={n},seed={seed},noise={noise_sd})"))
}

/// The default 150-sample fixture.
pub fn default_fixture() -> Dataset {
    synthetic_yield(DEFAULT_SAMPLES, DEFAULT_SEED, DEFAULT_NOISE_SD).expect("valid defaults")
}
