//! General regression neural network: a Nadaraya–Watson estimator over the
//! stored training patterns with one Gaussian bandwidth.
//!
//! The pattern layer holds the standardized training inputs, the summation
//! layer forms `sum_j y_j w_j` and `sum_j w_j` with
//! `w_j = exp(-D_j / (2 sigma^2))`, and the output layer divides the two.

use crate::dataset::{Dataset, Normalizer};
use crate::error::{Error, Result};

/// Number of points in [`default_bandwidth_grid`].
pub const DEFAULT_GRID_POINTS: usize = 25;

/// Squared Euclidean distance `(x - p)^T (x - p)`.
pub fn grnn_distance(x: &[f64], pattern: &[f64]) -> Result<f64> {
    if x.len() != pattern.len() {
        return Err(Error::DimensionMismatch {
            expected: pattern.len(),
            found: x.len(),
        });
    }
    Ok(squared_distance(x, pattern))
}

#[inline]
fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v) * (u - v)).sum()
}

/// 25 bandwidths log-spaced over `[1e-2, 1e1]`, in standardized-feature units.
pub fn default_bandwidth_grid() -> Vec<f64> {
    log_grid(1e-2, 1e1, DEFAULT_GRID_POINTS)
}

pub(crate) fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..points)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (points - 1) as f64))
        .collect()
}

/// Kernel-weighted mean of `targets` at standardized query `z`, skipping
/// pattern `skip` if given.
///
/// Distances are shifted by their minimum before exponentiation, which leaves
/// the ratio unchanged and keeps at least one weight equal to one.
fn estimate(
    patterns: &[Vec<f64>],
    targets: &[f64],
    z: &[f64],
    sigma: f64,
    skip: Option<usize>,
) -> f64 {
    let distances: Vec<(usize, f64)> = patterns
        .iter()
        .enumerate()
        .filter(|(j, _)| Some(*j) != skip)
        .map(|(j, p)| (j, squared_distance(z, p)))
        .collect();
    let (nearest, d_min) = distances
        .iter()
        .copied()
        .fold((usize::MAX, f64::INFINITY), |best, (j, d)| {
            if d < best.1 {
                (j, d)
            } else {
                best
            }
        });
    let two_s2 = 2.0 * sigma * sigma;
    let mut num = 0.0;
    let mut den = 0.0;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &(j, d) in &distances {
        let w = (-(d - d_min) / two_s2).exp();
        num += w * targets[j];
        den += w;
        lo = lo.min(targets[j]);
        hi = hi.max(targets[j]);
    }
    if !(den > 0.0) || !num.is_finite() {
        return targets[nearest];
    }
    // the exact ratio is a convex combination; rounding must not leave the hull
    (num / den).clamp(lo, hi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GrnnModel {
    patterns: Vec<Vec<f64>>,
    targets: Vec<f64>,
    sigma: f64,
    normalizer: Normalizer,
}

impl GrnnModel {
    /// Builds a model from already-standardized patterns.
    pub fn new(
        patterns: Vec<Vec<f64>>,
        targets: Vec<f64>,
        sigma: f64,
        normalizer: Normalizer,
    ) -> Result<Self> {
        if patterns.is_empty() {
            return Err(Error::TooFewSamples { needed: 1, found: 0 });
        }
        if patterns.len() != targets.len() {
            return Err(Error::InvalidParameter(format!(
                "{} patterns but {} targets",
                patterns.len(),
                targets.len()
            )));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "bandwidth must be positive and finite, got {sigma}"
            )));
        }
        let d = normalizer.dim();
        for p in &patterns {
            if p.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    found: p.len(),
                });
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter("non-finite pattern".into()));
            }
        }
        if targets.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite target".into()));
        }
        Ok(GrnnModel {
            patterns,
            targets,
            sigma,
            normalizer,
        })
    }

    /// Stores the standardized training set with a fixed bandwidth.
    pub fn fit(train: &Dataset, sigma: f64) -> Result<Self> {
        let normalizer = Normalizer::fit(train)?;
        let patterns = normalizer.transform_all(train)?;
        GrnnModel::new(patterns, train.targets().to_vec(), sigma, normalizer)
    }

    /// Selects the bandwidth from `grid` by leave-one-out RMS error, then fits.
    pub fn fit_auto(train: &Dataset, grid: &[f64]) -> Result<Self> {
        let sigma = select_bandwidth(train, grid)?;
        GrnnModel::fit(train, sigma)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn patterns(&self) -> &[Vec<f64>] {
        &self.patterns
    }

    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn pattern_count(&self) -> usize {
        self.patterns.len()
    }

    pub fn normalizer(&self) -> &Normalizer {
        &self.normalizer
    }

    pub fn dim(&self) -> usize {
        self.normalizer.dim()
    }

    /// Prediction for a raw (unstandardized) input.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        let z = self.normalizer.transform(x)?;
        Ok(estimate(&self.patterns, &self.targets, &z, self.sigma, None))
    }

    /// Prediction for an input already in standardized units.
    pub fn predict_normalized(&self, z: &[f64]) -> Result<f64> {
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: z.len(),
            });
        }
        Ok(estimate(&self.patterns, &self.targets, z, self.sigma, None))
    }
}

pub fn grnn_predict(model: &GrnnModel, x: &[f64]) -> Result<f64> {
    model.predict(x)
}

/// Leave-one-out RMS error of the estimator on standardized patterns.
pub fn loo_rmse(patterns: &[Vec<f64>], targets: &[f64], sigma: f64) -> f64 {
    let n = patterns.len();
    let sse: f64 = (0..n)
        .map(|i| {
            let r = targets[i] - estimate(patterns, targets, &patterns[i], sigma, Some(i));
            r * r
        })
        .sum();
    (sse / n as f64).sqrt()
}

/// The grid value with the smallest leave-one-out RMS error on `train`;
/// ties go to the smaller bandwidth.
pub fn select_bandwidth(train: &Dataset, grid: &[f64]) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("bandwidth grid is empty".into()));
    }
    if let Some(bad) = grid.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
        return Err(Error::InvalidParameter(format!(
            "bandwidth grid values must be positive and finite, got {bad}"
        )));
    }
    if train.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            found: train.len(),
        });
    }
    let normalizer = Normalizer::fit(train)?;
    let patterns = normalizer.transform_all(train)?;
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();

    let mut best = (sorted[0], f64::INFINITY);
    for &sigma in &sorted {
        let score = loo_rmse(&patterns, train.targets(), sigma);
        if score < best.1 {
            best = (sigma, score);
        }
    }
    Ok(best.0)
}
