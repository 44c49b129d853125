//! Scoring: RMS error and prediction accuracy under a tolerance.

use std::fmt;

use crate::error::{Error, Result};

/// Default tolerance for [`tolerance_accuracy`] (30%).
pub const DEFAULT_TOLERANCE: f64 = 0.30;

/// How "within tolerance" is decided for one prediction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ToleranceRule {
    /// `|p - a| <= tol * |a|`.
    Relative,
    /// `|p - a| <= tol * span`, with `span` the observed target range of the
    /// training set.
    Range { span: f64 },
}

impl ToleranceRule {
    pub fn name(&self) -> &'static str {
        match self {
            ToleranceRule::Relative => "relative",
            ToleranceRule::Range { .. } => "range",
        }
    }

    /// The range rule for the given training targets.
    pub fn range_of(targets: &[f64]) -> Self {
        let (lo, hi) = targets
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &y| {
                (lo.min(y), hi.max(y))
            });
        let span = if lo.is_finite() { hi - lo } else { 0.0 };
        ToleranceRule::Range { span }
    }
}

impl fmt::Display for ToleranceRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ToleranceRule::Relative => f.write_str("relative"),
            ToleranceRule::Range { span } => write!(f, "range(span={span})"),
        }
    }
}

/// One scored prediction. `residual = actual - predicted`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub actual: f64,
    pub predicted: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub rms_error: f64,
    pub accuracy: f64,
    pub tolerance: f64,
    pub rule: ToleranceRule,
    pub n: usize,
    pub residuals: Vec<Residual>,
}

fn check_pair(actual: &[f64], predicted: &[f64]) -> Result<()> {
    if actual.is_empty() {
        return Err(Error::InvalidParameter("cannot score an empty list".into()));
    }
    if actual.len() != predicted.len() {
        return Err(Error::DimensionMismatch {
            expected: actual.len(),
            found: predicted.len(),
        });
    }
    if actual.iter().chain(predicted).any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter("non-finite value in scored lists".into()));
    }
    Ok(())
}

/// `sqrt(mean((a - p)^2))`.
pub fn rms_error(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_pair(actual, predicted)?;
    let sse: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| (a - p) * (a - p))
        .sum();
    Ok((sse / actual.len() as f64).sqrt())
}

/// Fraction of predictions with `|p - a| <= tolerance * |a|`.
///
/// A zero actual value makes the relative rule meaningless and is an error;
/// use [`tolerance_accuracy_with`] and [`ToleranceRule::Range`] instead.
pub fn tolerance_accuracy(actual: &[f64], predicted: &[f64], tolerance: f64) -> Result<f64> {
    tolerance_accuracy_with(actual, predicted, tolerance, ToleranceRule::Relative)
}

pub fn tolerance_accuracy_with(
    actual: &[f64],
    predicted: &[f64],
    tolerance: f64,
    rule: ToleranceRule,
) -> Result<f64> {
    check_pair(actual, predicted)?;
    if !(tolerance > 0.0 && tolerance.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tolerance}"
        )));
    }
    let mut good = 0usize;
    for (i, (a, p)) in actual.iter().zip(predicted).enumerate() {
        let bound = match rule {
            ToleranceRule::Relative => {
                if *a == 0.0 {
                    return Err(Error::ZeroActual { index: i });
                }
                tolerance * a.abs()
            }
            ToleranceRule::Range { span } => tolerance * span,
        };
        if (p - a).abs() <= bound {
            good += 1;
        }
    }
    Ok(good as f64 / actual.len() as f64)
}

/// Scores a prediction list with both indicators and keeps the residual table.
pub fn evaluate(
    actual: &[f64],
    predicted: &[f64],
    tolerance: f64,
    rule: ToleranceRule,
) -> Result<Evaluation> {
    let rms = rms_error(actual, predicted)?;
    let accuracy = tolerance_accuracy_with(actual, predicted, tolerance, rule)?;
    let residuals = actual
        .iter()
        .zip(predicted)
        .map(|(&a, &p)| Residual {
            actual: a,
            predicted: p,
            residual: a - p,
        })
        .collect();
    Ok(Evaluation {
        rms_error: rms,
        accuracy,
        tolerance,
        rule,
        n: actual.len(),
        residuals,
    })
}
