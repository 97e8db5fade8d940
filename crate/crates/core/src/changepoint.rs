//! Single-changepoint detection by a Normal likelihood-ratio test.
//!
//! For a split after `tau` points the alternative log-likelihood is
//! `ML(tau) = log p(y[..tau] | theta1) + log p(y[tau..] | theta2)` with both
//! parameter sets at their MLEs. The statistic `lambda = 2 (max ML - null)`
//! is compared to a threshold `c`, by default the SIC-style `p ln n`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{mean_and_mle_variance, CoverageSeries};

/// Which Normal parameters may differ between the two segments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    /// Segment means differ; variance pooled over the whole series.
    Mean,
    /// Segment variances differ; mean fixed at the whole-series mean.
    Variance,
    /// Both differ.
    MeanAndVariance,
}

impl Statistic {
    pub fn estimates_variance(self) -> bool {
        !matches!(self, Statistic::Mean)
    }

    /// Extra free parameters under the alternative, counting the location.
    pub fn extra_params(self) -> f64 {
        match self {
            Statistic::Mean | Statistic::Variance => 2.0,
            Statistic::MeanAndVariance => 3.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Statistic::Mean => "mean",
            Statistic::Variance => "variance",
            Statistic::MeanAndVariance => "mean_and_variance",
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(Statistic::Mean),
            "variance" => Ok(Statistic::Variance),
            "mean_and_variance" | "meanvar" => Ok(Statistic::MeanAndVariance),
            other => Err(Error::param(format!(
                "unknown statistic {other:?} (mean, variance, mean_and_variance)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    /// `p ln n`.
    Sic,
    Value(f64),
}

impl Threshold {
    pub fn resolve(self, statistic: Statistic, n: usize) -> f64 {
        match self {
            Threshold::Sic => statistic.extra_params() * (n as f64).ln(),
            Threshold::Value(c) => c,
        }
    }
}

impl FromStr for Threshold {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("sic") {
            return Ok(Threshold::Sic);
        }
        let c: f64 = s
            .parse()
            .map_err(|_| Error::param(format!("threshold {s:?} is neither \"sic\" nor a number")))?;
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::param(format!("threshold must be positive, got {c}")));
        }
        Ok(Threshold::Value(c))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CptConfig {
    pub statistic: Statistic,
    pub threshold: Threshold,
    pub min_seg_len: usize,
}

impl Default for CptConfig {
    fn default() -> Self {
        Self {
            statistic: Statistic::MeanAndVariance,
            threshold: Threshold::Sic,
            min_seg_len: 2,
        }
    }
}

impl CptConfig {
    pub fn new(statistic: Statistic) -> Self {
        Self {
            statistic,
            ..Self::default()
        }
    }

    /// Minimum segment length actually used (at least 2 when a segment
    /// variance is estimated).
    pub fn effective_min_seg_len(&self) -> usize {
        if self.statistic.estimates_variance() {
            self.min_seg_len.max(2)
        } else {
            self.min_seg_len.max(1)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangepointResult {
    /// Number of points before the change (1-based index of the last
    /// pre-change observation); present only when the null is rejected.
    pub tau_hat: Option<usize>,
    pub lambda: f64,
    pub threshold: f64,
    pub rejected: bool,
    /// `ML(tau)` for every admissible `tau`, in increasing order.
    pub per_tau_ml: Vec<f64>,
}

impl ChangepointResult {
    /// First admissible `tau`, recovered from the symmetric admissible range.
    pub fn first_tau(&self, n: usize) -> usize {
        (n + 1 - self.per_tau_ml.len()) / 2
    }

    /// `tau` maximizing `ML(tau)` whether or not the null was rejected.
    pub fn best_tau(&self, n: usize) -> usize {
        self.first_tau(n) + argmax_first(&self.per_tau_ml)
    }
}

/// How a single segment is fitted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SegmentModel {
    /// Mean estimated, variance supplied.
    KnownVariance(f64),
    /// Variance estimated about a supplied mean.
    KnownMean(f64),
    /// Both estimated.
    Free,
}

impl SegmentModel {
    /// Segment model of `statistic`, with fixed parameters taken from the whole series.
    pub fn for_series(statistic: Statistic, y: &[f64]) -> Self {
        let (mean, var) = mean_and_mle_variance(y);
        match statistic {
            Statistic::Mean => SegmentModel::KnownVariance(var),
            Statistic::Variance => SegmentModel::KnownMean(mean),
            Statistic::MeanAndVariance => SegmentModel::Free,
        }
    }
}

fn is_degenerate(var: f64, y: &[f64]) -> bool {
    let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 16.0 * f64::EPSILON * scale;
    var <= tol * tol
}

/// Maximum Normal log-likelihood of one segment.
///
/// A zero variance where one is needed gives [`Error::Degenerate`] with the
/// segment bounds relative to `y`.
pub fn segment_loglik(y: &[f64], model: SegmentModel) -> Result<f64> {
    let m = y.len();
    if m == 0 {
        return Err(Error::param("segment is empty"));
    }
    let degenerate = || Error::Degenerate { start: 0, end: m };
    let mf = m as f64;
    match model {
        SegmentModel::KnownVariance(var) => {
            if !(var > 0.0) || is_degenerate(var, y) {
                return Err(degenerate());
            }
            let mean = y.iter().sum::<f64>() / mf;
            let rss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
            Ok(-0.5 * mf * (2.0 * PI * var).ln() - rss / (2.0 * var))
        }
        SegmentModel::KnownMean(mu) => {
            let var = y.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / mf;
            if is_degenerate(var, y) {
                return Err(degenerate());
            }
            Ok(-0.5 * mf * ((2.0 * PI * var).ln() + 1.0))
        }
        SegmentModel::Free => {
            if m < 2 {
                return Err(degenerate());
            }
            let (_, var) = mean_and_mle_variance(y);
            if is_degenerate(var, y) {
                return Err(degenerate());
            }
            Ok(-0.5 * mf * ((2.0 * PI * var).ln() + 1.0))
        }
    }
}

fn shift_segment(err: Error, offset: usize) -> Error {
    match err {
        Error::Degenerate { start, end } => Error::Degenerate {
            start: start + offset,
            end: end + offset,
        },
        other => other,
    }
}

/// One-segment (no change) maximum log-likelihood.
pub fn null_loglik(y: &[f64], statistic: Statistic) -> Result<f64> {
    segment_loglik(y, SegmentModel::for_series(statistic, y))
}

fn ml_split(y: &[f64], tau: usize, model: SegmentModel) -> Result<f64> {
    let left = segment_loglik(&y[..tau], model)?;
    let right = segment_loglik(&y[tau..], model).map_err(|e| shift_segment(e, tau))?;
    Ok(left + right)
}

/// `ML(tau)`: the best two-segment log-likelihood with the first segment
/// holding `tau` points.
pub fn ml_tau(y: &[f64], tau: usize, statistic: Statistic) -> Result<f64> {
    let min = if statistic.estimates_variance() { 2 } else { 1 };
    if tau < min || tau + min > y.len() {
        return Err(Error::param(format!(
            "tau {tau} outside admissible range {min}..={}",
            y.len().saturating_sub(min)
        )));
    }
    ml_split(y, tau, SegmentModel::for_series(statistic, y))
}

fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Likelihood-ratio test for at most one change.
pub fn detect_single(series: &CoverageSeries, cfg: &CptConfig) -> Result<ChangepointResult> {
    detect_in_values(series.values(), cfg)
}

/// [`detect_single`] on a bare slice.
pub fn detect_in_values(y: &[f64], cfg: &CptConfig) -> Result<ChangepointResult> {
    let n = y.len();
    let min = cfg.effective_min_seg_len();
    if n < 2 * min {
        return Err(Error::param(format!(
            "series of length {n} is too short for minimum segment length {min}"
        )));
    }
    let model = SegmentModel::for_series(cfg.statistic, y);
    let null = segment_loglik(y, model)?;
    let per_tau_ml = (min..=n - min)
        .map(|tau| ml_split(y, tau, model))
        .collect::<Result<Vec<f64>>>()?;
    let best = argmax_first(&per_tau_ml);
    let lambda = (2.0 * (per_tau_ml[best] - null)).max(0.0);
    let threshold = cfg.threshold.resolve(cfg.statistic, n);
    let rejected = lambda > threshold;
    Ok(ChangepointResult {
        tau_hat: rejected.then_some(min + best),
        lambda,
        threshold,
        rejected,
        per_tau_ml,
    })
}
