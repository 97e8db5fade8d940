//! Counterfactual forecasting and effect summaries around an intervention.
//!
//! The structural model is fitted by Gibbs sampling on the pre-intervention
//! span only. Each retained draw is simulated forward over the
//! post-intervention span, and observed-minus-simulated gives one draw of the
//! pointwise effect path. Cumulative effects are running sums per draw, and
//! every band is an equal-tailed empirical quantile interval.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bsts::{
    build_model, gibbs_sample, observed, posterior_predict, ComponentSpec, McmcSettings, Priors,
    Variances,
};
use crate::error::{Error, Result};
use crate::series::{sample_variance, CoverageSeries};

/// Minimum number of pre-intervention points.
pub const MIN_PRE_PERIOD: usize = 3;

/// Offset separating the forecast random stream from the sampler's.
const PREDICT_STREAM: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, PartialEq)]
pub struct ImpactConfig {
    /// Number of pre-intervention points; the post-period starts right after.
    pub intervention_index: usize,
    pub component: ComponentSpec,
    /// `None` selects the weak default priors scaled to the pre-period.
    pub priors: Option<Priors>,
    pub mcmc: McmcSettings,
    pub credible_level: f64,
}

impl ImpactConfig {
    pub fn new(intervention_index: usize) -> Self {
        Self {
            intervention_index,
            component: ComponentSpec::LocalLinearTrend,
            priors: None,
            mcmc: McmcSettings::default(),
            credible_level: 0.95,
        }
    }
}

/// Posterior mean with an equal-tailed credible interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Band {
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactPoint {
    pub epoch: i64,
    pub observed: f64,
    pub counterfactual: Band,
    pub pointwise: Band,
    pub cumulative: Band,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactSummary {
    pub average_effect: Band,
    pub cumulative_effect: Band,
    /// Cumulative effect over cumulative counterfactual; `None` when the
    /// counterfactual total is numerically zero.
    pub relative_effect: Option<f64>,
    /// Share of draws whose total effect has the sign opposite to the median.
    pub tail_probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactReport {
    pub intervention_index: usize,
    /// Epoch of the last pre-intervention observation.
    pub last_pre_epoch: i64,
    pub component: ComponentSpec,
    pub credible_level: f64,
    pub draws: usize,
    pub seed: u64,
    pub points: Vec<ImpactPoint>,
    pub summary: ImpactSummary,
}

/// Per-draw paths behind an [`ImpactReport`], `[draw][post index]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpactDraws {
    pub counterfactual: Vec<Vec<f64>>,
    pub pointwise: Vec<Vec<f64>>,
    pub cumulative: Vec<Vec<f64>>,
}

pub fn run_impact(series: &CoverageSeries, cfg: &ImpactConfig) -> Result<ImpactReport> {
    run_impact_with_draws(series, cfg).map(|(report, _)| report)
}

/// [`run_impact`], also returning the per-draw paths.
pub fn run_impact_with_draws(series: &CoverageSeries, cfg: &ImpactConfig) -> Result<(ImpactReport, ImpactDraws)> {
    let n = series.len();
    let tau = cfg.intervention_index;
    if tau < MIN_PRE_PERIOD || tau + 1 > n {
        return Err(Error::param(format!(
            "intervention index {tau} outside {MIN_PRE_PERIOD}..={} for a series of length {n}",
            n.saturating_sub(1)
        )));
    }
    if !(cfg.credible_level > 0.0 && cfg.credible_level < 1.0) {
        return Err(Error::param(format!(
            "credible level must lie in (0, 1), got {}",
            cfg.credible_level
        )));
    }
    let (pre, post) = series.values().split_at(tau);
    let pre_var = sample_variance(pre)
        .filter(|v| *v > 0.0)
        .ok_or_else(|| Error::Diagnostic("pre-period is constant; nothing to fit".into()))?;

    let d = cfg.component.state_dim();
    let start = Variances {
        obs: 0.5 * pre_var,
        state: vec![0.1 * pre_var; d],
    };
    let model = build_model(cfg.component, &start, Some(pre))?;
    let priors = match &cfg.priors {
        Some(p) => p.clone(),
        None => Priors::weak(d, pre)?,
    };
    let draws = gibbs_sample(&model, &observed(pre), &priors, &cfg.mcmc)
        .map_err(|e| e.context("fitting pre-period model"))?;
    let counterfactual = posterior_predict(&draws, &model, post.len(), cfg.mcmc.seed ^ PREDICT_STREAM)?;

    let pointwise: Vec<Vec<f64>> = counterfactual
        .iter()
        .map(|path| post.iter().zip(path).map(|(y, f)| y - f).collect())
        .collect();
    let cumulative: Vec<Vec<f64>> = pointwise.iter().map(|e| running_sum(e)).collect();

    let level = cfg.credible_level;
    let cf_q = effect_quantiles(&counterfactual, level)?;
    let pw_q = effect_quantiles(&pointwise, level)?;
    let cum_q = effect_quantiles(&cumulative, level)?;
    let cf_mean = column_means(&counterfactual);

    let mut cum_mean = 0.0;
    let points: Vec<ImpactPoint> = (0..post.len())
        .map(|k| {
            let effect = post[k] - cf_mean[k];
            cum_mean += effect;
            ImpactPoint {
                epoch: series.epochs()[tau + k],
                observed: post[k],
                counterfactual: Band {
                    mean: cf_mean[k],
                    lower: cf_q[k].lower,
                    upper: cf_q[k].upper,
                },
                pointwise: Band {
                    mean: effect,
                    lower: pw_q[k].lower,
                    upper: pw_q[k].upper,
                },
                cumulative: Band {
                    mean: cum_mean,
                    lower: cum_q[k].lower,
                    upper: cum_q[k].upper,
                },
            }
        })
        .collect();

    let h = post.len() as f64;
    let totals: Vec<f64> = cumulative.iter().map(|c| c[c.len() - 1]).collect();
    let averages: Vec<Vec<f64>> = totals.iter().map(|t| vec![t / h]).collect();
    let avg_q = effect_quantiles(&averages, level)?[0];
    let total_q = cum_q[post.len() - 1];
    let cf_total: f64 = cf_mean.iter().sum();
    let summary = ImpactSummary {
        average_effect: Band {
            mean: cum_mean / h,
            lower: avg_q.lower,
            upper: avg_q.upper,
        },
        cumulative_effect: Band {
            mean: cum_mean,
            lower: total_q.lower,
            upper: total_q.upper,
        },
        relative_effect: (cf_total.abs() > 1e-9).then(|| cum_mean / cf_total),
        tail_probability: tail_probability(&totals, total_q.median),
    };

    let report = ImpactReport {
        intervention_index: tau,
        last_pre_epoch: series.epochs()[tau - 1],
        component: cfg.component,
        credible_level: level,
        draws: draws.len(),
        seed: cfg.mcmc.seed,
        points,
        summary,
    };
    Ok((
        report,
        ImpactDraws {
            counterfactual,
            pointwise,
            cumulative,
        },
    ))
}

fn running_sum(v: &[f64]) -> Vec<f64> {
    v.iter()
        .scan(0.0, |acc, x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

fn column_means(m: &[Vec<f64>]) -> Vec<f64> {
    let rows = m.len() as f64;
    (0..m[0].len())
        .map(|k| m.iter().map(|r| r[k]).sum::<f64>() / rows)
        .collect()
}

fn tail_probability(totals: &[f64], median: f64) -> f64 {
    if median == 0.0 {
        return 0.5;
    }
    let opposite = totals.iter().filter(|t| t.signum() != median.signum() || **t == 0.0).count();
    opposite as f64 / totals.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quantiles {
    pub lower: f64,
    pub median: f64,
    pub upper: f64,
}

/// Empirical quantile of sorted data, interpolating linearly between order
/// statistics at position `(len - 1) p`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let pos = (sorted.len() - 1) as f64 * p;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Per-column equal-tailed `(lower, median, upper)` of a `[draw][t]` matrix.
pub fn effect_quantiles(draws: &[Vec<f64>], level: f64) -> Result<Vec<Quantiles>> {
    if draws.len() < 2 {
        return Err(Error::param(format!(
            "need at least 2 draws for quantiles, got {}",
            draws.len()
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::param(format!("level must lie in (0, 1), got {level}")));
    }
    let width = draws[0].len();
    if draws.iter().any(|d| d.len() != width) {
        return Err(Error::param("draw rows have different lengths"));
    }
    let tail = (1.0 - level) / 2.0;
    Ok((0..width)
        .map(|k| {
            let mut col: Vec<f64> = draws.iter().map(|d| d[k]).collect();
            col.sort_by(f64::total_cmp);
            Quantiles {
                lower: quantile_sorted(&col, tail),
                median: quantile_sorted(&col, 0.5),
                upper: quantile_sorted(&col, 1.0 - tail),
            }
        })
        .collect())
}

impl ImpactReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| e.context(path.display().to_string()))
    }

    /// One row per post-intervention epoch.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "epoch,observed,counterfactual,counterfactual_lower,counterfactual_upper,\
             effect,effect_lower,effect_upper,cumulative,cumulative_lower,cumulative_upper\n",
        );
        for p in &self.points {
            out.push_str(&format!(
                "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
                p.epoch,
                p.observed,
                p.counterfactual.mean,
                p.counterfactual.lower,
                p.counterfactual.upper,
                p.pointwise.mean,
                p.pointwise.lower,
                p.pointwise.upper,
                p.cumulative.mean,
                p.cumulative.lower,
                p.cumulative.upper,
            ));
        }
        out
    }
}
