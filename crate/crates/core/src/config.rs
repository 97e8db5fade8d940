//! Pipeline configuration file.
//!
//! The file is TOML: `key = value` lines, `#` comments, and dotted section
//! keys either inline (`impact.n_iter = 4000`) or as `[impact]` headers.
//! Unknown keys are errors. Every key has a command-line flag that overrides
//! it.

use std::path::{Path, PathBuf};

use regex::Regex;
use serde::Deserialize;

use crate::bsts::{ComponentSpec, McmcSettings, DEFAULT_PRIOR_SCALE_FACTOR, DEFAULT_PRIOR_SHAPE};
use crate::changepoint::{CptConfig, Statistic, Threshold};
use crate::error::{Error, Result};
use crate::imagery::HsvRange;

/// Default epoch rule: the first run of digits in the file name.
pub const DEFAULT_EPOCH_REGEX: &str = r"(\d+)";

#[derive(Debug, Clone, PartialEq)]
pub struct SegmentSettings {
    /// Glob selecting the input images.
    pub images: Option<String>,
    /// Applied to the file name; its single capture group is the epoch.
    pub epoch_regex: String,
    pub range: HsvRange,
    pub blur_sigma: Option<f64>,
}

impl Default for SegmentSettings {
    fn default() -> Self {
        Self {
            images: None,
            epoch_regex: DEFAULT_EPOCH_REGEX.into(),
            range: HsvRange::FOREST,
            blur_sigma: None,
        }
    }
}

impl SegmentSettings {
    /// Compiles the epoch rule, which must have exactly one capture group.
    pub fn epoch_pattern(&self) -> Result<Regex> {
        let re = Regex::new(&self.epoch_regex)
            .map_err(|e| Error::Config(format!("epoch regex {:?}: {e}", self.epoch_regex)))?;
        if re.captures_len() != 2 {
            return Err(Error::Config(format!(
                "epoch regex {:?} must have exactly one capture group",
                self.epoch_regex
            )));
        }
        Ok(re)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImpactSettings {
    pub component: ComponentSpec,
    pub n_iter: usize,
    pub burn_in: usize,
    pub credible_level: f64,
    pub prior_shape: f64,
    /// Prior scale as a multiple of the pre-period sample variance.
    pub prior_scale_factor: f64,
}

impl Default for ImpactSettings {
    fn default() -> Self {
        let mcmc = McmcSettings::default();
        Self {
            component: ComponentSpec::LocalLinearTrend,
            n_iter: mcmc.n_iter,
            burn_in: mcmc.burn_in,
            credible_level: 0.95,
            prior_shape: DEFAULT_PRIOR_SHAPE,
            prior_scale_factor: DEFAULT_PRIOR_SCALE_FACTOR,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSettings {
    pub width: usize,
    pub height: usize,
    pub fraction: f64,
    pub n: usize,
    pub level0: f64,
    pub pre_slope: f64,
    pub post_slope: f64,
    pub change_at: Option<usize>,
    pub noise: f64,
    pub start_epoch: i64,
}

impl Default for SynthSettings {
    fn default() -> Self {
        Self {
            width: 64,
            height: 64,
            fraction: 0.5,
            n: 35,
            level0: 0.62,
            pre_slope: -0.002,
            post_slope: -0.012,
            change_at: None,
            noise: 0.002,
            start_epoch: 1984,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PipelineConfig {
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub segment: SegmentSettings,
    pub changepoint: CptConfig,
    pub impact: ImpactSettings,
    pub synth: SynthSettings,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    seed: Option<u64>,
    out: Option<PathBuf>,
    #[serde(default)]
    segment: RawSegment,
    #[serde(default)]
    changepoint: RawChangepoint,
    #[serde(default)]
    impact: RawImpact,
    #[serde(default)]
    synth: RawSynth,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSegment {
    images: Option<String>,
    epoch_regex: Option<String>,
    range: Option<String>,
    blur_sigma: Option<f64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawThreshold {
    Number(f64),
    Text(String),
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawChangepoint {
    statistic: Option<Statistic>,
    threshold: Option<RawThreshold>,
    min_seg_len: Option<usize>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawImpact {
    component: Option<ComponentSpec>,
    n_iter: Option<usize>,
    burn_in: Option<usize>,
    credible_level: Option<f64>,
    prior_shape: Option<f64>,
    prior_scale_factor: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSynth {
    width: Option<usize>,
    height: Option<usize>,
    fraction: Option<f64>,
    n: Option<usize>,
    level0: Option<f64>,
    pre_slope: Option<f64>,
    post_slope: Option<f64>,
    change_at: Option<usize>,
    noise: Option<f64>,
    start_epoch: Option<i64>,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().replace('\n', " ")))?;
        let mut cfg = Self::default();
        set(&mut cfg.seed, raw.seed);
        cfg.out = raw.out;

        let s = raw.segment;
        set(&mut cfg.segment.images, s.images.map(Some));
        set(&mut cfg.segment.epoch_regex, s.epoch_regex);
        if let Some(r) = s.range {
            cfg.segment.range = r.parse().map_err(|e: Error| Error::Config(format!("segment.range: {e}")))?;
        }
        cfg.segment.blur_sigma = s.blur_sigma;

        let c = raw.changepoint;
        set(&mut cfg.changepoint.statistic, c.statistic);
        cfg.changepoint.threshold = match c.threshold {
            None => Threshold::Sic,
            Some(RawThreshold::Number(v)) => v.to_string().parse()?,
            Some(RawThreshold::Text(t)) => t.parse()?,
        };
        set(&mut cfg.changepoint.min_seg_len, c.min_seg_len);

        let i = raw.impact;
        set(&mut cfg.impact.component, i.component);
        set(&mut cfg.impact.n_iter, i.n_iter);
        set(&mut cfg.impact.burn_in, i.burn_in);
        set(&mut cfg.impact.credible_level, i.credible_level);
        set(&mut cfg.impact.prior_shape, i.prior_shape);
        set(&mut cfg.impact.prior_scale_factor, i.prior_scale_factor);

        let y = raw.synth;
        set(&mut cfg.synth.width, y.width);
        set(&mut cfg.synth.height, y.height);
        set(&mut cfg.synth.fraction, y.fraction);
        set(&mut cfg.synth.n, y.n);
        set(&mut cfg.synth.level0, y.level0);
        set(&mut cfg.synth.pre_slope, y.pre_slope);
        set(&mut cfg.synth.post_slope, y.post_slope);
        cfg.synth.change_at = y.change_at;
        set(&mut cfg.synth.noise, y.noise);
        set(&mut cfg.synth.start_epoch, y.start_epoch);
        Ok(cfg)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| e.context(format!("config file {}", path.display())))
    }
}
