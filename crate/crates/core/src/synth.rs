//! Synthetic fixtures with known ground truth: images with an exact covered
//! fraction, and coverage series with a known slope change.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::imagery::{hsv_pixel_to_rgb, rgb_pixel_to_hsv, HsvRange, RasterImage};
use crate::series::CoverageSeries;

/// Reddish-brown bare-ground colors, disjoint in hue from [`HsvRange::FOREST`].
pub const BACKGROUND: HsvRange = match HsvRange::const_new([0, 75, 30], [40, 255, 255]) {
    Some(r) => r,
    None => panic!("invalid background range"),
};

const MAX_COLOR_TRIES: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthImageSpec {
    pub width: usize,
    pub height: usize,
    pub target_fraction: f64,
    pub forest_range: HsvRange,
    pub background_range: HsvRange,
    pub seed: u64,
    pub epoch: i64,
}

impl SynthImageSpec {
    /// Spec using the default forest and background color ranges.
    pub fn new(width: usize, height: usize, target_fraction: f64, seed: u64) -> Self {
        Self {
            width,
            height,
            target_fraction,
            forest_range: HsvRange::FOREST,
            background_range: BACKGROUND,
            seed,
            epoch: 0,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::Spec(format!(
                "image size must be positive, got {}x{}",
                self.width, self.height
            )));
        }
        if !(0.0..=1.0).contains(&self.target_fraction) {
            return Err(Error::Spec(format!(
                "target fraction {} outside [0, 1]",
                self.target_fraction
            )));
        }
        if !self.forest_range.is_disjoint(&self.background_range) {
            return Err(Error::Spec(format!(
                "forest range {} overlaps background range {}",
                self.forest_range, self.background_range
            )));
        }
        Ok(())
    }
}

/// Draws an RGB color whose HSV conversion lands inside `range`.
fn sample_color(range: &HsvRange, rng: &mut impl Rng) -> Result<[u8; 3]> {
    let (lo, hi) = (range.lower(), range.upper());
    for _ in 0..MAX_COLOR_TRIES {
        let hsv = [0, 1, 2].map(|i| rng.random_range(lo[i]..=hi[i]));
        let rgb = hsv_pixel_to_rgb(hsv);
        if range.contains(rgb_pixel_to_hsv(rgb)) {
            return Ok(rgb);
        }
    }
    Err(Error::Spec(format!("no RGB color converts into range {range}")))
}

/// Image with exactly `round(target_fraction * width * height)` forest pixels.
///
/// Returns the image and the realized fraction.
pub fn gen_image(spec: &SynthImageSpec) -> Result<(RasterImage, f64)> {
    spec.validate()?;
    let total = spec.width * spec.height;
    let forest = (spec.target_fraction * total as f64).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut order: Vec<usize> = (0..total).collect();
    order.shuffle(&mut rng);
    let mut is_forest = vec![false; total];
    for &i in &order[..forest] {
        is_forest[i] = true;
    }
    let pixels = is_forest
        .iter()
        .map(|&f| {
            let range = if f {
                &spec.forest_range
            } else {
                &spec.background_range
            };
            sample_color(range, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    let img = RasterImage::new(spec.width, spec.height, pixels, spec.epoch)?;
    Ok((img, forest as f64 / total as f64))
}

/// One image per series epoch, each carrying that epoch's coverage value.
///
/// Image `i` is seeded with `base.seed + i`.
pub fn gen_image_series(series: &CoverageSeries, base: &SynthImageSpec) -> Result<Vec<(RasterImage, f64)>> {
    series
        .epochs()
        .iter()
        .zip(series.values())
        .enumerate()
        .map(|(i, (&epoch, &value))| {
            let spec = SynthImageSpec {
                target_fraction: value.clamp(0.0, 1.0),
                seed: base.seed.wrapping_add(i as u64),
                epoch,
                ..base.clone()
            };
            gen_image(&spec)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSeriesSpec {
    pub n: usize,
    pub level0: f64,
    pub pre_slope: f64,
    pub post_slope: f64,
    /// Number of points on the pre-change line; the slope switches after it.
    pub change_at: Option<usize>,
    pub noise_sd: f64,
    pub seed: u64,
    pub start_epoch: i64,
}

impl SynthSeriesSpec {
    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Spec("series length must be at least 1".into()));
        }
        if let Some(c) = self.change_at {
            if c == 0 || c >= self.n {
                return Err(Error::Spec(format!(
                    "change_at {c} outside 1..={}",
                    self.n.saturating_sub(1)
                )));
            }
        }
        if !(self.noise_sd >= 0.0) {
            return Err(Error::Spec(format!("noise sd {} is negative", self.noise_sd)));
        }
        Ok(())
    }

    /// Noiseless, unclamped mean at 0-based index `t`.
    ///
    /// Continuous in `t` with the kink at index `change_at`: points up to and
    /// including `change_at` lie on the pre-change line, later points leave it
    /// at `post_slope`.
    pub fn mean_at(&self, t: usize) -> f64 {
        let t = t as f64;
        match self.change_at {
            Some(c) if t > c as f64 => {
                let knot = c as f64;
                self.level0 + self.pre_slope * knot + self.post_slope * (t - knot)
            }
            _ => self.level0 + self.pre_slope * t,
        }
    }

    /// Pre-change line extended over every index (the no-change path).
    pub fn baseline_at(&self, t: usize) -> f64 {
        self.level0 + self.pre_slope * t as f64
    }
}

/// Piecewise-linear series plus Gaussian noise, clamped to `[0, 1]`.
pub fn gen_series(spec: &SynthSeriesSpec) -> Result<CoverageSeries> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise_sd).map_err(|e| Error::Spec(e.to_string()))?;
    let values = (0..spec.n)
        .map(|t| (spec.mean_at(t) + noise.sample(&mut rng)).clamp(0.0, 1.0))
        .collect();
    CoverageSeries::from_values(spec.start_epoch, values)
}
