//! Epoch images, RGB to HSV conversion, Gaussian denoising, HSV-box masking
//! and coverage fractions.
//!
//! All channels are bytes. Hue is stored on the full byte scale,
//! `round(degrees / 360 * 255)`, so bounds such as `H = 205` are representable.

use std::fmt;
use std::io::Cursor;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use image::{DynamicImage, GrayImage, ImageFormat, RgbImage};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 8-bit, 3-channel raster with the epoch it was captured at.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
    pub epoch: i64,
}

impl RasterImage {
    pub fn new(width: usize, height: usize, pixels: Vec<[u8; 3]>, epoch: i64) -> Result<Self> {
        check_dims(width, height, pixels.len())?;
        Ok(Self {
            width,
            height,
            pixels,
            epoch,
        })
    }

    /// Image filled with a single color.
    pub fn filled(width: usize, height: usize, rgb: [u8; 3], epoch: i64) -> Result<Self> {
        Self::new(width, height, vec![rgb; width * height], epoch)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Row-major pixels.
    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        self.pixels[y * self.width + x]
    }

    /// Encodes the image as an 8-bit RGB PNG.
    pub fn to_png(&self) -> Result<Vec<u8>> {
        let raw: Vec<u8> = self.pixels.iter().flatten().copied().collect();
        let buf = RgbImage::from_raw(self.width as u32, self.height as u32, raw)
            .ok_or_else(|| Error::param("pixel buffer does not match dimensions"))?;
        let mut out = Cursor::new(Vec::new());
        buf.write_to(&mut out, ImageFormat::Png)
            .map_err(|e| Error::param(format!("png encode: {e}")))?;
        Ok(out.into_inner())
    }
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::param(format!(
            "image dimensions must be positive, got {width}x{height}"
        )));
    }
    if width * height != len {
        return Err(Error::param(format!(
            "expected {} pixels for {width}x{height}, got {len}",
            width * height
        )));
    }
    Ok(())
}

/// Per-pixel `(h, s, v)` bytes, same layout as the source image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HsvPixelGrid {
    width: usize,
    height: usize,
    pixels: Vec<[u8; 3]>,
}

impl HsvPixelGrid {
    pub fn new(width: usize, height: usize, pixels: Vec<[u8; 3]>) -> Result<Self> {
        check_dims(width, height, pixels.len())?;
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[[u8; 3]] {
        &self.pixels
    }
}

/// Inclusive box in HSV byte space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawRange", into = "RawRange")]
pub struct HsvRange {
    lower: [u8; 3],
    upper: [u8; 3],
}

#[derive(Serialize, Deserialize)]
struct RawRange {
    lower: [u8; 3],
    upper: [u8; 3],
}

impl TryFrom<RawRange> for HsvRange {
    type Error = Error;

    fn try_from(raw: RawRange) -> Result<Self> {
        HsvRange::new(raw.lower, raw.upper)
    }
}

impl From<HsvRange> for RawRange {
    fn from(r: HsvRange) -> Self {
        RawRange {
            lower: r.lower,
            upper: r.upper,
        }
    }
}

impl HsvRange {
    /// Forest-cover bounds `[55, 75, 30]..=[205, 255, 255]`.
    pub const FOREST: HsvRange = HsvRange {
        lower: [55, 75, 30],
        upper: [205, 255, 255],
    };

    /// The whole byte cube.
    pub const FULL: HsvRange = HsvRange {
        lower: [0, 0, 0],
        upper: [255, 255, 255],
    };

    pub fn new(lower: [u8; 3], upper: [u8; 3]) -> Result<Self> {
        if let Some(i) = (0..3).find(|&i| lower[i] > upper[i]) {
            return Err(Error::param(format!(
                "HSV range channel {i}: lower {} exceeds upper {}",
                lower[i], upper[i]
            )));
        }
        Ok(Self { lower, upper })
    }

    /// `const` constructor; `None` when a lower bound exceeds its upper bound.
    pub const fn const_new(lower: [u8; 3], upper: [u8; 3]) -> Option<Self> {
        let mut i = 0;
        while i < 3 {
            if lower[i] > upper[i] {
                return None;
            }
            i += 1;
        }
        Some(Self { lower, upper })
    }

    pub fn lower(&self) -> [u8; 3] {
        self.lower
    }

    pub fn upper(&self) -> [u8; 3] {
        self.upper
    }

    #[inline]
    pub fn contains(&self, hsv: [u8; 3]) -> bool {
        (0..3).all(|i| self.lower[i] <= hsv[i] && hsv[i] <= self.upper[i])
    }

    /// True when the two boxes share no point (disjoint in at least one channel).
    pub fn is_disjoint(&self, other: &HsvRange) -> bool {
        (0..3).any(|i| self.upper[i] < other.lower[i] || other.upper[i] < self.lower[i])
    }
}

impl fmt::Display for HsvRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.lower;
        let [d, e, g] = self.upper;
        write!(f, "{a},{b},{c}:{d},{e},{g}")
    }
}

/// Parses a single triple `h,s,v`.
pub fn parse_triple(s: &str) -> Result<[u8; 3]> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(Error::param(format!("expected h,s,v triple, got {s:?}")));
    }
    let mut out = [0u8; 3];
    for (slot, p) in out.iter_mut().zip(&parts) {
        *slot = p
            .parse()
            .map_err(|_| Error::param(format!("channel value {p:?} is not in 0..=255")))?;
    }
    Ok(out)
}

impl FromStr for HsvRange {
    type Err = Error;

    /// `h,s,v:h,s,v` (lower then upper).
    fn from_str(s: &str) -> Result<Self> {
        let (lo, hi) = s
            .split_once(':')
            .ok_or_else(|| Error::param(format!("expected lower:upper, got {s:?}")))?;
        HsvRange::new(parse_triple(lo)?, parse_triple(hi)?)
    }
}

/// Per-pixel covered (255) / background (0) grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    bits: Vec<u8>,
}

impl BinaryMask {
    pub const COVERED: u8 = 255;

    pub fn new(width: usize, height: usize, bits: Vec<u8>) -> Result<Self> {
        check_dims(width, height, bits.len())?;
        if let Some(v) = bits.iter().find(|&&b| b != 0 && b != 255) {
            return Err(Error::param(format!("mask value {v} is not 0 or 255")));
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn covered_count(&self) -> usize {
        self.bits.iter().filter(|&&b| b == Self::COVERED).count()
    }

    /// Grayscale PNG, white = covered.
    pub fn to_png(&self) -> Result<Vec<u8>> {
        let buf = GrayImage::from_raw(self.width as u32, self.height as u32, self.bits.clone())
            .ok_or_else(|| Error::param("mask buffer does not match dimensions"))?;
        let mut out = Cursor::new(Vec::new());
        buf.write_to(&mut out, ImageFormat::Png)
            .map_err(|e| Error::param(format!("png encode: {e}")))?;
        Ok(out.into_inner())
    }
}

const MEMORY_SOURCE: &str = "<memory>";

/// Decodes an encoded raster (PNG) into an 8-bit RGB image.
///
/// Alpha is dropped and grayscale is replicated into three channels. Inputs
/// with more than 8 bits per channel are rejected rather than truncated.
pub fn decode_image(bytes: &[u8], epoch: i64) -> Result<RasterImage> {
    decode_with_origin(bytes, epoch, Path::new(MEMORY_SOURCE))
}

/// Reads and decodes the file at `path`.
pub fn read_image(path: &Path, epoch: i64) -> Result<RasterImage> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_with_origin(&bytes, epoch, path)
}

fn decode_with_origin(bytes: &[u8], epoch: i64, origin: &Path) -> Result<RasterImage> {
    let decoded = image::load_from_memory(bytes).map_err(|e| match e {
        image::ImageError::Unsupported(u) => Error::UnsupportedFormat {
            path: origin.to_path_buf(),
            detail: u.to_string(),
        },
        other => Error::Decode {
            path: origin.to_path_buf(),
            detail: other.to_string(),
        },
    })?;
    let rgb = match decoded {
        DynamicImage::ImageLuma8(_)
        | DynamicImage::ImageLumaA8(_)
        | DynamicImage::ImageRgb8(_)
        | DynamicImage::ImageRgba8(_) => decoded.to_rgb8(),
        other => {
            return Err(Error::UnsupportedFormat {
                path: PathBuf::from(origin),
                detail: format!("unsupported bit depth ({:?})", other.color()),
            })
        }
    };
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let pixels = rgb.pixels().map(|p| p.0).collect();
    RasterImage::new(w, h, pixels, epoch)
}

/// Hexcone conversion of one pixel; hue on the byte scale, achromatic hue 0.
pub fn rgb_pixel_to_hsv([r, g, b]: [u8; 3]) -> [u8; 3] {
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let delta = f64::from(max - min);
    if max == min {
        return [0, 0, max];
    }
    let (r, g, b) = (f64::from(r), f64::from(g), f64::from(b));
    let sector = if max as f64 == r {
        let s = (g - b) / delta;
        if s < 0.0 {
            s + 6.0
        } else {
            s
        }
    } else if max as f64 == g {
        (b - r) / delta + 2.0
    } else {
        (r - g) / delta + 4.0
    };
    let degrees = 60.0 * sector;
    let h = (degrees / 360.0 * 255.0).round();
    let s = (delta * 255.0 / f64::from(max)).round();
    [h as u8, s as u8, max]
}

/// Standard inverse of [`rgb_pixel_to_hsv`].
pub fn hsv_pixel_to_rgb([h, s, v]: [u8; 3]) -> [u8; 3] {
    let degrees = f64::from(h) / 255.0 * 360.0;
    let s = f64::from(s) / 255.0;
    let v = f64::from(v);
    let c = v * s;
    let hp = (degrees / 60.0) % 6.0;
    let x = c * (1.0 - ((hp % 2.0) - 1.0).abs());
    let (r1, g1, b1) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    let q = |t: f64| (t + m).round().clamp(0.0, 255.0) as u8;
    [q(r1), q(g1), q(b1)]
}

pub fn rgb_to_hsv(img: &RasterImage) -> HsvPixelGrid {
    HsvPixelGrid {
        width: img.width,
        height: img.height,
        pixels: img.pixels.iter().copied().map(rgb_pixel_to_hsv).collect(),
    }
}

/// Normalized 1-D Gaussian weights over `[-r, r]` with `r = ceil(3 sigma)`.
pub fn gaussian_kernel(sigma: f64) -> Result<Vec<f64>> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::param(format!("blur sigma must be positive, got {sigma}")));
    }
    let radius = (3.0 * sigma).ceil() as i64;
    let raw: Vec<f64> = (-radius..=radius)
        .map(|k| (-((k * k) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|w| w / total).collect())
}

/// Separable Gaussian blur with clamp-to-edge borders.
///
/// Both passes run in `f64`; quantization happens once, at the end.
pub fn gaussian_blur(img: &RasterImage, sigma: f64) -> Result<RasterImage> {
    let kernel = gaussian_kernel(sigma)?;
    let radius = (kernel.len() / 2) as isize;
    let (w, h) = (img.width as isize, img.height as isize);
    let at = |x: isize, y: isize| (y.clamp(0, h - 1) * w + x.clamp(0, w - 1)) as usize;

    let mut horizontal = vec![[0.0f64; 3]; img.pixels.len()];
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0.0; 3];
            for (k, wk) in kernel.iter().enumerate() {
                let p = img.pixels[at(x + k as isize - radius, y)];
                for c in 0..3 {
                    acc[c] += wk * f64::from(p[c]);
                }
            }
            horizontal[(y * w + x) as usize] = acc;
        }
    }

    let mut pixels = Vec::with_capacity(img.pixels.len());
    for y in 0..h {
        for x in 0..w {
            let mut acc = [0.0; 3];
            for (k, wk) in kernel.iter().enumerate() {
                let p = horizontal[at(x, y + k as isize - radius)];
                for c in 0..3 {
                    acc[c] += wk * p[c];
                }
            }
            pixels.push(acc.map(|v| v.round().clamp(0.0, 255.0) as u8));
        }
    }
    RasterImage::new(img.width, img.height, pixels, img.epoch)
}

/// 255 where every channel lies inside the inclusive range, else 0.
pub fn apply_hsv_mask(grid: &HsvPixelGrid, range: &HsvRange) -> BinaryMask {
    BinaryMask {
        width: grid.width,
        height: grid.height,
        bits: grid
            .pixels
            .iter()
            .map(|&p| if range.contains(p) { 255 } else { 0 })
            .collect(),
    }
}

/// Fraction of covered pixels.
pub fn coverage_fraction(mask: &BinaryMask) -> f64 {
    mask.covered_count() as f64 / (mask.width * mask.height) as f64
}

/// Convenience: optional blur, then HSV conversion, masking and counting.
pub fn segment(img: &RasterImage, range: &HsvRange, blur_sigma: Option<f64>) -> Result<(BinaryMask, f64)> {
    let grid = match blur_sigma {
        Some(sigma) => rgb_to_hsv(&gaussian_blur(img, sigma)?),
        None => rgb_to_hsv(img),
    };
    let mask = apply_hsv_mask(&grid, range);
    let fraction = coverage_fraction(&mask);
    Ok((mask, fraction))
}

#[derive(Debug, Clone)]
pub struct CalibrationEntry {
    pub range: HsvRange,
    pub mask: BinaryMask,
    pub fraction: f64,
}

/// Masks one image under each candidate range, in the order given.
pub fn calibration_grid(img: &RasterImage, candidates: &[HsvRange]) -> Result<Vec<CalibrationEntry>> {
    if candidates.is_empty() {
        return Err(Error::param("calibration needs at least one candidate range"));
    }
    let grid = rgb_to_hsv(img);
    Ok(candidates
        .iter()
        .map(|range| {
            let mask = apply_hsv_mask(&grid, range);
            let fraction = coverage_fraction(&mask);
            CalibrationEntry {
                range: *range,
                mask,
                fraction,
            }
        })
        .collect())
}

/// Plain-text table, one row per candidate: `index  lower  upper  fraction`.
pub fn calibration_table(entries: &[CalibrationEntry]) -> String {
    let mut out = String::from("index\tlower\tupper\tfraction\n");
    for (i, e) in entries.iter().enumerate() {
        let [a, b, c] = e.range.lower();
        let [d, f, g] = e.range.upper();
        out.push_str(&format!("{i}\t{a},{b},{c}\t{d},{f},{g}\t{:.6}\n", e.fraction));
    }
    out
}

/// Writes `<stem>.mask.<index>.png` per entry and `<stem>.calibration.txt`.
pub fn write_calibration(entries: &[CalibrationEntry], stem: &str, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::with_capacity(entries.len() + 1);
    for (i, e) in entries.iter().enumerate() {
        let path = dir.join(format!("{stem}.mask.{i}.png"));
        std::fs::write(&path, e.mask.to_png()?).map_err(|err| Error::io(&path, err))?;
        written.push(path);
    }
    let table = dir.join(format!("{stem}.calibration.txt"));
    std::fs::write(&table, calibration_table(entries)).map_err(|err| Error::io(&table, err))?;
    written.push(table);
    Ok(written)
}
