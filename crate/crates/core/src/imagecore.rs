//! Pixel-level primitives: grayscale and binary maps, min-max normalization,
//! Otsu binarization, bilinear resizing and weighted accumulation.

use std::cmp::Ordering;

use crate::{Error, Result};

/// Number of histogram bins used for thresholding.
pub const BINS: usize = 256;

/// Slack added before flooring `p * 255` so that values which are 8-bit
/// levels up to rounding noise land in their own bin.
const BIN_GUARD: f64 = 1e-9;

/// Real-valued saliency map, row-major, intensities in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GrayImage {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        check_dims(width, height, pixels.len())?;
        if let Some((i, p)) = pixels
            .iter()
            .enumerate()
            .find(|(_, p)| !(0.0..=1.0).contains(*p))
        {
            return Err(Error::InvalidImage(format!(
                "pixel {i} has value {p}, outside [0, 1]"
            )));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    pub fn filled(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    /// Builds an image without the `[0, 1]` range check. Accumulators whose
    /// weights do not sum to one use this and are normalized afterwards.
    pub(crate) fn from_raw(width: usize, height: usize, pixels: Vec<f64>) -> Self {
        debug_assert_eq!(pixels.len(), width * height);
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<f64> {
        self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.pixels[y * self.width + x]
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.pixels.iter().sum::<f64>() / self.pixels.len() as f64
    }

    /// Global `(min, max)` of the pixel values.
    pub fn min_max(&self) -> (f64, f64) {
        self.pixels
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &p| {
                (lo.min(p), hi.max(p))
            })
    }

    /// Pixel-wise affine map `p -> scale * p`, for tests and fixtures.
    pub fn scaled(&self, scale: f64) -> Result<Self> {
        Self::new(
            self.width,
            self.height,
            self.pixels.iter().map(|p| p * scale).collect(),
        )
    }

    /// `1 - p` per pixel.
    pub fn inverted(&self) -> Self {
        Self::from_raw(
            self.width,
            self.height,
            self.pixels.iter().map(|p| 1.0 - p).collect(),
        )
    }

    pub fn ensure_same_dims(&self, other: &GrayImage) -> Result<()> {
        same_dims(self.dimensions(), other.dimensions())
    }
}

/// Boolean mask, row-major, `true` marks foreground.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryMap {
    width: usize,
    height: usize,
    pixels: Vec<bool>,
}

impl BinaryMap {
    pub fn new(width: usize, height: usize, pixels: Vec<bool>) -> Result<Self> {
        check_dims(width, height, pixels.len())?;
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self::new(width, height, pixels)
    }

    /// Foreground where `p > level`.
    pub fn from_gray_above(img: &GrayImage, level: f64) -> Self {
        Self {
            width: img.width,
            height: img.height,
            pixels: img.pixels.iter().map(|&p| p > level).collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn pixels(&self) -> &[bool] {
        &self.pixels
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.pixels[y * self.width + x]
    }

    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn count_foreground(&self) -> usize {
        self.pixels.iter().filter(|&&b| b).count()
    }

    /// The mask as a 0/1 gray image.
    pub fn to_gray(&self) -> GrayImage {
        GrayImage::from_raw(
            self.width,
            self.height,
            self.pixels
                .iter()
                .map(|&b| if b { 1.0 } else { 0.0 })
                .collect(),
        )
    }
}

fn check_dims(width: usize, height: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidImage(format!(
            "dimensions {width}x{height} must be at least 1x1"
        )));
    }
    if width.checked_mul(height) != Some(len) {
        return Err(Error::InvalidImage(format!(
            "{len} pixels do not fill {width}x{height}"
        )));
    }
    Ok(())
}

pub(crate) fn same_dims(expected: (usize, usize), found: (usize, usize)) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Min-max rescaling to `[0, 1]`. A constant image maps to all zeros.
pub fn normalize_minmax(img: &GrayImage) -> GrayImage {
    let (lo, hi) = img.min_max();
    let range = hi - lo;
    let pixels = if range > 0.0 {
        img.pixels.iter().map(|&p| (p - lo) / range).collect()
    } else {
        vec![0.0; img.len()]
    };
    GrayImage::from_raw(img.width, img.height, pixels)
}

/// Histogram bin of a pixel value: `floor(p * 255)`, clamped to `0..=255`.
pub fn quantize(p: f64) -> u8 {
    (p * 255.0 + BIN_GUARD).floor().clamp(0.0, 255.0) as u8
}

pub fn histogram(img: &GrayImage) -> [u64; BINS] {
    let mut hist = [0u64; BINS];
    for &p in &img.pixels {
        hist[quantize(p) as usize] += 1;
    }
    hist
}

/// Otsu's threshold as a bin index `k`: bins `0..=k` are background.
///
/// Maximizes the between-class variance `w0 * w1 * (mu0 - mu1)^2` over the
/// 256-bin histogram. Candidates are compared exactly, ties go to the lowest
/// bin. When only one bin is occupied the result is that bin, so nothing
/// lands in the foreground.
pub fn otsu_bin(img: &GrayImage) -> u8 {
    otsu_bin_from_histogram(&histogram(img))
}

pub fn otsu_bin_from_histogram(hist: &[u64; BINS]) -> u8 {
    let total: u64 = hist.iter().sum();
    let total_sum: u64 = hist.iter().enumerate().map(|(b, &c)| b as u64 * c).sum();

    let mut best: Option<(u8, VarianceKey)> = None;
    let mut below = 0u64;
    let mut below_sum = 0u64;
    for (bin, &count) in hist.iter().enumerate() {
        below += count;
        below_sum += bin as u64 * count;
        let above = total - below;
        if below == 0 || above == 0 {
            continue;
        }
        let key = VarianceKey::new(below, below_sum, total, total_sum);
        match &best {
            Some((_, k)) if key.cmp(k) != Ordering::Greater => {}
            _ => best = Some((bin as u8, key)),
        }
    }

    match best {
        Some((bin, key)) if !key.is_zero() => bin,
        // Single occupied bin.
        _ => hist.iter().rposition(|&c| c > 0).unwrap_or(0) as u8,
    }
}

/// Otsu's threshold expressed as an intensity, `bin / 255`.
pub fn otsu_threshold(img: &GrayImage) -> f64 {
    otsu_bin(img) as f64 / 255.0
}

/// Between-class variance up to a positive constant factor, kept as the
/// exact fraction `d^2 / (n0 * n1)` with `d = s0 * N - S * n0`.
#[derive(Clone, Copy, Debug)]
struct VarianceKey {
    num: u128,
    den: u128,
}

impl VarianceKey {
    fn new(below: u64, below_sum: u64, total: u64, total_sum: u64) -> Self {
        let d = below_sum as i128 * total as i128 - total_sum as i128 * below as i128;
        let d = d.unsigned_abs();
        let num = d
            .checked_mul(d)
            .expect("image too large for exact Otsu comparison");
        Self {
            num,
            den: below as u128 * (total - below) as u128,
        }
    }

    fn is_zero(&self) -> bool {
        self.num == 0
    }

    fn cmp(&self, other: &Self) -> Ordering {
        mul_wide(self.num, other.den).cmp(&mul_wide(other.num, self.den))
    }
}

/// Full 256-bit product as `(high, low)` words.
fn mul_wide(a: u128, b: u128) -> (u128, u128) {
    const MASK: u128 = u64::MAX as u128;
    let (a_hi, a_lo) = (a >> 64, a & MASK);
    let (b_hi, b_lo) = (b >> 64, b & MASK);
    let ll = a_lo * b_lo;
    let lh = a_lo * b_hi;
    let hl = a_hi * b_lo;
    let hh = a_hi * b_hi;
    let mid = (ll >> 64) + (lh & MASK) + (hl & MASK);
    let low = (ll & MASK) | (mid << 64);
    let high = hh + (lh >> 64) + (hl >> 64) + (mid >> 64);
    (high, low)
}

/// Otsu binarization: a pixel is foreground iff its bin lies above the Otsu
/// bin. On 8-bit-valued maps this is exactly `p > otsu_threshold(img)`.
pub fn binarize(img: &GrayImage) -> BinaryMap {
    binarize_above_bin(img, otsu_bin(img))
}

pub fn binarize_above_bin(img: &GrayImage, bin: u8) -> BinaryMap {
    BinaryMap {
        width: img.width,
        height: img.height,
        pixels: img.pixels.iter().map(|&p| quantize(p) > bin).collect(),
    }
}

/// Bilinear resampling with pixel-center alignment and edge clamping.
pub fn resize_bilinear(img: &GrayImage, width: usize, height: usize) -> Result<GrayImage> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidArgument(format!(
            "target size {width}x{height} must be at least 1x1"
        )));
    }
    if (width, height) == img.dimensions() {
        return Ok(img.clone());
    }

    let taps = |dst: usize, src: usize| -> Vec<(usize, usize, f64)> {
        let scale = src as f64 / dst as f64;
        (0..dst)
            .map(|i| {
                let pos = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, (src - 1) as f64);
                let i0 = pos.floor() as usize;
                let i1 = (i0 + 1).min(src - 1);
                (i0, i1, pos - i0 as f64)
            })
            .collect()
    };
    let xs = taps(width, img.width);
    let ys = taps(height, img.height);

    let lerp = |a: f64, b: f64, t: f64| a + (b - a) * t;
    let mut pixels = Vec::with_capacity(width * height);
    for &(y0, y1, ty) in &ys {
        for &(x0, x1, tx) in &xs {
            let p00 = img.get(x0, y0);
            let p10 = img.get(x1, y0);
            let p01 = img.get(x0, y1);
            let p11 = img.get(x1, y1);
            let v = lerp(lerp(p00, p10, tx), lerp(p01, p11, tx), ty);
            let lo = p00.min(p10).min(p01).min(p11);
            let hi = p00.max(p10).max(p01).max(p11);
            pixels.push(v.clamp(lo, hi));
        }
    }
    Ok(GrayImage::from_raw(width, height, pixels))
}

/// Pixel-wise `sum_n weights[n] * maps[n]`, accumulated in branch order with
/// compensated summation. The result is not clamped: it stays in `[0, 1]`
/// for convex weights, otherwise the caller normalizes it.
pub fn weighted_sum(maps: &[GrayImage], weights: &[f64]) -> Result<GrayImage> {
    let first = maps.first().ok_or(Error::Empty("map list"))?;
    if weights.len() != maps.len() {
        return Err(Error::InvalidArgument(format!(
            "{} weights for {} maps",
            weights.len(),
            maps.len()
        )));
    }
    if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "weight {w} is not a finite non-negative number"
        )));
    }
    check_branch_dims(maps)?;

    let mut pixels = Vec::with_capacity(first.len());
    for i in 0..first.len() {
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for (map, &w) in maps.iter().zip(weights) {
            let term = w * map.pixels[i];
            let t = sum + term;
            // Neumaier: recover the low-order bits lost in `sum + term`.
            if sum.abs() >= term.abs() {
                comp += (sum - t) + term;
            } else {
                comp += (term - t) + sum;
            }
            sum = t;
        }
        pixels.push(sum + comp);
    }
    Ok(GrayImage::from_raw(first.width, first.height, pixels))
}

pub(crate) fn check_branch_dims(maps: &[GrayImage]) -> Result<()> {
    let Some(first) = maps.first() else {
        return Ok(());
    };
    let expected = first.dimensions();
    for (index, map) in maps.iter().enumerate().skip(1) {
        if map.dimensions() != expected {
            return Err(Error::BranchMismatch {
                index,
                expected,
                found: map.dimensions(),
            });
        }
    }
    Ok(())
}
