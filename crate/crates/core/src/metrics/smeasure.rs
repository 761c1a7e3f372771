//! Structure measure: an object-aware term and a region-aware term, averaged.
//!
//! The region term splits both maps at the GT foreground centroid into four
//! rectangles and scores each with an SSIM-style similarity, weighted by
//! block area. The object term compares the prediction's distribution on the
//! GT foreground (and its complement on the background) against a uniform 1.

use crate::imagecore::{same_dims, BinaryMap, GrayImage};
use crate::Result;

/// Trade-off between the object and region terms.
const ALPHA: f64 = 0.5;

pub fn s_measure(pred: &GrayImage, gt: &BinaryMap) -> Result<f64> {
    same_dims(gt.dimensions(), pred.dimensions())?;
    let total = gt.len();
    let fg = gt.count_foreground();
    if fg == 0 {
        return Ok(1.0 - pred.mean());
    }
    if fg == total {
        return Ok(pred.mean());
    }
    let score = ALPHA * object_term(pred, gt, fg) + (1.0 - ALPHA) * region_term(pred, gt, fg);
    Ok(score.max(0.0))
}

fn object_term(pred: &GrayImage, gt: &BinaryMap, fg: usize) -> f64 {
    let inside: Vec<f64> = select(pred, gt, true).collect();
    let outside: Vec<f64> = select(pred, gt, false).map(|p| 1.0 - p).collect();
    let u = fg as f64 / gt.len() as f64;
    u * object_score(&inside) + (1.0 - u) * object_score(&outside)
}

fn select<'a>(
    pred: &'a GrayImage,
    gt: &'a BinaryMap,
    want: bool,
) -> impl Iterator<Item = f64> + 'a {
    pred.pixels()
        .iter()
        .zip(gt.pixels())
        .filter(move |(_, &g)| g == want)
        .map(|(&p, _)| p)
}

/// `2 x / (x^2 + 1 + sigma)` with `x` the mean and `sigma` the sample
/// standard deviation of the values.
fn object_score(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let sigma = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    2.0 * mean / (mean * mean + 1.0 + sigma)
}

fn region_term(pred: &GrayImage, gt: &BinaryMap, fg: usize) -> f64 {
    let (w, h) = gt.dimensions();
    let (left, top) = centroid_split(gt, fg);

    let blocks = [
        (0..left, 0..top),
        (left..w, 0..top),
        (0..left, top..h),
        (left..w, top..h),
    ];
    let weighted: f64 = blocks
        .into_iter()
        .filter(|(xs, ys)| !xs.is_empty() && !ys.is_empty())
        .map(|(xs, ys)| {
            let area = (xs.len() * ys.len()) as f64;
            area * block_similarity(pred, gt, xs, ys)
        })
        .sum();
    weighted / (w * h) as f64
}

/// Columns left of and rows above the split: the GT foreground centroid in
/// 1-based pixel coordinates, rounded half away from zero.
fn centroid_split(gt: &BinaryMap, fg: usize) -> (usize, usize) {
    let (w, h) = gt.dimensions();
    let (mut sx, mut sy) = (0u64, 0u64);
    for y in 0..h {
        for x in 0..w {
            if gt.get(x, y) {
                sx += x as u64 + 1;
                sy += y as u64 + 1;
            }
        }
    }
    let cx = (sx as f64 / fg as f64).round() as usize;
    let cy = (sy as f64 / fg as f64).round() as usize;
    (cx.min(w), cy.min(h))
}

fn block_similarity(
    pred: &GrayImage,
    gt: &BinaryMap,
    xs: std::ops::Range<usize>,
    ys: std::ops::Range<usize>,
) -> f64 {
    let n = (xs.len() * ys.len()) as f64;
    let coords = || {
        let xs = xs.clone();
        ys.clone().flat_map(move |y| xs.clone().map(move |x| (x, y)))
    };
    let g = |x, y| if gt.get(x, y) { 1.0 } else { 0.0 };

    let (mut sum_p, mut sum_g) = (0.0, 0.0);
    for (x, y) in coords() {
        sum_p += pred.get(x, y);
        sum_g += g(x, y);
    }
    let (mean_p, mean_g) = (sum_p / n, sum_g / n);

    // Unnormalized second moments; the normalization cancels in the ratio.
    let (mut spp, mut sgg, mut spg) = (0.0, 0.0, 0.0);
    for (x, y) in coords() {
        let dp = pred.get(x, y) - mean_p;
        let dg = g(x, y) - mean_g;
        spp += dp * dp;
        sgg += dg * dg;
        spg += dp * dg;
    }

    let num = 4.0 * mean_p * mean_g * spg;
    let den = (mean_p * mean_p + mean_g * mean_g) * (spp + sgg);
    if num != 0.0 {
        num / den
    } else if den == 0.0 {
        1.0
    } else {
        0.0
    }
}
