//! Synthetic saliency fixtures: disc ground truths, blurred predictions and
//! displaced blobs. Used by the test suites and the benchmarks.

use std::f64::consts::TAU;

use rand::Rng;

use crate::imagecore::GrayImage;

/// Binary disc of radius `r` centered at `(cx, cy)`, pixel centers tested.
pub fn disc(width: usize, height: usize, cx: f64, cy: f64, r: f64) -> GrayImage {
    GrayImage::from_raw(
        width,
        height,
        (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| {
                let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
                if dx * dx + dy * dy <= r * r {
                    1.0
                } else {
                    0.0
                }
            })
            .collect(),
    )
}

/// Separable box blur with edge clamping.
pub fn box_blur(img: &GrayImage, radius: usize) -> GrayImage {
    if radius == 0 {
        return img.clone();
    }
    let (w, h) = img.dimensions();
    let span = (2 * radius + 1) as f64;
    let r = radius as isize;
    let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;

    let mut horizontal = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let s: f64 = (-r..=r)
                .map(|d| img.get(clamp(x as isize + d, w), y))
                .sum();
            horizontal[y * w + x] = s / span;
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h {
        for x in 0..w {
            let s: f64 = (-r..=r)
                .map(|d| horizontal[clamp(y as isize + d, h) * w + x])
                .sum();
            out[y * w + x] = (s / span).clamp(0.0, 1.0);
        }
    }
    GrayImage::from_raw(w, h, out)
}

/// Rounds every pixel to the nearest 8-bit level, as a saved map would be.
pub fn quantize_to_bytes(img: &GrayImage) -> GrayImage {
    GrayImage::from_raw(
        img.width(),
        img.height(),
        img.pixels()
            .iter()
            .map(|p| (p * 255.0).round() / 255.0)
            .collect(),
    )
}

/// One fixture image: a ground truth and the branch predictions for it.
#[derive(Clone, Debug)]
pub struct FixtureSample {
    pub gt: GrayImage,
    pub branches: Vec<GrayImage>,
}

/// A square image with a disc ground truth. Branch 0 is the GT lightly
/// blurred; the others are blobs of jittered radius and intensity pushed
/// away from the object in evenly spread directions, plus faint noise.
pub fn robustness_sample(rng: &mut impl Rng, size: usize, branches: usize) -> FixtureSample {
    let s = size as f64;
    let r = s * rng.gen_range(0.18..0.26);
    let cx = s * rng.gen_range(0.4..0.6);
    let cy = s * rng.gen_range(0.4..0.6);
    let gt = disc(size, size, cx, cy, r);

    let blur = (size / 64).max(1);
    let mut maps = vec![quantize_to_bytes(&box_blur(&gt, blur))];
    let phase = rng.gen_range(0.0..TAU);
    for k in 1..branches {
        let angle = phase + TAU * k as f64 / (branches - 1).max(1) as f64 + rng.gen_range(-0.3..0.3);
        let shift = r * rng.gen_range(0.6..1.0);
        let radius = r * rng.gen_range(0.8..1.2);
        let peak = rng.gen_range(0.75..1.0);
        let blob = disc(
            size,
            size,
            cx + shift * angle.cos(),
            cy + shift * angle.sin(),
            radius,
        );
        let blob = box_blur(&blob, blur * 2);
        let noisy: Vec<f64> = blob
            .pixels()
            .iter()
            .map(|&p| (p * peak + rng.gen_range(0.0..0.08)).clamp(0.0, 1.0))
            .collect();
        maps.push(quantize_to_bytes(&GrayImage::from_raw(size, size, noisy)));
    }
    FixtureSample { gt, branches: maps }
}

/// `count` fixture images from one seeded generator.
pub fn robustness_fixture(rng: &mut impl Rng, count: usize, size: usize, branches: usize) -> Vec<FixtureSample> {
    (0..count)
        .map(|_| robustness_sample(rng, size, branches))
        .collect()
}
