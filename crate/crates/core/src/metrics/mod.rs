//! Salient object detection metrics: MAE, 256-threshold PR sweeps, maximum
//! F-measure over the dataset-mean curve, and the structure measure.

mod smeasure;

use std::collections::BTreeMap;

pub use smeasure::s_measure;

use crate::imagecore::{resize_bilinear, same_dims, BinaryMap, GrayImage};
use crate::{Error, Result};

/// Number of thresholds in a PR sweep, `k / 255` for `k = 0..=255`.
pub const SWEEP_LEN: usize = 256;

/// β² used throughout SOD evaluation; weights precision above recall.
pub const DEFAULT_BETA_SQUARED: f64 = 0.3;

/// Ground-truth level above which a GT pixel counts as foreground.
pub const GT_LEVEL: f64 = 0.5;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionCounts {
    pub fn from_masks(pred: &BinaryMap, reference: &BinaryMap) -> Result<Self> {
        same_dims(reference.dimensions(), pred.dimensions())?;
        let mut c = Self::default();
        for (&p, &r) in pred.pixels().iter().zip(reference.pixels()) {
            match (p, r) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
                (false, false) => c.tn += 1,
            }
        }
        Ok(c)
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    /// `TP / (TP + FP)`, or 1 for an empty prediction.
    pub fn precision(&self) -> f64 {
        let predicted = self.tp + self.fp;
        if predicted == 0 {
            1.0
        } else {
            self.tp as f64 / predicted as f64
        }
    }

    /// `TP / (TP + FN)`, or 1 for an empty reference.
    pub fn recall(&self) -> f64 {
        let actual = self.tp + self.fn_;
        if actual == 0 {
            1.0
        } else {
            self.tp as f64 / actual as f64
        }
    }

    /// F_β between the two masks. Two empty masks agree perfectly (1),
    /// otherwise no true positives means 0.
    pub fn f_measure(&self, beta_squared: f64) -> f64 {
        if self.tp == 0 {
            return if self.fp == 0 && self.fn_ == 0 { 1.0 } else { 0.0 };
        }
        f_beta(self.precision(), self.recall(), beta_squared)
    }
}

/// `(1 + β²) P R / (β² P + R)`, 0 when both are 0.
pub fn f_beta(precision: f64, recall: f64, beta_squared: f64) -> f64 {
    let den = beta_squared * precision + recall;
    if den > 0.0 {
        (1.0 + beta_squared) * precision * recall / den
    } else {
        0.0
    }
}

/// Mean absolute per-pixel difference.
pub fn mae(pred: &GrayImage, gt: &GrayImage) -> Result<f64> {
    pred.ensure_same_dims(gt)?;
    let sum: f64 = pred
        .pixels()
        .iter()
        .zip(gt.pixels())
        .map(|(a, b)| (a - b).abs())
        .sum();
    Ok(sum / pred.len() as f64)
}

/// Per-image precision and recall at each of the 256 thresholds.
#[derive(Clone, Debug, PartialEq)]
pub struct PrSweep {
    pub counts: Vec<ConfusionCounts>,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
}

/// The `k`-th sweep threshold.
pub fn sweep_threshold(k: usize) -> f64 {
    k as f64 / 255.0
}

/// Number of sweep thresholds strictly below `p`, i.e. how many of the
/// binarizations `p > k / 255` mark this pixel as foreground.
fn thresholds_below(p: f64) -> usize {
    let mut n = ((p * 255.0).ceil().max(0.0) as usize).min(SWEEP_LEN);
    while n > 0 && sweep_threshold(n - 1) >= p {
        n -= 1;
    }
    while n < SWEEP_LEN && sweep_threshold(n) < p {
        n += 1;
    }
    n
}

/// Binarizes `pred` at `p > k / 255` for every `k` and scores each mask
/// against `gt`.
pub fn pr_sweep(pred: &GrayImage, gt: &BinaryMap) -> Result<PrSweep> {
    same_dims(gt.dimensions(), pred.dimensions())?;
    // fg[n] / bg[n]: GT foreground / background pixels whose prediction
    // clears exactly n thresholds.
    let mut fg = [0u64; SWEEP_LEN + 1];
    let mut bg = [0u64; SWEEP_LEN + 1];
    for (&p, &g) in pred.pixels().iter().zip(gt.pixels()) {
        let n = thresholds_below(p);
        if g {
            fg[n] += 1;
        } else {
            bg[n] += 1;
        }
    }
    let total_fg: u64 = fg.iter().sum();
    let total_bg: u64 = bg.iter().sum();

    // At threshold k a pixel is predicted foreground iff n > k.
    let mut counts = vec![ConfusionCounts::default(); SWEEP_LEN];
    let (mut tp, mut fp) = (0u64, 0u64);
    for k in (0..SWEEP_LEN).rev() {
        tp += fg[k + 1];
        fp += bg[k + 1];
        counts[k] = ConfusionCounts {
            tp,
            fp,
            fn_: total_fg - tp,
            tn: total_bg - fp,
        };
    }
    Ok(PrSweep {
        precision: counts.iter().map(ConfusionCounts::precision).collect(),
        recall: counts.iter().map(ConfusionCounts::recall).collect(),
        counts,
    })
}

/// Dataset-level PR curve: per-threshold mean precision and recall.
#[derive(Clone, Debug, PartialEq)]
pub struct PrCurve {
    pub thresholds: Vec<f64>,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
}

impl PrCurve {
    pub fn f_measures(&self, beta_squared: f64) -> Vec<f64> {
        self.precision
            .iter()
            .zip(&self.recall)
            .map(|(&p, &r)| f_beta(p, r, beta_squared))
            .collect()
    }
}

pub fn mean_curve<'a>(sweeps: impl IntoIterator<Item = &'a PrSweep>) -> Result<PrCurve> {
    let mut precision = vec![0.0; SWEEP_LEN];
    let mut recall = vec![0.0; SWEEP_LEN];
    let mut n = 0usize;
    for sweep in sweeps {
        if sweep.precision.len() != SWEEP_LEN || sweep.recall.len() != SWEEP_LEN {
            return Err(Error::InvalidArgument(format!(
                "sweep has {} entries, expected {SWEEP_LEN}",
                sweep.precision.len()
            )));
        }
        for k in 0..SWEEP_LEN {
            precision[k] += sweep.precision[k];
            recall[k] += sweep.recall[k];
        }
        n += 1;
    }
    if n == 0 {
        return Err(Error::Empty("sweep collection"));
    }
    for k in 0..SWEEP_LEN {
        precision[k] /= n as f64;
        recall[k] /= n as f64;
    }
    Ok(PrCurve {
        thresholds: (0..SWEEP_LEN).map(sweep_threshold).collect(),
        precision,
        recall,
    })
}

/// Maximum F_β over the thresholds of the dataset-mean PR curve.
pub fn max_fmeasure<'a>(
    sweeps: impl IntoIterator<Item = &'a PrSweep>,
    beta_squared: f64,
) -> Result<f64> {
    let curve = mean_curve(sweeps)?;
    Ok(curve
        .f_measures(beta_squared)
        .into_iter()
        .fold(0.0, f64::max))
}

/// Everything the dataset report needs from one image.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleMetrics {
    pub sample_id: String,
    pub mae: f64,
    pub sm: f64,
    pub sweep: PrSweep,
}

/// Scores `pred` against a ground-truth map. The prediction is resized to
/// the GT size; MAE uses the continuous GT, F and S use it thresholded at
/// [`GT_LEVEL`].
pub fn evaluate_sample(
    sample_id: impl Into<String>,
    pred: &GrayImage,
    gt: &GrayImage,
) -> Result<SampleMetrics> {
    let pred = resize_bilinear(pred, gt.width(), gt.height())?;
    let gt_mask = BinaryMap::from_gray_above(gt, GT_LEVEL);
    Ok(SampleMetrics {
        sample_id: sample_id.into(),
        mae: mae(&pred, gt)?,
        sm: s_measure(&pred, &gt_mask)?,
        sweep: pr_sweep(&pred, &gt_mask)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImageScores {
    pub mae: f64,
    pub sm: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetScores {
    pub mae_mean: f64,
    pub max_f: f64,
    pub sm_mean: f64,
    pub pr: PrCurve,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricReport {
    pub per_image: BTreeMap<String, ImageScores>,
    pub dataset: DatasetScores,
}

/// Folds per-image results into dataset scores. Samples are reduced in
/// sample-id order so the result does not depend on how they were produced.
pub fn aggregate_report(samples: &[SampleMetrics], beta_squared: f64) -> Result<MetricReport> {
    if samples.is_empty() {
        return Err(Error::Empty("sample collection"));
    }
    let mut ordered: Vec<&SampleMetrics> = samples.iter().collect();
    ordered.sort_by(|a, b| a.sample_id.cmp(&b.sample_id));

    let n = ordered.len() as f64;
    let mae_mean = ordered.iter().map(|s| s.mae).sum::<f64>() / n;
    let sm_mean = ordered.iter().map(|s| s.sm).sum::<f64>() / n;
    let pr = mean_curve(ordered.iter().map(|s| &s.sweep))?;
    let max_f = pr.f_measures(beta_squared).into_iter().fold(0.0, f64::max);

    let per_image = ordered
        .iter()
        .map(|s| {
            (
                s.sample_id.clone(),
                ImageScores {
                    mae: s.mae,
                    sm: s.sm,
                },
            )
        })
        .collect();
    Ok(MetricReport {
        per_image,
        dataset: DatasetScores {
            mae_mean,
            max_f,
            sm_mean,
            pr,
        },
    })
}
