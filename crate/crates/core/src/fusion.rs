//! Positive-feedback fusion of branch saliency maps, and the plain additive
//! baseline it is compared against.
//!
//! The feedback loop for one image:
//!
//! 1. the initial consensus mask is the Otsu binarization of the normalized
//!    pixel-wise sum of all branches (every branch weighted equally);
//! 2. every branch is binarized once;
//! 3. each round scores branch `n` by the F-measure of its mask against the
//!    previous consensus mask, normalizes the scores into weights, forms the
//!    weighted sum of the branch maps and binarizes it into the new consensus;
//! 4. the loop stops once the F-measure of the new consensus against the
//!    previous one reaches `epsilon`, or after `max_iterations` rounds.
//!
//! The returned map is the last weighted sum, min-max normalized.

use crate::imagecore::{
    binarize, check_branch_dims, normalize_minmax, resize_bilinear, weighted_sum, BinaryMap,
    GrayImage,
};
use crate::metrics::{ConfusionCounts, DEFAULT_BETA_SQUARED};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum FusionMode {
    #[default]
    PositiveFeedback,
    Additive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FusionConfig {
    /// Convergence threshold on the F-measure between successive masks.
    pub epsilon: f64,
    pub max_iterations: usize,
    pub beta_squared: f64,
    pub mode: FusionMode,
}

impl Default for FusionConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.95,
            max_iterations: 50,
            beta_squared: DEFAULT_BETA_SQUARED,
            mode: FusionMode::PositiveFeedback,
        }
    }
}

impl FusionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must lie in (0, 1], got {}",
                self.epsilon
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidArgument(
                "max_iterations must be at least 1".into(),
            ));
        }
        if !(self.beta_squared > 0.0 && self.beta_squared.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "beta_squared must be positive, got {}",
                self.beta_squared
            )));
        }
        Ok(())
    }
}

/// One weight update.
#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord {
    /// F-measure of each branch mask against the previous consensus.
    pub branch_scores: Vec<f64>,
    pub weights: Vec<f64>,
    /// F-measure of the new consensus against the previous one.
    pub convergence_f: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FusionTrace {
    pub iterations: usize,
    pub per_iteration: Vec<IterationRecord>,
    pub converged: bool,
}

impl FusionTrace {
    /// Weights of the last completed round.
    pub fn final_weights(&self) -> Option<&[f64]> {
        self.per_iteration.last().map(|r| r.weights.as_slice())
    }
}

/// F_β of `pred` against `reference`. Two empty masks score 1.
pub fn binary_fmeasure(pred: &BinaryMap, reference: &BinaryMap, beta_squared: f64) -> Result<f64> {
    Ok(ConfusionCounts::from_masks(pred, reference)?.f_measure(beta_squared))
}

/// Normalized pixel-wise sum of the branches.
pub fn additive_fuse(branches: &[GrayImage]) -> Result<GrayImage> {
    if branches.is_empty() {
        return Err(Error::EmptyBranches);
    }
    let ones = vec![1.0; branches.len()];
    Ok(normalize_minmax(&weighted_sum(branches, &ones)?))
}

pub fn positive_feedback_fuse(
    branches: &[GrayImage],
    config: &FusionConfig,
) -> Result<(GrayImage, FusionTrace)> {
    config.validate()?;
    if branches.is_empty() {
        return Err(Error::EmptyBranches);
    }
    check_branch_dims(branches)?;

    let mut previous = binarize(&additive_fuse(branches)?);
    let branch_masks: Vec<BinaryMap> = branches.iter().map(binarize).collect();

    let mut trace = FusionTrace::default();
    let mut fused = None;
    for _ in 0..config.max_iterations {
        let scores = branch_masks
            .iter()
            .map(|m| binary_fmeasure(m, &previous, config.beta_squared))
            .collect::<Result<Vec<_>>>()?;
        let weights = feedback_weights(&scores);

        let current_map = weighted_sum(branches, &weights)?;
        let current = binarize(&current_map);
        let convergence_f = binary_fmeasure(&current, &previous, config.beta_squared)?;

        trace.iterations += 1;
        trace.per_iteration.push(IterationRecord {
            branch_scores: scores,
            weights,
            convergence_f,
        });
        fused = Some(current_map);
        if convergence_f >= config.epsilon {
            trace.converged = true;
            break;
        }
        previous = current;
    }

    let fused = fused.expect("at least one iteration runs");
    Ok((normalize_minmax(&fused), trace))
}

/// `F_n / sum(F)`, or uniform weights when every score is zero. The sum is
/// taken in ascending order so that weights permute with the branches.
fn feedback_weights(scores: &[f64]) -> Vec<f64> {
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let total: f64 = sorted.iter().sum();
    if total > 0.0 {
        scores.iter().map(|s| s / total).collect()
    } else {
        vec![1.0 / scores.len() as f64; scores.len()]
    }
}

/// Output of [`fuse`]: the map and, in feedback mode, its trace.
#[derive(Clone, Debug, PartialEq)]
pub struct Fused {
    pub map: GrayImage,
    pub trace: Option<FusionTrace>,
}

/// Runs the fusion selected by `config.mode`.
pub fn fuse(branches: &[GrayImage], config: &FusionConfig) -> Result<Fused> {
    match config.mode {
        FusionMode::PositiveFeedback => {
            let (map, trace) = positive_feedback_fuse(branches, config)?;
            Ok(Fused {
                map,
                trace: Some(trace),
            })
        }
        FusionMode::Additive => Ok(Fused {
            map: additive_fuse(branches)?,
            trace: None,
        }),
    }
}

/// Resizes every branch to the first branch's dimensions.
pub fn align_branches(branches: Vec<GrayImage>) -> Result<Vec<GrayImage>> {
    let Some(first) = branches.first() else {
        return Err(Error::EmptyBranches);
    };
    let (w, h) = first.dimensions();
    branches
        .into_iter()
        .map(|b| {
            if b.dimensions() == (w, h) {
                Ok(b)
            } else {
                resize_bilinear(&b, w, h)
            }
        })
        .collect()
}

/// Convenience for callers that hold raw branch lists of mixed sizes.
pub fn fuse_aligned(branches: Vec<GrayImage>, config: &FusionConfig) -> Result<Fused> {
    fuse(&align_branches(branches)?, config)
}
