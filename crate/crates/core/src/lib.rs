//! Training-free fusion of saliency maps produced by existing salient object
//! detection models, together with the usual SOD evaluation metrics.
//!
//! Each branch is one model's exported prediction for an image. The fusion
//! loop scores every branch by the F-measure of its binarized map against the
//! current fused consensus and uses the normalized scores as the weights of
//! the next consensus, until two successive consensus masks agree.
//!
//! ```
//! use salfuse::{imagecore::GrayImage, fusion::{positive_feedback_fuse, FusionConfig}};
//!
//! let map = GrayImage::from_fn(4, 4, |x, _| x as f64 / 3.0).unwrap();
//! let (fused, trace) = positive_feedback_fuse(&[map.clone(), map.clone()], &FusionConfig::default()).unwrap();
//! assert!(trace.converged);
//! assert_eq!(fused, map);
//! ```

pub mod batch;
pub mod dataset;
mod error;
pub mod fusion;
pub mod imagecore;
pub mod metrics;
pub mod synth;

pub use error::{Error, Result};
