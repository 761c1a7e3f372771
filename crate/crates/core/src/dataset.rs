//! Branch directory discovery and 8-bit grayscale file I/O.
//!
//! Every branch is a flat directory of prediction maps; files are joined
//! across branches (and the ground-truth directory) by their stem.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use image::DynamicImage;

use crate::imagecore::GrayImage;
use crate::{Error, Result};

/// File extensions treated as raster images during discovery.
pub const IMAGE_EXTENSIONS: &[&str] = &["png", "pgm", "pnm", "ppm", "bmp", "jpg", "jpeg"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sample {
    pub sample_id: String,
    /// One path per branch, in branch order.
    pub branch_paths: Vec<PathBuf>,
    pub gt_path: Option<PathBuf>,
}

/// A stem that was present in some branch directories but not all.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SkippedStem {
    pub stem: String,
    /// Indices of the branches that lack the stem.
    pub missing_from: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SampleSet {
    /// Sorted by `sample_id`.
    pub samples: Vec<Sample>,
    pub skipped: Vec<SkippedStem>,
}

impl SampleSet {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Samples without a ground-truth file.
    pub fn unpaired(&self) -> impl Iterator<Item = &Sample> {
        self.samples.iter().filter(|s| s.gt_path.is_none())
    }

    /// Decodes every file once, failing on the first unreadable one.
    pub fn validate(&self) -> Result<()> {
        for sample in &self.samples {
            for path in sample.branch_paths.iter().chain(&sample.gt_path) {
                load_gray(path)?;
            }
        }
        Ok(())
    }
}

fn is_image(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
        .unwrap_or(false)
}

/// Image files of one directory keyed by stem. Two files sharing a stem are
/// ambiguous and rejected.
fn list_stems(dir: &Path) -> Result<BTreeMap<String, PathBuf>> {
    let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    let mut stems = BTreeMap::new();
    for entry in entries {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if !path.is_file() || !is_image(&path) {
            continue;
        }
        let Some(stem) = path.file_stem().and_then(|s| s.to_str()).map(str::to_owned) else {
            continue;
        };
        if stem.starts_with('.') {
            continue;
        }
        if let Some(prev) = stems.insert(stem.clone(), path.clone()) {
            let (a, b) = if prev < path { (prev, path) } else { (path, prev) };
            return Err(Error::Discovery(format!(
                "ambiguous stem '{stem}' in {}: {} and {}",
                dir.display(),
                a.display(),
                b.display()
            )));
        }
    }
    Ok(stems)
}

/// Pairs files across branch directories by stem. A stem becomes a sample
/// only if every branch has it; the rest are reported in `skipped`.
pub fn discover(branch_dirs: &[impl AsRef<Path>], gt_dir: Option<&Path>) -> Result<SampleSet> {
    if branch_dirs.is_empty() {
        return Err(Error::EmptyBranches);
    }
    let listings = branch_dirs
        .iter()
        .map(|d| list_stems(d.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    let gt = gt_dir.map(list_stems).transpose()?;

    let all: BTreeSet<&String> = listings.iter().flat_map(|l| l.keys()).collect();
    let mut set = SampleSet::default();
    for stem in all {
        let missing_from: Vec<usize> = listings
            .iter()
            .enumerate()
            .filter(|(_, l)| !l.contains_key(stem))
            .map(|(i, _)| i)
            .collect();
        if !missing_from.is_empty() {
            set.skipped.push(SkippedStem {
                stem: stem.clone(),
                missing_from,
            });
            continue;
        }
        set.samples.push(Sample {
            sample_id: stem.clone(),
            branch_paths: listings.iter().map(|l| l[stem].clone()).collect(),
            gt_path: gt.as_ref().and_then(|g| g.get(stem).cloned()),
        });
    }

    if set.samples.is_empty() {
        let counts: Vec<String> = branch_dirs
            .iter()
            .zip(&listings)
            .map(|(d, l)| format!("{}: {} images", d.as_ref().display(), l.len()))
            .collect();
        return Err(Error::Discovery(format!(
            "no image stem is shared by all branch directories ({})",
            counts.join(", ")
        )));
    }
    Ok(set)
}

/// Decodes an 8-bit raster to `[0, 1]` via `b / 255`. Color inputs are
/// reduced to the mean of their RGB channels; alpha is ignored.
pub fn load_gray(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let decoded = image::load_from_memory(&bytes).map_err(|e| Error::Decode {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let (w, h) = (decoded.width() as usize, decoded.height() as usize);
    let pixels: Vec<f64> = match decoded {
        DynamicImage::ImageLuma8(img) => img.into_raw().iter().map(|&b| b as f64 / 255.0).collect(),
        other => other
            .to_rgb8()
            .pixels()
            .map(|p| (p[0] as u32 + p[1] as u32 + p[2] as u32) as f64 / 765.0)
            .collect(),
    };
    GrayImage::new(w, h, pixels).map_err(|e| Error::Decode {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

/// Pixel value to byte, rounding halves up.
pub fn to_byte(p: f64) -> u8 {
    (p * 255.0 + 0.5).floor().clamp(0.0, 255.0) as u8
}

/// Binary PGM (P5, maxval 255) encoding.
pub fn encode_pgm(img: &GrayImage) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", img.width(), img.height()).into_bytes();
    out.extend(img.pixels().iter().map(|&p| to_byte(p)));
    out
}

/// Writes an 8-bit grayscale file; the format follows the extension
/// (`.pgm` is written as P5, anything else goes through the image encoders).
/// Missing parent directories are created.
pub fn save_gray(img: &GrayImage, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    if ext.as_deref() == Some("pgm") {
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        return f
            .write_all(&encode_pgm(img))
            .map_err(|e| Error::io(path, e));
    }

    let bytes: Vec<u8> = img.pixels().iter().map(|&p| to_byte(p)).collect();
    let buf = image::GrayImage::from_raw(img.width() as u32, img.height() as u32, bytes)
        .expect("buffer length matches dimensions");
    buf.save(path).map_err(|e| match e {
        image::ImageError::IoError(source) => Error::io(path, source),
        other => Error::Encode {
            path: path.to_path_buf(),
            reason: other.to_string(),
        },
    })
}
