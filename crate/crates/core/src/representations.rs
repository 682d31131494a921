//! The six dynamic images of a depth clip: forward and backward DDI, DDNI and
//! DDMNI.
//!
//! A backward image is always the forward image of the time-reversed clip.
//! For DDI and DDNI that is the same as pooling the reversed per-frame
//! features; for DDMNI the motion detector also runs in reversed time.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::depth_io::{
    image_file_name, normalize_depth, save_image, DepthBounds, DepthSequence, Direction,
    DynamicImage, ImageKind,
};
use crate::error::{Error, Result};
use crate::preprocessing::{
    compute_normals, gmm_foreground, remove_background, GmmConfig, HistogramConfig,
};
use crate::rank_pooling::{featurize, pool_features, to_image, FeatureVector, PoolingConfig};

/// Every knob that affects the produced images.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepresentationConfig {
    pub pooling: PoolingConfig,
    pub histogram: HistogramConfig,
    pub gmm: GmmConfig,
    /// Fixed normalization range; `None` uses each clip's own depth range.
    #[serde(default)]
    pub bounds: Option<DepthBounds>,
}

impl RepresentationConfig {
    pub fn validate(&self) -> Result<()> {
        self.pooling.validate()?;
        self.histogram.validate()?;
        self.gmm.validate()?;
        if let Some(b) = self.bounds {
            DepthBounds::new(b.min_mm, b.max_mm)?;
        }
        Ok(())
    }

    pub fn bounds_for(&self, sequence: &DepthSequence) -> DepthBounds {
        self.bounds.unwrap_or_else(|| DepthBounds::of_sequence(sequence))
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepresentationSet {
    pub sequence_id: String,
    pub ddi_fwd: DynamicImage,
    pub ddi_bwd: DynamicImage,
    pub ddni_fwd: DynamicImage,
    pub ddni_bwd: DynamicImage,
    pub ddmni_fwd: DynamicImage,
    pub ddmni_bwd: DynamicImage,
}

impl RepresentationSet {
    pub fn get(&self, kind: ImageKind, direction: Direction) -> &DynamicImage {
        match (kind, direction) {
            (ImageKind::Ddi, Direction::Forward) => &self.ddi_fwd,
            (ImageKind::Ddi, Direction::Backward) => &self.ddi_bwd,
            (ImageKind::Ddni, Direction::Forward) => &self.ddni_fwd,
            (ImageKind::Ddni, Direction::Backward) => &self.ddni_bwd,
            (ImageKind::Ddmni, Direction::Forward) => &self.ddmni_fwd,
            (ImageKind::Ddmni, Direction::Backward) => &self.ddmni_bwd,
        }
    }

    /// All six images in (kind, direction) order.
    pub fn images(&self) -> [&DynamicImage; 6] {
        [
            &self.ddi_fwd,
            &self.ddi_bwd,
            &self.ddni_fwd,
            &self.ddni_bwd,
            &self.ddmni_fwd,
            &self.ddmni_bwd,
        ]
    }

    /// Assemble from six loaded images; each must carry a distinct tag.
    pub fn from_images(sequence_id: impl Into<String>, images: Vec<DynamicImage>) -> Result<Self> {
        let mut slots: [Option<DynamicImage>; 6] = Default::default();
        for img in images {
            let slot = slot_index(img.kind(), img.direction());
            if slots[slot].replace(img).is_some() {
                return Err(Error::invalid("duplicate dynamic image kind/direction"));
            }
        }
        let mut take = |kind, dir| {
            slots[slot_index(kind, dir)]
                .take()
                .ok_or_else(|| Error::invalid(format!("missing {kind} {dir} image")))
        };
        Ok(RepresentationSet {
            sequence_id: sequence_id.into(),
            ddi_fwd: take(ImageKind::Ddi, Direction::Forward)?,
            ddi_bwd: take(ImageKind::Ddi, Direction::Backward)?,
            ddni_fwd: take(ImageKind::Ddni, Direction::Forward)?,
            ddni_bwd: take(ImageKind::Ddni, Direction::Backward)?,
            ddmni_fwd: take(ImageKind::Ddmni, Direction::Forward)?,
            ddmni_bwd: take(ImageKind::Ddmni, Direction::Backward)?,
        })
    }
}

fn slot_index(kind: ImageKind, direction: Direction) -> usize {
    let k = match kind {
        ImageKind::Ddi => 0,
        ImageKind::Ddni => 1,
        ImageKind::Ddmni => 2,
    };
    2 * k + usize::from(direction == Direction::Backward)
}

fn depth_features(sequence: &DepthSequence, bounds: &DepthBounds) -> Result<Vec<FeatureVector>> {
    sequence
        .frames()
        .iter()
        .map(|f| featurize(&normalize_depth(f, bounds)))
        .collect()
}

fn normal_features(sequence: &DepthSequence, bounds: &DepthBounds) -> Result<Vec<FeatureVector>> {
    sequence
        .frames()
        .iter()
        .map(|f| FeatureVector::new(compute_normals(f, bounds)?.to_feature_values()))
        .collect()
}

/// Per-frame features for `kind`, in the clip's own frame order.
pub fn kind_features(
    sequence: &DepthSequence,
    kind: ImageKind,
    bounds: &DepthBounds,
    histogram: &HistogramConfig,
    gmm: &GmmConfig,
) -> Result<Vec<FeatureVector>> {
    match kind {
        ImageKind::Ddi => depth_features(sequence, bounds),
        ImageKind::Ddni => {
            let cleaned = remove_background(sequence, bounds, histogram)?;
            normal_features(&cleaned.sequence, bounds)
        }
        ImageKind::Ddmni => {
            let masks = gmm_foreground(sequence, bounds, gmm)?;
            let frames = sequence
                .frames()
                .iter()
                .zip(&masks)
                .map(|(f, m)| f.masked(m.as_slice()))
                .collect();
            normal_features(&sequence.with_frames(frames)?, bounds)
        }
    }
}

fn build_one(
    sequence: &DepthSequence,
    kind: ImageKind,
    direction: Direction,
    bounds: &DepthBounds,
    config: &RepresentationConfig,
) -> Result<DynamicImage> {
    let clip;
    let ordered = match direction {
        Direction::Forward => sequence,
        Direction::Backward => {
            clip = sequence.reversed();
            &clip
        }
    };
    let features = kind_features(ordered, kind, bounds, &config.histogram, &config.gmm)?;
    let outcome = pool_features(&features, &config.pooling, Direction::Forward)?;
    if !outcome.converged {
        log::debug!(
            "{} {kind} {direction}: pooling stopped after {} iterations (E = {:.6})",
            sequence.id(),
            outcome.iterations,
            outcome.energy
        );
    }
    let channels = if kind == ImageKind::Ddi { 1 } else { 3 };
    to_image(
        &outcome.params,
        sequence.width(),
        sequence.height(),
        channels,
        kind,
        direction,
    )
}

fn build_pair(
    sequence: &DepthSequence,
    kind: ImageKind,
    bounds: &DepthBounds,
    config: &RepresentationConfig,
) -> Result<(DynamicImage, DynamicImage)> {
    config.validate()?;
    Ok((
        build_one(sequence, kind, Direction::Forward, bounds, config)?,
        build_one(sequence, kind, Direction::Backward, bounds, config)?,
    ))
}

/// Forward and backward dynamic depth images of the raw depth frames.
pub fn build_ddi(
    sequence: &DepthSequence,
    bounds: &DepthBounds,
    pooling: &PoolingConfig,
) -> Result<(DynamicImage, DynamicImage)> {
    let config = RepresentationConfig {
        pooling: *pooling,
        ..Default::default()
    };
    build_pair(sequence, ImageKind::Ddi, bounds, &config)
}

/// Forward and backward dynamic depth normal images: background removed by
/// the last-peak rule, then per-frame normals pooled as 3-plane features.
pub fn build_ddni(
    sequence: &DepthSequence,
    bounds: &DepthBounds,
    pooling: &PoolingConfig,
    histogram: &HistogramConfig,
) -> Result<(DynamicImage, DynamicImage)> {
    let config = RepresentationConfig {
        pooling: *pooling,
        histogram: *histogram,
        ..Default::default()
    };
    build_pair(sequence, ImageKind::Ddni, bounds, &config)
}

/// Forward and backward dynamic depth motion normal images: depth kept only
/// where the mixture model flags moving foreground, then as for DDNI.
pub fn build_ddmni(
    sequence: &DepthSequence,
    bounds: &DepthBounds,
    pooling: &PoolingConfig,
    gmm: &GmmConfig,
) -> Result<(DynamicImage, DynamicImage)> {
    let config = RepresentationConfig {
        pooling: *pooling,
        gmm: *gmm,
        ..Default::default()
    };
    build_pair(sequence, ImageKind::Ddmni, bounds, &config)
}

pub fn build_all(sequence: &DepthSequence, config: &RepresentationConfig) -> Result<RepresentationSet> {
    config.validate()?;
    let bounds = config.bounds_for(sequence);
    let (ddi_fwd, ddi_bwd) = build_pair(sequence, ImageKind::Ddi, &bounds, config)?;
    let (ddni_fwd, ddni_bwd) = build_pair(sequence, ImageKind::Ddni, &bounds, config)?;
    let (ddmni_fwd, ddmni_bwd) = build_pair(sequence, ImageKind::Ddmni, &bounds, config)?;
    Ok(RepresentationSet {
        sequence_id: sequence.id().to_string(),
        ddi_fwd,
        ddi_bwd,
        ddni_fwd,
        ddni_bwd,
        ddmni_fwd,
        ddmni_bwd,
    })
}

/// Reproducibility record written next to a sequence's six images.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub sequence_id: String,
    pub config_hash: String,
    pub config: RepresentationConfig,
    pub files: Vec<String>,
}

pub fn sidecar_path(out_dir: &Path, sequence_id: &str) -> PathBuf {
    out_dir.join(format!("{sequence_id}.json"))
}

pub fn image_paths(out_dir: &Path, sequence_id: &str) -> Vec<PathBuf> {
    ImageKind::ALL
        .iter()
        .flat_map(|&k| Direction::BOTH.map(|d| out_dir.join(image_file_name(sequence_id, k, d))))
        .collect()
}

/// Write the six PNGs and the JSON sidecar into `out_dir`.
pub fn write_outputs(set: &RepresentationSet, config: &RepresentationConfig, out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut files = Vec::with_capacity(6);
    for img in set.images() {
        let name = image_file_name(&set.sequence_id, img.kind(), img.direction());
        save_image(img, &out_dir.join(&name))?;
        files.push(name);
    }
    let sidecar = Sidecar {
        sequence_id: set.sequence_id.clone(),
        config_hash: config.fingerprint(),
        config: *config,
        files,
    };
    let path = sidecar_path(out_dir, &set.sequence_id);
    let text = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
}

/// True when all six images exist and the sidecar records the same config.
pub fn outputs_complete(out_dir: &Path, sequence_id: &str, config: &RepresentationConfig) -> bool {
    let Ok(text) = fs::read_to_string(sidecar_path(out_dir, sequence_id)) else {
        return false;
    };
    let Ok(sidecar) = serde_json::from_str::<Sidecar>(&text) else {
        return false;
    };
    sidecar.sequence_id == sequence_id
        && sidecar.config_hash == config.fingerprint()
        && image_paths(out_dir, sequence_id).iter().all(|p| p.is_file())
}

/// Load a sequence's six images from `out_dir`.
pub fn load_outputs(out_dir: &Path, sequence_id: &str) -> Result<RepresentationSet> {
    let images = image_paths(out_dir, sequence_id)
        .iter()
        .map(|p| crate::depth_io::load_image(p))
        .collect::<Result<Vec<_>>>()?;
    RepresentationSet::from_images(sequence_id, images)
}
