//! Nearest-centroid baseline over downsampled dynamic images.
//!
//! Stands in for a trained image classifier so fusion can be exercised end
//! to end. One centroid per (class, kind, direction).

use std::collections::BTreeMap;

use super::ScoreVector;
use crate::depth_io::{Direction, DynamicImage, ImageKind};
use crate::error::{Error, Result};
use crate::representations::RepresentationSet;

#[derive(Clone, Debug, PartialEq)]
pub struct CentroidModel {
    downsample: usize,
    class_count: usize,
    centroids: BTreeMap<(ImageKind, Direction), Vec<Vec<f64>>>,
}

/// Source pixels overlapping each of `out` equal cells spanning `len`
/// pixels, with overlap lengths as weights.
fn area_weights(len: usize, out: usize) -> Vec<Vec<(usize, f64)>> {
    let scale = len as f64 / out as f64;
    (0..out)
        .map(|i| {
            let (lo, hi) = (i as f64 * scale, (i + 1) as f64 * scale);
            let first = lo.floor() as usize;
            let last = (hi.ceil() as usize).min(len);
            (first..last)
                .filter_map(|p| {
                    let overlap = (hi.min(p as f64 + 1.0) - lo.max(p as f64)).max(0.0);
                    (overlap > 0.0).then_some((p, overlap))
                })
                .collect()
        })
        .collect()
}

/// Area-average an image to `size x size x 3`, channel-major.
pub fn downsample(image: &DynamicImage, size: usize) -> Result<Vec<f64>> {
    let (w, h) = (image.width(), image.height());
    if size == 0 || size > w || size > h {
        return Err(Error::invalid(format!(
            "downsample size {size} must be in 1..={}",
            w.min(h)
        )));
    }
    let wx = area_weights(w, size);
    let wy = area_weights(h, size);
    let cell_area = (w as f64 / size as f64) * (h as f64 / size as f64);
    let mut out = Vec::with_capacity(3 * size * size);
    for c in image.channels() {
        for ys in &wy {
            for xs in &wx {
                let mut acc = 0.0;
                for &(y, fy) in ys {
                    for &(x, fx) in xs {
                        acc += fx * fy * c[y * w + x] as f64;
                    }
                }
                out.push(acc / cell_area);
            }
        }
    }
    Ok(out)
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len().is_multiple_of(2) {
        0.5 * (v[mid - 1] + v[mid])
    } else {
        v[mid]
    })
}

/// Per-class mean of every downsampled dynamic image.
pub fn train_centroids(
    train: &[(RepresentationSet, usize)],
    downsample_size: usize,
    class_count: usize,
) -> Result<CentroidModel> {
    let mut sums: BTreeMap<(ImageKind, Direction), Vec<Option<Vec<f64>>>> = BTreeMap::new();
    let mut counts = vec![0usize; class_count];
    for (set, label) in train {
        if *label >= class_count {
            return Err(Error::invalid(format!(
                "label {label} outside {class_count} classes"
            )));
        }
        counts[*label] += 1;
        for img in set.images() {
            let x = downsample(img, downsample_size)?;
            let slot = &mut sums
                .entry((img.kind(), img.direction()))
                .or_insert_with(|| vec![None; class_count])[*label];
            match slot {
                Some(acc) => acc.iter_mut().zip(&x).for_each(|(a, v)| *a += v),
                None => *slot = Some(x),
            }
        }
    }
    if let Some(empty) = counts.iter().position(|&c| c == 0) {
        return Err(Error::EmptyClass(empty));
    }
    let centroids = sums
        .into_iter()
        .map(|(key, per_class)| {
            let means = per_class
                .into_iter()
                .zip(&counts)
                .map(|(sum, &n)| {
                    let mut v = sum.expect("every class has samples");
                    v.iter_mut().for_each(|a| *a /= n as f64);
                    v
                })
                .collect();
            (key, means)
        })
        .collect();
    Ok(CentroidModel {
        downsample: downsample_size,
        class_count,
        centroids,
    })
}

impl CentroidModel {
    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn downsample_size(&self) -> usize {
        self.downsample
    }

    pub fn centroids(&self, kind: ImageKind, direction: Direction) -> Option<&[Vec<f64>]> {
        self.centroids.get(&(kind, direction)).map(Vec::as_slice)
    }

    /// Gaussian similarity to each class centroid of the image's kind and
    /// direction, `exp(-‖x - c‖² / 2σ²)` with σ the median distance between
    /// centroids.
    ///
    /// Scores are divided by the nearest centroid's score (the top class
    /// scores exactly 1), which keeps them from underflowing and leaves
    /// their ratios unchanged. Entries are clamped to stay strictly positive.
    pub fn score(&self, image: &DynamicImage) -> Result<ScoreVector> {
        let key = (image.kind(), image.direction());
        let centroids = self
            .centroids
            .get(&key)
            .ok_or_else(|| Error::MissingKind(format!("{} {}", key.0, key.1)))?;
        let x = downsample(image, self.downsample)?;
        let mut pairwise = Vec::new();
        for i in 0..centroids.len() {
            for j in i + 1..centroids.len() {
                pairwise.push(squared_distance(&centroids[i], &centroids[j]).sqrt());
            }
        }
        let sigma = median(pairwise).filter(|s| *s > 0.0).unwrap_or(1.0);
        let d2: Vec<f64> = centroids.iter().map(|c| squared_distance(&x, c)).collect();
        let nearest = d2.iter().copied().fold(f64::INFINITY, f64::min);
        let scores = d2
            .iter()
            .map(|d| (-(d - nearest) / (2.0 * sigma * sigma)).exp().max(f64::MIN_POSITIVE))
            .collect();
        ScoreVector::new(scores)
    }
}
