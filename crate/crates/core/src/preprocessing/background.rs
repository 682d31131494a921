use log::warn;
use serde::{Deserialize, Serialize};

use crate::depth_io::{DepthBounds, DepthFrame, DepthSequence};
use crate::error::{Error, Result};

/// Settings for the last-peak depth histogram rule.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistogramConfig {
    pub bin_count: usize,
    /// Minimum share of valid pixels a bin needs to count as a peak.
    pub peak_min_mass: f64,
    /// Distance below the last peak (normalized depth) where background starts.
    pub tolerance: f64,
}

impl Default for HistogramConfig {
    fn default() -> Self {
        HistogramConfig {
            bin_count: 256,
            peak_min_mass: 0.01,
            tolerance: 0.1,
        }
    }
}

impl HistogramConfig {
    pub fn validate(&self) -> Result<()> {
        if self.bin_count < 8 {
            return Err(Error::invalid(format!(
                "bin_count must be at least 8, got {}",
                self.bin_count
            )));
        }
        if !(self.peak_min_mass > 0.0 && self.peak_min_mass < 1.0) {
            return Err(Error::invalid(format!(
                "peak_min_mass must lie in (0, 1), got {}",
                self.peak_min_mass
            )));
        }
        if !(self.tolerance > 0.0 && self.tolerance < 1.0) {
            return Err(Error::invalid(format!(
                "tolerance must lie in (0, 1), got {}",
                self.tolerance
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct BackgroundRemoval {
    pub sequence: DepthSequence,
    /// Normalized depth of the last qualifying histogram peak.
    pub peak: Option<f64>,
    /// Pixels deeper than this (normalized) were zeroed.
    pub threshold: Option<f64>,
    pub removed_pixels: usize,
    /// Set when no qualifying peak exists and the input passed through.
    pub passthrough: bool,
}

/// Histogram of normalized depth over every valid pixel of the sequence.
pub fn depth_histogram(sequence: &DepthSequence, bounds: &DepthBounds, bins: usize) -> Vec<usize> {
    let mut hist = vec![0usize; bins];
    for &v in sequence.frames().iter().flat_map(|f| f.data()) {
        if v != 0 {
            let z = bounds.normalize(v);
            let b = ((z * bins as f64) as usize).min(bins - 1);
            hist[b] += 1;
        }
    }
    hist
}

/// Index of the highest-depth local maximum holding at least
/// `min_mass` of all counted pixels.
pub fn last_peak(hist: &[usize], min_mass: f64) -> Option<usize> {
    let total: usize = hist.iter().sum();
    if total == 0 {
        return None;
    }
    let floor = min_mass * total as f64;
    (0..hist.len()).rev().find(|&i| {
        let c = hist[i];
        let left = if i > 0 { hist[i - 1] } else { 0 };
        let right = hist.get(i + 1).copied().unwrap_or(0);
        c > 0 && c >= left && c >= right && c as f64 >= floor
    })
}

/// Zero every pixel whose normalized depth exceeds `threshold`.
pub fn apply_depth_threshold(
    sequence: &DepthSequence,
    bounds: &DepthBounds,
    threshold: f64,
) -> Result<(DepthSequence, usize)> {
    let mut removed = 0;
    let frames = sequence
        .frames()
        .iter()
        .map(|f| {
            let keep: Vec<bool> = f
                .data()
                .iter()
                .map(|&v| v == 0 || bounds.normalize(v) <= threshold)
                .collect();
            removed += keep
                .iter()
                .zip(f.data())
                .filter(|(&k, &v)| !k && v != 0)
                .count();
            f.masked(&keep)
        })
        .collect::<Vec<DepthFrame>>();
    Ok((sequence.with_frames(frames)?, removed))
}

/// Treat the farthest strong histogram mode as static background and zero
/// every pixel deeper than `peak - tolerance`, in every frame.
pub fn remove_background(
    sequence: &DepthSequence,
    bounds: &DepthBounds,
    config: &HistogramConfig,
) -> Result<BackgroundRemoval> {
    config.validate()?;
    let hist = depth_histogram(sequence, bounds, config.bin_count);
    let Some(bin) = last_peak(&hist, config.peak_min_mass) else {
        warn!(
            "sequence {}: no depth histogram peak, background left in place",
            sequence.id()
        );
        return Ok(BackgroundRemoval {
            sequence: sequence.clone(),
            peak: None,
            threshold: None,
            removed_pixels: 0,
            passthrough: true,
        });
    };
    let peak = (bin as f64 + 0.5) / config.bin_count as f64;
    let threshold = peak - config.tolerance;
    let (cleaned, removed) = apply_depth_threshold(sequence, bounds, threshold)?;
    Ok(BackgroundRemoval {
        sequence: cleaned,
        peak: Some(peak),
        threshold: Some(threshold),
        removed_pixels: removed,
        passthrough: false,
    })
}
