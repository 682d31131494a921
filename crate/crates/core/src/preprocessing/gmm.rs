//! Adaptive per-pixel Gaussian mixture background model over normalized depth.
//!
//! Each pixel keeps `K` weighted Gaussians. Modes are ranked by `w / σ`; the
//! shortest prefix of that ranking whose weights reach
//! `background_threshold` is background. A reading is foreground when it
//! matches (within `match_distance` standard deviations) no background mode.
//! After classification the matched mode is pulled toward the reading at
//! rate `α`; an unmatched reading replaces the weakest mode.

use serde::{Deserialize, Serialize};

use crate::depth_io::{DepthBounds, DepthSequence};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GmmConfig {
    pub components: usize,
    pub learning_rate: f64,
    pub background_threshold: f64,
    /// Match radius in standard deviations.
    pub match_distance: f64,
    pub initial_variance: f64,
    /// Variance floor; keeps noise-free pixels from collapsing to σ = 0.
    pub min_variance: f64,
}

impl Default for GmmConfig {
    fn default() -> Self {
        GmmConfig {
            components: 3,
            learning_rate: 0.01,
            background_threshold: 0.7,
            match_distance: 2.5,
            initial_variance: 0.05 * 0.05,
            min_variance: 0.01 * 0.01,
        }
    }
}

impl GmmConfig {
    pub fn validate(&self) -> Result<()> {
        let frac = |v: f64| v > 0.0 && v < 1.0;
        if self.components < 2 {
            return Err(Error::invalid("GMM needs at least 2 components"));
        }
        if !frac(self.learning_rate) {
            return Err(Error::invalid(format!(
                "learning_rate must lie in (0, 1), got {}",
                self.learning_rate
            )));
        }
        if !frac(self.background_threshold) {
            return Err(Error::invalid(format!(
                "background_threshold must lie in (0, 1), got {}",
                self.background_threshold
            )));
        }
        if !(self.match_distance > 0.0 && self.match_distance.is_finite()) {
            return Err(Error::invalid("match_distance must be positive"));
        }
        if !(self.initial_variance > 0.0 && self.min_variance > 0.0)
            || self.min_variance > self.initial_variance
        {
            return Err(Error::invalid(
                "variances must be positive with min_variance <= initial_variance",
            ));
        }
        Ok(())
    }
}

/// Per-pixel foreground flags for one frame.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ForegroundMask {
    width: usize,
    height: usize,
    mask: Vec<bool>,
}

impl ForegroundMask {
    pub fn new(width: usize, height: usize, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != width * height {
            return Err(Error::LengthMismatch {
                expected: width * height,
                actual: mask.len(),
            });
        }
        Ok(ForegroundMask {
            width,
            height,
            mask,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn as_slice(&self) -> &[bool] {
        &self.mask
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }
}

/// Mixture state for every pixel, stored component-minor.
struct MixtureModel {
    k: usize,
    weight: Vec<f64>,
    mean: Vec<f64>,
    var: Vec<f64>,
}

impl MixtureModel {
    fn init(first: &[f64], cfg: &GmmConfig) -> Self {
        let k = cfg.components;
        let n = first.len();
        let mut m = MixtureModel {
            k,
            weight: vec![0.0; n * k],
            mean: vec![0.0; n * k],
            var: vec![cfg.initial_variance; n * k],
        };
        for (p, &x) in first.iter().enumerate() {
            m.weight[p * k] = 1.0;
            m.mean[p * k] = x;
        }
        m
    }

    /// Classify `x` at pixel `p`, then update that pixel's mixture.
    fn observe(&mut self, p: usize, x: f64, cfg: &GmmConfig, order: &mut Vec<usize>) -> bool {
        let k = self.k;
        let base = p * k;
        let w = &mut self.weight[base..base + k];
        let mu = &mut self.mean[base..base + k];
        let var = &mut self.var[base..base + k];

        order.clear();
        order.extend((0..k).filter(|&j| w[j] > 0.0));
        // stable sort keeps lower indices first on ties
        order.sort_by(|&a, &b| {
            let ra = w[a] / var[a].sqrt();
            let rb = w[b] / var[b].sqrt();
            rb.partial_cmp(&ra).unwrap_or(std::cmp::Ordering::Equal)
        });
        let mut background_modes = 0;
        let mut acc = 0.0;
        for &j in order.iter() {
            background_modes += 1;
            acc += w[j];
            if acc >= cfg.background_threshold {
                break;
            }
        }
        let matched = order
            .iter()
            .position(|&j| (x - mu[j]).abs() <= cfg.match_distance * var[j].sqrt());
        let foreground = matched.is_none_or(|rank| rank >= background_modes);

        let alpha = cfg.learning_rate;
        match matched.map(|rank| order[rank]) {
            Some(j) => {
                for (i, wi) in w.iter_mut().enumerate() {
                    *wi = (1.0 - alpha) * *wi + if i == j { alpha } else { 0.0 };
                }
                mu[j] += alpha * (x - mu[j]);
                let d = x - mu[j];
                var[j] = ((1.0 - alpha) * var[j] + alpha * d * d).max(cfg.min_variance);
            }
            None => {
                // replace the weakest mode (an unused one if any)
                let weakest = (0..k)
                    .min_by(|&a, &b| {
                        let ra = w[a] / var[a].sqrt();
                        let rb = w[b] / var[b].sqrt();
                        ra.partial_cmp(&rb).unwrap_or(std::cmp::Ordering::Equal)
                    })
                    .expect("k >= 2");
                for wi in w.iter_mut() {
                    *wi *= 1.0 - alpha;
                }
                w[weakest] = alpha;
                mu[weakest] = x;
                var[weakest] = cfg.initial_variance;
            }
        }
        let total: f64 = w.iter().sum();
        for wi in w.iter_mut() {
            *wi /= total;
        }
        foreground
    }
}

/// Foreground masks for every frame. Frame 0 seeds the model and gets an
/// empty mask; missing depth is never foreground and leaves the model as is.
pub fn gmm_foreground(
    sequence: &DepthSequence,
    bounds: &DepthBounds,
    config: &GmmConfig,
) -> Result<Vec<ForegroundMask>> {
    config.validate()?;
    let (w, h) = (sequence.width(), sequence.height());
    let frames = sequence.frames();
    let normalized: Vec<f64> = frames[0].data().iter().map(|&v| bounds.normalize(v)).collect();
    let mut model = MixtureModel::init(&normalized, config);
    let mut masks = Vec::with_capacity(frames.len());
    masks.push(ForegroundMask::new(w, h, vec![false; w * h])?);

    let mut order = Vec::with_capacity(config.components);
    for frame in &frames[1..] {
        let mask = frame
            .data()
            .iter()
            .enumerate()
            .map(|(p, &v)| v != 0 && model.observe(p, bounds.normalize(v), config, &mut order))
            .collect();
        masks.push(ForegroundMask::new(w, h, mask)?);
    }
    Ok(masks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::depth_io::DepthFrame;

    fn bounds() -> DepthBounds {
        DepthBounds::new(1000.0, 3000.0).unwrap()
    }

    #[test]
    fn static_scene_has_no_foreground() {
        let f = DepthFrame::new(4, 3, (0..12).map(|i| 1500 + 100 * i).collect()).unwrap();
        let seq = DepthSequence::new("s", None, vec![f; 30]).unwrap();
        let masks = gmm_foreground(&seq, &bounds(), &GmmConfig::default()).unwrap();
        assert_eq!(masks.len(), 30);
        assert!(masks.iter().all(ForegroundMask::is_empty));
    }

    #[test]
    fn sudden_near_object_is_foreground() {
        let wall = DepthFrame::filled(3, 3, 3000).unwrap();
        let mut data = vec![3000; 9];
        data[4] = 1200;
        let hand = DepthFrame::new(3, 3, data).unwrap();
        let seq = DepthSequence::new("s", None, vec![wall.clone(), wall, hand.clone(), hand]).unwrap();
        let masks = gmm_foreground(&seq, &bounds(), &GmmConfig::default()).unwrap();
        assert!(masks[1].is_empty());
        for m in &masks[2..] {
            assert_eq!(m.count(), 1);
            assert!(m.as_slice()[4]);
        }
    }

    #[test]
    fn missing_depth_is_never_foreground() {
        let wall = DepthFrame::filled(3, 3, 3000).unwrap();
        let holes = DepthFrame::filled(3, 3, 0).unwrap();
        let seq = DepthSequence::new("s", None, vec![wall, holes]).unwrap();
        let masks = gmm_foreground(&seq, &bounds(), &GmmConfig::default()).unwrap();
        assert!(masks[1].is_empty());
    }

    #[test]
    fn config_validation() {
        assert!(GmmConfig { components: 1, ..Default::default() }.validate().is_err());
        assert!(GmmConfig { learning_rate: 1.0, ..Default::default() }.validate().is_err());
        assert!(GmmConfig { min_variance: 1.0, ..Default::default() }.validate().is_err());
        assert!(GmmConfig::default().validate().is_ok());
    }
}
