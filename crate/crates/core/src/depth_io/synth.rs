//! Synthetic gesture clips: a near disc ("hand") moving over a far flat wall.
//!
//! Every clip is a pure function of its [`SynthSpec`]; randomness (small
//! trajectory jitter and sensor noise) comes from a ChaCha stream seeded with
//! `spec.seed`.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{DepthFrame, DepthSequence};
use crate::error::{Error, Result};

/// Depth of the background wall.
pub const PLANE_DEPTH_MM: u16 = 3000;
/// Depth of the moving blob.
pub const BLOB_DEPTH_MM: u16 = 1200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Archetype {
    SwipeRight,
    SwipeLeft,
    SwipeUp,
    SwipeDown,
    Circle,
    Static,
}

impl Archetype {
    /// The five moving gestures, in class-index order.
    pub const GESTURES: [Archetype; 5] = [
        Archetype::SwipeRight,
        Archetype::SwipeLeft,
        Archetype::SwipeUp,
        Archetype::SwipeDown,
        Archetype::Circle,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Archetype::SwipeRight => "swipe-right",
            Archetype::SwipeLeft => "swipe-left",
            Archetype::SwipeUp => "swipe-up",
            Archetype::SwipeDown => "swipe-down",
            Archetype::Circle => "circle",
            Archetype::Static => "static",
        }
    }
}

impl fmt::Display for Archetype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Archetype {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Archetype::Static]
            .into_iter()
            .chain(Archetype::GESTURES)
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown archetype {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub archetype: Archetype,
    pub frames: usize,
    pub width: usize,
    pub height: usize,
    /// Standard deviation of additive depth noise, millimetres.
    pub noise_level: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn new(archetype: Archetype, frames: usize, width: usize, height: usize, seed: u64) -> Self {
        SynthSpec {
            archetype,
            frames,
            width,
            height,
            noise_level: 0.0,
            seed,
        }
    }

    pub fn with_noise(mut self, noise_level: f64) -> Self {
        self.noise_level = noise_level;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.frames < 2 {
            return Err(Error::invalid("synthetic sequence needs at least 2 frames"));
        }
        if self.width < 2 || self.height < 2 {
            return Err(Error::invalid("synthetic frames must be at least 2x2"));
        }
        if !(self.noise_level.is_finite() && self.noise_level >= 0.0) {
            return Err(Error::invalid("noise_level must be finite and nonnegative"));
        }
        Ok(())
    }
}

/// Scene parameters shared by every frame of a rendered clip.
#[derive(Clone, Debug, PartialEq)]
pub struct BlobScene {
    pub width: usize,
    pub height: usize,
    pub plane_depth: u16,
    pub blob_depth: u16,
    /// Disc radius in pixels.
    pub radius: f64,
    pub noise_level: f64,
}

/// A rendered clip plus the per-frame ground-truth blob membership.
#[derive(Clone, Debug)]
pub struct SynthClip {
    pub sequence: DepthSequence,
    pub blob_masks: Vec<Vec<bool>>,
}

/// Render a disc at each pixel-space centre in `centers`, one frame each.
pub fn render_blob_sequence(
    id: impl Into<String>,
    scene: &BlobScene,
    centers: &[(f64, f64)],
    rng: &mut impl Rng,
) -> Result<SynthClip> {
    if scene.blob_depth >= scene.plane_depth || scene.blob_depth == 0 {
        return Err(Error::invalid("blob must be strictly nearer than the plane"));
    }
    let noise = if scene.noise_level > 0.0 {
        Some(Normal::new(0.0, scene.noise_level).map_err(|e| Error::invalid(e.to_string()))?)
    } else {
        None
    };
    let (w, h) = (scene.width, scene.height);
    let r2 = scene.radius * scene.radius;
    let mut frames = Vec::with_capacity(centers.len());
    let mut blob_masks = Vec::with_capacity(centers.len());
    for &(cx, cy) in centers {
        let mut data = Vec::with_capacity(w * h);
        let mut mask = Vec::with_capacity(w * h);
        for y in 0..h {
            for x in 0..w {
                let (dx, dy) = (x as f64 - cx, y as f64 - cy);
                let inside = dx * dx + dy * dy <= r2;
                let base = if inside { scene.blob_depth } else { scene.plane_depth } as f64;
                let v = match &noise {
                    Some(n) => (base + n.sample(rng)).round().clamp(1.0, u16::MAX as f64),
                    None => base,
                };
                data.push(v as u16);
                mask.push(inside);
            }
        }
        frames.push(DepthFrame::new(w, h, data)?);
        blob_masks.push(mask);
    }
    Ok(SynthClip {
        sequence: DepthSequence::new(id, None, frames)?,
        blob_masks,
    })
}

/// Deterministic synthetic clip for `spec`.
pub fn synth_sequence(spec: &SynthSpec) -> Result<DepthSequence> {
    synth_clip(spec).map(|c| c.sequence)
}

/// Like [`synth_sequence`], also returning ground-truth blob masks.
pub fn synth_clip(spec: &SynthSpec) -> Result<SynthClip> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (w, h) = (spec.width as f64, spec.height as f64);
    let radius = w.min(h) * rng.random_range(0.10..0.13);
    let start_jitter = rng.random_range(-0.04..0.04);
    let end_jitter = rng.random_range(-0.04..0.04);
    let offset = rng.random_range(-0.06..0.06);
    let phase = rng.random_range(-0.3..0.3);

    let n = spec.frames;
    let centers: Vec<(f64, f64)> = (0..n)
        .map(|t| {
            let s = t as f64 / (n - 1) as f64;
            let sweep = |from: f64, to: f64| {
                let (a, b) = (from + start_jitter, to + end_jitter);
                a + (b - a) * s
            };
            let (u, v) = match spec.archetype {
                Archetype::SwipeRight => (sweep(0.2, 0.8), 0.5 + offset),
                Archetype::SwipeLeft => (sweep(0.8, 0.2), 0.5 + offset),
                Archetype::SwipeUp => (0.5 + offset, sweep(0.8, 0.2)),
                Archetype::SwipeDown => (0.5 + offset, sweep(0.2, 0.8)),
                Archetype::Circle => {
                    // counter-clockwise on screen (image y grows downward)
                    let theta = phase + TAU * s;
                    (0.5 + offset + 0.25 * theta.cos(), 0.5 - 0.25 * theta.sin())
                }
                Archetype::Static => (0.5 + offset, 0.5 + start_jitter),
            };
            (u * w, v * h)
        })
        .collect();

    let scene = BlobScene {
        width: spec.width,
        height: spec.height,
        plane_depth: PLANE_DEPTH_MM,
        blob_depth: BLOB_DEPTH_MM,
        radius,
        noise_level: spec.noise_level,
    };
    let id = format!("{}_{}", spec.archetype, spec.seed);
    render_blob_sequence(id, &scene, &centers, &mut rng)
}
