//! Depth sequences, dynamic images and their on-disk formats.
//!
//! Frames are stored as `frame_%06d.png` (16-bit single channel, millimetres,
//! 0 = no reading). Dynamic images are stored as 8-bit RGB PNGs named
//! `<sequence_id>_<kind>_<direction>.png`.

mod frames;
mod image_file;
mod manifest;
pub mod synth;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use frames::{frame_file_name, load_sequence, write_sequence};
pub use image_file::{image_file_name, load_image, save_image};
pub use manifest::{Manifest, ManifestEntry};
pub use synth::{synth_sequence, Archetype, SynthSpec};

/// A single depth map in millimetres. Zero marks a missing reading.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DepthFrame {
    width: usize,
    height: usize,
    data: Vec<u16>,
}

impl DepthFrame {
    pub fn new(width: usize, height: usize, data: Vec<u16>) -> Result<Self> {
        if width < 2 || height < 2 {
            return Err(Error::invalid(format!(
                "frame must be at least 2x2, got {width}x{height}"
            )));
        }
        if data.len() != width * height {
            return Err(Error::LengthMismatch {
                expected: width * height,
                actual: data.len(),
            });
        }
        Ok(DepthFrame {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, depth: u16) -> Result<Self> {
        DepthFrame::new(width, height, vec![depth; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[u16] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u16 {
        self.data[y * self.width + x]
    }

    /// Copy of this frame with every pixel where `keep` is false set to 0.
    pub fn masked(&self, keep: &[bool]) -> DepthFrame {
        debug_assert_eq!(keep.len(), self.data.len());
        let data = self
            .data
            .iter()
            .zip(keep)
            .map(|(&v, &k)| if k { v } else { 0 })
            .collect();
        DepthFrame {
            width: self.width,
            height: self.height,
            data,
        }
    }
}

/// An ordered clip of equally sized depth frames.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DepthSequence {
    id: String,
    label: Option<usize>,
    frames: Vec<DepthFrame>,
}

impl DepthSequence {
    pub fn new(id: impl Into<String>, label: Option<usize>, frames: Vec<DepthFrame>) -> Result<Self> {
        let id = id.into();
        if frames.len() < 2 {
            return Err(Error::invalid(format!(
                "sequence too short: {id} has {} frame(s), need at least 2",
                frames.len()
            )));
        }
        let (w, h) = (frames[0].width, frames[0].height);
        if let Some(bad) = frames.iter().find(|f| f.width != w || f.height != h) {
            return Err(Error::invalid(format!(
                "dimension mismatch in {id}: expected {w}x{h}, got {}x{}",
                bad.width, bad.height
            )));
        }
        Ok(DepthSequence { id, label, frames })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn label(&self) -> Option<usize> {
        self.label
    }

    pub fn frames(&self) -> &[DepthFrame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn width(&self) -> usize {
        self.frames[0].width
    }

    pub fn height(&self) -> usize {
        self.frames[0].height
    }

    /// Same clip with the frame order reversed.
    pub fn reversed(&self) -> DepthSequence {
        DepthSequence {
            id: self.id.clone(),
            label: self.label,
            frames: self.frames.iter().rev().cloned().collect(),
        }
    }

    /// Replace the frames, keeping id and label. Dimensions must match.
    pub fn with_frames(&self, frames: Vec<DepthFrame>) -> Result<DepthSequence> {
        DepthSequence::new(self.id.clone(), self.label, frames)
    }
}

/// Depth range used to map millimetres onto `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthBounds {
    pub min_mm: f64,
    pub max_mm: f64,
}

impl DepthBounds {
    pub fn new(min_mm: f64, max_mm: f64) -> Result<Self> {
        if !(min_mm.is_finite() && max_mm.is_finite()) || min_mm >= max_mm {
            return Err(Error::invalid(format!(
                "depth bounds require d_min < d_max, got ({min_mm}, {max_mm})"
            )));
        }
        Ok(DepthBounds { min_mm, max_mm })
    }

    /// (smallest nonzero depth, largest depth) over the whole sequence.
    ///
    /// A degenerate range (single depth value, or no valid depth at all) is
    /// widened to `[max - 1, max]` so every valid pixel normalizes to 1.
    pub fn of_sequence(sequence: &DepthSequence) -> DepthBounds {
        let mut lo = u16::MAX;
        let mut hi = 0u16;
        for &v in sequence.frames.iter().flat_map(|f| f.data.iter()) {
            if v != 0 {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        if hi == 0 {
            return DepthBounds {
                min_mm: 0.0,
                max_mm: 1.0,
            };
        }
        let (lo, hi) = (lo as f64, hi as f64);
        if lo < hi {
            DepthBounds {
                min_mm: lo,
                max_mm: hi,
            }
        } else {
            DepthBounds {
                min_mm: hi - 1.0,
                max_mm: hi,
            }
        }
    }

    pub fn normalize(&self, v: u16) -> f64 {
        if v == 0 {
            return 0.0;
        }
        ((v as f64 - self.min_mm) / (self.max_mm - self.min_mm)).clamp(0.0, 1.0)
    }
}

/// Row-major plane of real values.
#[derive(Clone, Debug, PartialEq)]
pub struct Plane {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

impl Plane {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != width * height {
            return Err(Error::LengthMismatch {
                expected: width * height,
                actual: data.len(),
            });
        }
        Ok(Plane {
            width,
            height,
            data,
        })
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> f64) -> Plane {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Plane {
            width,
            height,
            data,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    pub fn transpose(&self) -> Plane {
        Plane::from_fn(self.height, self.width, |x, y| self.get(y, x))
    }
}

/// Map a frame onto `[0, 1]`: `clamp((v - d_min) / (d_max - d_min), 0, 1)`,
/// with missing depth (0) mapped to 0.
pub fn normalize_depth(frame: &DepthFrame, bounds: &DepthBounds) -> Plane {
    Plane {
        width: frame.width,
        height: frame.height,
        data: frame.data.iter().map(|&v| bounds.normalize(v)).collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImageKind {
    Ddi,
    Ddni,
    Ddmni,
}

impl ImageKind {
    pub const ALL: [ImageKind; 3] = [ImageKind::Ddi, ImageKind::Ddni, ImageKind::Ddmni];

    pub fn as_str(self) -> &'static str {
        match self {
            ImageKind::Ddi => "ddi",
            ImageKind::Ddni => "ddni",
            ImageKind::Ddmni => "ddmni",
        }
    }
}

impl fmt::Display for ImageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ImageKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ddi" => Ok(ImageKind::Ddi),
            "ddni" => Ok(ImageKind::Ddni),
            "ddmni" => Ok(ImageKind::Ddmni),
            other => Err(Error::invalid(format!("unknown image kind {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::Forward, Direction::Backward];

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "forward" | "fwd" => Ok(Direction::Forward),
            "backward" | "bwd" => Ok(Direction::Backward),
            other => Err(Error::invalid(format!("unknown direction {other:?}"))),
        }
    }
}

/// A rank-pooled sequence rendered as a 3-channel 8-bit image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DynamicImage {
    width: usize,
    height: usize,
    channels: [Vec<u8>; 3],
    kind: ImageKind,
    direction: Direction,
}

impl DynamicImage {
    pub fn new(
        width: usize,
        height: usize,
        channels: [Vec<u8>; 3],
        kind: ImageKind,
        direction: Direction,
    ) -> Result<Self> {
        for c in &channels {
            if c.len() != width * height {
                return Err(Error::LengthMismatch {
                    expected: width * height,
                    actual: c.len(),
                });
            }
        }
        Ok(DynamicImage {
            width,
            height,
            channels,
            kind,
            direction,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> &[Vec<u8>; 3] {
        &self.channels
    }

    pub fn channel(&self, c: usize) -> &[u8] {
        &self.channels[c]
    }

    pub fn kind(&self) -> ImageKind {
        self.kind
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn with_tag(mut self, kind: ImageKind, direction: Direction) -> Self {
        self.kind = kind;
        self.direction = direction;
        self
    }

    /// True when every channel holds a single value.
    pub fn is_uniform(&self, value: u8) -> bool {
        self.channels.iter().all(|c| c.iter().all(|&v| v == value))
    }

    /// Whether the pixel data (ignoring the kind/direction tag) is equal.
    pub fn same_pixels(&self, other: &DynamicImage) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }
}
