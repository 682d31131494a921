//! Dynamic depth images: compact image encodings of depth-map gesture clips
//! built by bidirectional rank pooling, plus multiplicative score fusion and
//! recognition-rate evaluation.
//!
//! Pipeline for one clip:
//!
//! 1. [`depth_io`] loads 16-bit depth frames and maps them onto `[0, 1]`.
//! 2. [`preprocessing`] estimates surface normals, strips the far background
//!    (DDNI) or keeps only moving foreground (DDMNI).
//! 3. [`rank_pooling`] pools per-frame features forward and backward in time
//!    and quantizes each pooled vector into an 8-bit image.
//! 4. [`representations`] wires the above into the six images of a clip.
//! 5. [`fusion_eval`] fuses per-image class scores and measures accuracy.

pub mod depth_io;
pub mod error;
pub mod fusion_eval;
pub mod preprocessing;
pub mod rank_pooling;
pub mod representations;

pub use error::{Error, Result};
