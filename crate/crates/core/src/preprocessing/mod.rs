//! Per-frame preprocessing: surface normals, last-peak background removal and
//! Gaussian-mixture moving-foreground detection.

mod background;
mod gmm;
mod normals;

use std::path::Path;

use image::{GrayImage, RgbImage};

use crate::error::{Error, Result};

pub use background::{
    apply_depth_threshold, depth_histogram, last_peak, remove_background, BackgroundRemoval,
    HistogramConfig,
};
pub use gmm::{gmm_foreground, ForegroundMask, GmmConfig};
pub use normals::{compute_normals, normals_from_plane, NormalImage};

fn write_png(result: image::ImageResult<()>, path: &Path) -> Result<()> {
    result.map_err(|e| match e {
        image::ImageError::IoError(io) => Error::io(path, io),
        other => Error::Format {
            path: path.to_path_buf(),
            reason: other.to_string(),
        },
    })
}

/// Debug dump of a mask: 255 for foreground, 0 elsewhere.
pub fn save_mask_png(mask: &ForegroundMask, path: &Path) -> Result<()> {
    let raw = mask.as_slice().iter().map(|&m| if m { 255 } else { 0 }).collect();
    let img = GrayImage::from_raw(mask.width() as u32, mask.height() as u32, raw)
        .expect("mask sized by construction");
    write_png(img.save_with_format(path, image::ImageFormat::Png), path)
}

/// Debug dump of normals with each component mapped from [-1, 1] to [0, 255].
pub fn save_normals_png(normals: &NormalImage, path: &Path) -> Result<()> {
    let to_u8 = |v: f64| ((v + 1.0) * 127.5).round().clamp(0.0, 255.0) as u8;
    let n = normals.nx().len();
    let mut raw = Vec::with_capacity(3 * n);
    for i in 0..n {
        raw.extend([to_u8(normals.nx()[i]), to_u8(normals.ny()[i]), to_u8(normals.nz()[i])]);
    }
    let img = RgbImage::from_raw(normals.width() as u32, normals.height() as u32, raw)
        .expect("normal image sized by construction");
    write_png(img.save_with_format(path, image::ImageFormat::Png), path)
}
