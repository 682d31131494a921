use std::path::Path;

use image::RgbImage;

use super::{Direction, DynamicImage, ImageKind};
use crate::error::{Error, Result};

pub fn image_file_name(sequence_id: &str, kind: ImageKind, direction: Direction) -> String {
    format!("{sequence_id}_{kind}_{direction}.png")
}

/// Parse `<sequence_id>_<kind>_<direction>.png`.
pub(crate) fn parse_image_file_name(name: &str) -> Option<(String, ImageKind, Direction)> {
    let stem = name.strip_suffix(".png")?;
    let mut parts = stem.rsplitn(3, '_');
    let direction = parts.next()?.parse().ok()?;
    let kind = parts.next()?.parse().ok()?;
    let id = parts.next()?.to_string();
    Some((id, kind, direction))
}

pub fn save_image(image: &DynamicImage, path: &Path) -> Result<()> {
    let (w, h) = (image.width(), image.height());
    let mut raw = Vec::with_capacity(w * h * 3);
    for i in 0..w * h {
        for c in image.channels() {
            raw.push(c[i]);
        }
    }
    let buf = RgbImage::from_raw(w as u32, h as u32, raw).expect("image buffer sized by construction");
    buf.save_with_format(path, image::ImageFormat::Png)
        .map_err(|e| match e {
            image::ImageError::IoError(io) => Error::io(path, io),
            other => Error::Format {
                path: path.to_path_buf(),
                reason: other.to_string(),
            },
        })
}

/// Read an 8-bit RGB PNG. Kind and direction come from the file name suffix.
pub fn load_image(path: &Path) -> Result<DynamicImage> {
    let format_err = |reason: String| Error::Format {
        path: path.to_path_buf(),
        reason,
    };
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
    let (_, kind, direction) = parse_image_file_name(name)
        .ok_or_else(|| format_err("file name lacks _<kind>_<direction>.png suffix".into()))?;

    let reader = image::ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    if reader.format() != Some(image::ImageFormat::Png) {
        return Err(format_err("not a PNG file".into()));
    }
    let rgb = match reader.decode().map_err(|e| format_err(e.to_string()))? {
        image::DynamicImage::ImageRgb8(buf) => buf,
        other => {
            return Err(format_err(format!(
                "expected 8-bit RGB, got {:?}",
                other.color()
            )))
        }
    };
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    let mut channels: [Vec<u8>; 3] = Default::default();
    for c in &mut channels {
        c.reserve(w * h);
    }
    for px in rgb.pixels() {
        for (c, v) in channels.iter_mut().zip(px.0) {
            c.push(v);
        }
    }
    DynamicImage::new(w, h, channels, kind, direction)
}
