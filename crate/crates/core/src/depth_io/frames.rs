use std::fs;
use std::path::{Path, PathBuf};

use image::{ImageBuffer, Luma};

use super::{DepthFrame, DepthSequence, ManifestEntry};
use crate::error::{Error, Result};

pub fn frame_file_name(index: usize) -> String {
    format!("frame_{index:06}.png")
}

fn frame_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix("frame_")?.strip_suffix(".png")?;
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// Read every `frame_NNNNNN.png` in the entry's directory, ordered by index.
pub fn load_sequence(entry: &ManifestEntry) -> Result<DepthSequence> {
    let dir = &entry.dir;
    if !dir.is_dir() {
        return Err(Error::MissingDirectory(dir.clone()));
    }
    let mut files: Vec<(usize, PathBuf)> = Vec::new();
    for item in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let item = item.map_err(|e| Error::io(dir, e))?;
        let name = item.file_name();
        if let Some(idx) = name.to_str().and_then(frame_index) {
            files.push((idx, item.path()));
        }
    }
    files.sort();
    if files.len() < 2 {
        return Err(Error::SequenceTooShort {
            path: dir.clone(),
            frames: files.len(),
        });
    }

    let mut frames = Vec::with_capacity(files.len());
    let mut dims: Option<(u32, u32)> = None;
    for (_, path) in &files {
        let img = read_depth_png(path)?;
        let (w, h) = img.dimensions();
        match dims {
            None => dims = Some((w, h)),
            Some((ew, eh)) if (ew, eh) != (w, h) => {
                return Err(Error::DimensionMismatch {
                    path: path.clone(),
                    expected_width: ew,
                    expected_height: eh,
                    width: w,
                    height: h,
                })
            }
            Some(_) => {}
        }
        let frame = DepthFrame::new(w as usize, h as usize, img.into_raw()).map_err(|e| {
            Error::Format {
                path: path.clone(),
                reason: e.to_string(),
            }
        })?;
        frames.push(frame);
    }
    DepthSequence::new(entry.id.clone(), entry.label, frames)
}

fn read_depth_png(path: &Path) -> Result<ImageBuffer<Luma<u16>, Vec<u16>>> {
    let reader = image::ImageReader::open(path)
        .map_err(|e| Error::io(path, e))?
        .with_guessed_format()
        .map_err(|e| Error::io(path, e))?;
    if reader.format() != Some(image::ImageFormat::Png) {
        return Err(Error::Format {
            path: path.to_path_buf(),
            reason: "not a PNG file".into(),
        });
    }
    let decoded = reader.decode().map_err(|e| Error::Format {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    match decoded {
        image::DynamicImage::ImageLuma16(buf) => Ok(buf),
        other => Err(Error::Format {
            path: path.to_path_buf(),
            reason: format!("expected 16-bit single-channel depth, got {:?}", other.color()),
        }),
    }
}

/// Write the frames of `sequence` into `dir` (created if needed).
pub fn write_sequence(sequence: &DepthSequence, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (i, frame) in sequence.frames().iter().enumerate() {
        let path = dir.join(frame_file_name(i));
        let buf: ImageBuffer<Luma<u16>, Vec<u16>> = ImageBuffer::from_raw(
            frame.width() as u32,
            frame.height() as u32,
            frame.data().to_vec(),
        )
        .expect("frame buffer sized by construction");
        buf.save_with_format(&path, image::ImageFormat::Png)
            .map_err(|e| match e {
                image::ImageError::IoError(io) => Error::io(&path, io),
                other => Error::Format {
                    path: path.clone(),
                    reason: other.to_string(),
                },
            })?;
    }
    Ok(())
}
