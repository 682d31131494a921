use crate::depth_io::{normalize_depth, DepthBounds, DepthFrame, Plane};
use crate::error::{Error, Result};

/// Per-pixel unit surface normals `(n_x, n_y, n_z)` of a depth map.
///
/// Masked pixels hold `(0, 0, 0)`; valid ones are unit length with
/// `n_z > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalImage {
    width: usize,
    height: usize,
    nx: Vec<f64>,
    ny: Vec<f64>,
    nz: Vec<f64>,
    valid: Vec<bool>,
}

impl NormalImage {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn nx(&self) -> &[f64] {
        &self.nx
    }

    pub fn ny(&self) -> &[f64] {
        &self.ny
    }

    pub fn nz(&self) -> &[f64] {
        &self.nz
    }

    pub fn valid(&self) -> &[bool] {
        &self.valid
    }

    pub fn normal(&self, x: usize, y: usize) -> Option<[f64; 3]> {
        let i = y * self.width + x;
        self.valid[i].then(|| [self.nx[i], self.ny[i], self.nz[i]])
    }

    /// The three planes concatenated plane-major: all `n_x`, then `n_y`,
    /// then `n_z`.
    pub fn to_feature_values(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(3 * self.nx.len());
        v.extend_from_slice(&self.nx);
        v.extend_from_slice(&self.ny);
        v.extend_from_slice(&self.nz);
        v
    }
}

/// Normals of a raw depth frame, normalized with `bounds` first. Pixels with
/// a missing reading anywhere in their 3x3 neighbourhood are masked.
pub fn compute_normals(frame: &DepthFrame, bounds: &DepthBounds) -> Result<NormalImage> {
    let plane = normalize_depth(frame, bounds);
    let valid: Vec<bool> = frame.data().iter().map(|&v| v != 0).collect();
    normals_from_plane(&plane, &valid)
}

/// Normals of a real-valued height plane.
///
/// Gradients use central differences (one-sided on the border); the normal
/// is `(-g_x, -g_y, 1)` scaled to unit length.
pub fn normals_from_plane(plane: &Plane, valid: &[bool]) -> Result<NormalImage> {
    let (w, h) = (plane.width(), plane.height());
    if w < 3 || h < 3 {
        return Err(Error::invalid(format!(
            "normals need frames of at least 3x3, got {w}x{h}"
        )));
    }
    if valid.len() != w * h {
        return Err(Error::LengthMismatch {
            expected: w * h,
            actual: valid.len(),
        });
    }
    let z = plane.data();
    let n = w * h;
    let mut out = NormalImage {
        width: w,
        height: h,
        nx: vec![0.0; n],
        ny: vec![0.0; n],
        nz: vec![0.0; n],
        valid: vec![false; n],
    };
    for y in 0..h {
        let (y0, y1) = (y.saturating_sub(1), (y + 1).min(h - 1));
        for x in 0..w {
            let (x0, x1) = (x.saturating_sub(1), (x + 1).min(w - 1));
            let neighbourhood_ok = (y0..=y1).all(|yy| (x0..=x1).all(|xx| valid[yy * w + xx]));
            if !neighbourhood_ok {
                continue;
            }
            let gx = (z[y * w + x1] - z[y * w + x0]) / (x1 - x0) as f64;
            let gy = (z[y1 * w + x] - z[y0 * w + x]) / (y1 - y0) as f64;
            let norm = (gx * gx + gy * gy + 1.0).sqrt();
            let i = y * w + x;
            out.nx[i] = -gx / norm;
            out.ny[i] = -gy / norm;
            out.nz[i] = 1.0 / norm;
            out.valid[i] = true;
        }
    }
    Ok(out)
}
