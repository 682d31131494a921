#![allow(dead_code)]

use dynapool::rank_pooling::{FeatureVector, PrefixMeans};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Rank-pooling energy written out independently of the library.
pub fn energy(d: &[f64], means: &[Vec<f64>], lambda: f64) -> f64 {
    let t_len = means.len();
    let scores: Vec<f64> = means
        .iter()
        .map(|v| v.iter().zip(d).map(|(a, b)| a * b).sum())
        .collect();
    let mut hinge = 0.0;
    for q in 0..t_len {
        for t in 0..q {
            let s: f64 = 1.0 - scores[q] + scores[t];
            hinge += s.max(0.0);
        }
    }
    let norm2: f64 = d.iter().map(|x| x * x).sum();
    0.5 * lambda * norm2 + 2.0 / (t_len as f64 * (t_len as f64 - 1.0)) * hinge
}

/// Minimum of [`energy`] over the grid `{-5, -5 + step, ..., 5}^dim`.
///
/// Grid points with `λ/2 ‖g‖² > E(0) = 1` cannot beat the origin (itself a
/// grid point), so each axis range is clipped to the ball `‖g‖² ≤ 2/λ`.
/// The result is the exact grid minimum over the full box.
pub fn grid_min(means: &[Vec<f64>], lambda: f64, step: f64) -> (f64, Vec<f64>) {
    let dim = means[0].len();
    let n = (10.0 / step).round() as i64;
    let coord = |i: i64| -5.0 + i as f64 * step;
    let radius2 = 2.0 / lambda + 1e-9;
    let mut best = (energy(&vec![0.0; dim], means, lambda), vec![0.0; dim]);
    let mut g = vec![0.0; dim];
    #[allow(clippy::too_many_arguments)]
    fn rec(
        axis: usize,
        used: f64,
        g: &mut Vec<f64>,
        n: i64,
        coord: &dyn Fn(i64) -> f64,
        radius2: f64,
        means: &[Vec<f64>],
        lambda: f64,
        best: &mut (f64, Vec<f64>),
    ) {
        if axis == g.len() {
            let e = energy(g, means, lambda);
            if e < best.0 {
                *best = (e, g.clone());
            }
            return;
        }
        for i in 0..=n {
            let x = coord(i);
            let u = used + x * x;
            if u > radius2 {
                continue;
            }
            g[axis] = x;
            rec(axis + 1, u, g, n, coord, radius2, means, lambda, best);
        }
    }
    rec(0, 0.0, &mut g, n, &coord, radius2, means, lambda, &mut best);
    best
}

pub fn random_features(rng: &mut ChaCha8Rng, t_len: usize, dim: usize) -> Vec<FeatureVector> {
    (0..t_len)
        .map(|_| FeatureVector::new((0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap())
        .collect()
}

pub fn direct_means(features: &[FeatureVector]) -> Vec<Vec<f64>> {
    let dim = features[0].dim();
    (1..=features.len())
        .map(|t| {
            let mut v = vec![0.0; dim];
            for f in &features[..t] {
                for (a, b) in v.iter_mut().zip(f.values()) {
                    *a += b;
                }
            }
            v.iter().map(|x| x / t as f64).collect()
        })
        .collect()
}

pub fn as_means(means: Vec<Vec<f64>>) -> PrefixMeans {
    PrefixMeans::from_means(means).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

use dynapool::depth_io::synth::{render_blob_sequence, BlobScene, SynthClip};
use dynapool::depth_io::DepthBounds;

/// 64x64 clip: a radius-5 disc at 1200 mm sweeping left to right over a
/// 3000 mm wall in 16 frames, 10 mm sensor noise.
pub fn moving_blob_fixture() -> SynthClip {
    let scene = BlobScene {
        width: 64,
        height: 64,
        plane_depth: 3000,
        blob_depth: 1200,
        radius: 5.0,
        noise_level: 10.0,
    };
    let t_len = 16;
    let centers: Vec<_> = (0..t_len)
        .map(|t| (10.0 + 44.0 * t as f64 / (t_len - 1) as f64, 32.0))
        .collect();
    render_blob_sequence("moving", &scene, &centers, &mut rng(3)).unwrap()
}

/// Disc moves for 10 frames, then stays put for 60.
pub fn stopping_blob_fixture() -> (SynthClip, usize) {
    let scene = BlobScene {
        width: 48,
        height: 48,
        plane_depth: 3000,
        blob_depth: 1200,
        radius: 5.0,
        noise_level: 5.0,
    };
    let stop = 10;
    let centers: Vec<_> = (0..stop + 60)
        .map(|t| (8.0 + 3.0 * t.min(stop) as f64, 24.0))
        .collect();
    (render_blob_sequence("stop", &scene, &centers, &mut rng(4)).unwrap(), stop)
}

/// Disc at normalized depth 0.3 over a plane at 0.9, using fixed bounds
/// `[0, 1000]` mm.
pub fn two_mode_fixture() -> (SynthClip, DepthBounds) {
    let scene = BlobScene {
        width: 40,
        height: 32,
        plane_depth: 900,
        blob_depth: 300,
        radius: 6.0,
        noise_level: 0.0,
    };
    let centers: Vec<_> = (0..8).map(|t| (10.0 + 3.0 * t as f64, 16.0)).collect();
    let clip = render_blob_sequence("two_mode", &scene, &centers, &mut rng(1)).unwrap();
    (clip, DepthBounds::new(0.0, 1000.0).unwrap())
}

/// Union of the per-frame masks, grown by `radius` pixels (square).
pub fn dilated_union(masks: &[Vec<bool>], width: usize, height: usize, radius: usize) -> Vec<bool> {
    let mut union = vec![false; width * height];
    for m in masks {
        for (u, &v) in union.iter_mut().zip(m) {
            *u |= v;
        }
    }
    let mut out = vec![false; width * height];
    for y in 0..height {
        for x in 0..width {
            if !union[y * width + x] {
                continue;
            }
            for yy in y.saturating_sub(radius)..=(y + radius).min(height - 1) {
                for xx in x.saturating_sub(radius)..=(x + radius).min(width - 1) {
                    out[yy * width + xx] = true;
                }
            }
        }
    }
    out
}

/// Pixels where any channel differs from that channel's most common value.
pub fn active_pixels(image: &dynapool::depth_io::DynamicImage) -> Vec<bool> {
    let mut active = vec![false; image.width() * image.height()];
    for c in image.channels() {
        let mut hist = [0usize; 256];
        c.iter().for_each(|&v| hist[v as usize] += 1);
        let mode = (0..256).max_by_key(|&v| (hist[v], std::cmp::Reverse(v))).unwrap() as u8;
        for (a, &v) in active.iter_mut().zip(c) {
            *a |= v != mode;
        }
    }
    active
}
