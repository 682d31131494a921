//! Rank pooling: learn a linear scoring vector that orders the running means
//! of a sequence's frame features in time, and use it as the sequence
//! descriptor.
//!
//! The pooled vector minimises
//!
//! ```text
//! E(d) = λ/2 ‖d‖² + 2/(T(T-1)) Σ_{q>t} max(0, 1 - <d, V_q> + <d, V_t>)
//! ```
//!
//! where `V_t` is the mean of the first `t` feature vectors.

use serde::{Deserialize, Serialize};

use crate::depth_io::{Direction, DynamicImage, ImageKind, Plane};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("feature vector has non-finite entries"));
        }
        Ok(FeatureVector(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// Running means `V_1..V_T` of a feature sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct PrefixMeans {
    means: Vec<Vec<f64>>,
}

impl PrefixMeans {
    /// Wrap precomputed means (all of one dimension).
    pub fn from_means(means: Vec<Vec<f64>>) -> Result<Self> {
        let dim = means.first().map_or(0, Vec::len);
        if let Some(bad) = means.iter().find(|m| m.len() != dim) {
            return Err(Error::LengthMismatch {
                expected: dim,
                actual: bad.len(),
            });
        }
        Ok(PrefixMeans { means })
    }

    pub fn means(&self) -> &[Vec<f64>] {
        &self.means
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }

    /// Add `c` to every coordinate of every mean.
    pub fn shifted(&self, c: f64) -> PrefixMeans {
        PrefixMeans {
            means: self
                .means
                .iter()
                .map(|m| m.iter().map(|v| v + c).collect())
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankingParams(Vec<f64>);

impl RankingParams {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("ranking parameters have non-finite entries"));
        }
        Ok(RankingParams(values))
    }

    pub fn zeros(dim: usize) -> Self {
        RankingParams(vec![0.0; dim])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Ranking score `S(t|d) = <d, V_t>`.
    pub fn score(&self, mean: &[f64]) -> f64 {
        dot(&self.0, mean)
    }
}

/// Solver settings for [`rank_pool`]. Step size at iteration `k` is
/// `step_size / (1 + step_decay * k)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoolingConfig {
    pub lambda: f64,
    pub max_iters: usize,
    pub step_size: f64,
    pub step_decay: f64,
}

impl Default for PoolingConfig {
    fn default() -> Self {
        PoolingConfig {
            lambda: 1.0,
            max_iters: 2000,
            step_size: 1.0,
            step_decay: 0.01,
        }
    }
}

impl PoolingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid(format!("lambda must be positive, got {}", self.lambda)));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be at least 1"));
        }
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::invalid(format!(
                "step_size must be positive, got {}",
                self.step_size
            )));
        }
        if !(self.step_decay > 0.0 && self.step_decay <= 1.0) {
            return Err(Error::invalid(format!(
                "step_decay must lie in (0, 1], got {}",
                self.step_decay
            )));
        }
        Ok(())
    }
}

/// Result of a pooling run: the best iterate seen and how the run ended.
#[derive(Clone, Debug, PartialEq)]
pub struct PoolingOutcome {
    pub params: RankingParams,
    pub energy: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Row-major vectorisation of a plane.
pub fn featurize(plane: &Plane) -> Result<FeatureVector> {
    if plane.data().is_empty() {
        return Err(Error::invalid("cannot featurize an empty plane"));
    }
    FeatureVector::new(plane.data().to_vec())
}

/// `V_t = ((t-1) V_{t-1} + φ_t) / t`.
pub fn prefix_means(features: &[FeatureVector]) -> Result<PrefixMeans> {
    let first = features
        .first()
        .ok_or_else(|| Error::invalid("prefix means need at least one feature vector"))?;
    let dim = first.dim();
    let mut means: Vec<Vec<f64>> = Vec::with_capacity(features.len());
    for (i, f) in features.iter().enumerate() {
        if f.dim() != dim {
            return Err(Error::LengthMismatch {
                expected: dim,
                actual: f.dim(),
            });
        }
        let next = match means.last() {
            None => f.values().to_vec(),
            Some(prev) => {
                let t = (i + 1) as f64;
                prev.iter()
                    .zip(f.values())
                    .map(|(&m, &x)| ((t - 1.0) * m + x) / t)
                    .collect()
            }
        };
        means.push(next);
    }
    Ok(PrefixMeans { means })
}

fn pair_weight(t: usize) -> f64 {
    2.0 / (t as f64 * (t as f64 - 1.0))
}

/// Rank-pooling energy `E(d)` evaluated directly from its definition.
pub fn objective(params: &RankingParams, means: &PrefixMeans, lambda: f64) -> Result<f64> {
    let t_len = means.len();
    if t_len < 2 {
        return Err(Error::invalid("objective needs at least two time steps"));
    }
    if params.dim() != means.dim() {
        return Err(Error::LengthMismatch {
            expected: means.dim(),
            actual: params.dim(),
        });
    }
    let scores: Vec<f64> = means.means().iter().map(|v| params.score(v)).collect();
    let mut hinge = 0.0;
    for q in 1..t_len {
        for t in 0..q {
            hinge += (1.0 - scores[q] + scores[t]).max(0.0);
        }
    }
    let norm2 = dot(params.values(), params.values());
    Ok(0.5 * lambda * norm2 + pair_weight(t_len) * hinge)
}

/// Minimise the rank-pooling energy by full-batch subgradient descent from
/// `d = 0`, returning the lowest-energy iterate.
///
/// Every iterate lies in the span of the consecutive mean differences
/// `D_k = V_k - V_{k-1}`, so the iteration runs on coefficients `γ` with
/// `d = Σ γ_k D_k` and the Gram matrix of the `D_k`. Pairwise score
/// differences are then partial sums of `<d, D_k>`, and the cost per
/// iteration is independent of the feature dimension.
pub fn rank_pool(means: &PrefixMeans, config: &PoolingConfig) -> Result<PoolingOutcome> {
    config.validate()?;
    let t_len = means.len();
    if t_len < 2 {
        return Err(Error::invalid("rank pooling needs at least two frames"));
    }
    let dim = means.dim();
    let m = t_len - 1;
    let diffs: Vec<Vec<f64>> = means
        .means()
        .windows(2)
        .map(|w| w[1].iter().zip(&w[0]).map(|(a, b)| a - b).collect())
        .collect();
    let mut gram = vec![0.0; m * m];
    for i in 0..m {
        for j in i..m {
            let g = dot(&diffs[i], &diffs[j]);
            gram[i * m + j] = g;
            gram[j * m + i] = g;
        }
    }

    let lambda = config.lambda;
    let weight = pair_weight(t_len);
    let mut gamma = vec![0.0; m];
    let mut best = gamma.clone();
    let mut best_energy = f64::INFINITY;
    // best energy at the start of the final tenth of the run
    let window_start = config.max_iters - config.max_iters / 10;
    let mut energy_at_window = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    let mut r = vec![0.0; m];
    let mut partial = vec![0.0; t_len];
    let mut active = vec![0.0; m];
    let mut grad = vec![0.0; m];
    for k in 0..=config.max_iters {
        // r_k = <d, D_k>; partial[q] = S(q) - S(0)
        for i in 0..m {
            r[i] = dot(&gram[i * m..(i + 1) * m], &gamma);
        }
        for q in 1..t_len {
            partial[q] = partial[q - 1] + r[q - 1];
        }
        let norm2 = dot(&gamma, &r);
        // active[k] counts violated pairs (q, t) with t < k+1 <= q
        active.iter_mut().for_each(|a| *a = 0.0);
        let mut hinge = 0.0;
        for q in 1..t_len {
            for t in 0..q {
                let slack = 1.0 - (partial[q] - partial[t]);
                if slack > 0.0 {
                    hinge += slack;
                    for a in &mut active[t..q] {
                        *a += 1.0;
                    }
                }
            }
        }
        let energy = 0.5 * lambda * norm2 + weight * hinge;
        if energy < best_energy {
            best_energy = energy;
            best.copy_from_slice(&gamma);
        }
        if k == window_start {
            energy_at_window = best_energy;
        }
        iterations = k;
        if k == config.max_iters {
            break;
        }

        for i in 0..m {
            grad[i] = lambda * gamma[i] - weight * active[i];
        }
        let mut grad_norm2 = 0.0;
        for i in 0..m {
            grad_norm2 += grad[i] * dot(&gram[i * m..(i + 1) * m], &grad);
        }
        if grad_norm2 <= 1e-24 {
            converged = true;
            break;
        }
        let step = config.step_size / (1.0 + config.step_decay * k as f64);
        for (g, u) in gamma.iter_mut().zip(&grad) {
            *g -= step * u;
        }
    }
    if !converged {
        let scale = best_energy.abs().max(1.0);
        converged = energy_at_window - best_energy <= 1e-9 * scale;
    }

    let mut d = vec![0.0; dim];
    for (g, diff) in best.iter().zip(&diffs) {
        if *g != 0.0 {
            for (x, v) in d.iter_mut().zip(diff) {
                *x += g * v;
            }
        }
    }
    Ok(PoolingOutcome {
        params: RankingParams::new(d)?,
        energy: best_energy,
        iterations,
        converged,
    })
}

/// Pool a feature sequence in the given temporal direction. Backward pooling
/// is forward pooling of the reversed sequence.
pub fn pool_features(
    features: &[FeatureVector],
    config: &PoolingConfig,
    direction: Direction,
) -> Result<PoolingOutcome> {
    let means = match direction {
        Direction::Forward => prefix_means(features)?,
        Direction::Backward => {
            let reversed: Vec<FeatureVector> = features.iter().rev().cloned().collect();
            prefix_means(&reversed)?
        }
    };
    rank_pool(&means, config)
}

fn quantize_channel(values: &[f64]) -> Vec<u8> {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if hi <= lo {
        return vec![128; values.len()];
    }
    let range = hi - lo;
    values
        .iter()
        .map(|&v| ((v - lo) / range * 255.0 + 0.5).floor().clamp(0.0, 255.0) as u8)
        .collect()
}

/// Quantize a pooled vector to an 8-bit image, min-max per channel.
///
/// `channel_count` is 1 (replicated into three channels) or 3 (plane-major
/// layout). A constant channel becomes 128.
pub fn to_image(
    params: &RankingParams,
    width: usize,
    height: usize,
    channel_count: usize,
    kind: ImageKind,
    direction: Direction,
) -> Result<DynamicImage> {
    let plane = width * height;
    if channel_count != 1 && channel_count != 3 {
        return Err(Error::invalid(format!(
            "channel_count must be 1 or 3, got {channel_count}"
        )));
    }
    if params.dim() != plane * channel_count {
        return Err(Error::LengthMismatch {
            expected: plane * channel_count,
            actual: params.dim(),
        });
    }
    let values = params.values();
    let channels = if channel_count == 1 {
        let c = quantize_channel(values);
        [c.clone(), c.clone(), c]
    } else {
        [
            quantize_channel(&values[..plane]),
            quantize_channel(&values[plane..2 * plane]),
            quantize_channel(&values[2 * plane..]),
        ]
    };
    DynamicImage::new(width, height, channels, kind, direction)
}
