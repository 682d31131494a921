use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nonnegative per-class scores.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScoreVector(Vec<f64>);

impl ScoreVector {
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        if let Some((index, &value)) = scores
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            if value < 0.0 {
                return Err(Error::NegativeScore { index, value });
            }
            return Err(Error::invalid(format!("non-finite score at index {index}")));
        }
        if scores.is_empty() {
            return Err(Error::invalid("score vector is empty"));
        }
        Ok(ScoreVector(scores))
    }

    pub fn uniform(class_count: usize) -> Self {
        ScoreVector(vec![1.0 / class_count as f64; class_count])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Index of the largest score, lowest index on ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &v) in self.0.iter().enumerate() {
            if v > self.0[best] {
                best = i;
            }
        }
        best
    }

    pub fn max(&self) -> f64 {
        self.0[self.argmax()]
    }
}

/// A fused, L1-normalized score vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fused {
    pub scores: ScoreVector,
    /// The product was all zeros and `scores` is the uniform fallback.
    pub degenerate: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub sequence_id: String,
    pub predicted_label: usize,
    pub confidence: f64,
    #[serde(default)]
    pub degenerate: bool,
}

/// Element-wise product of all inputs followed by L1 normalization.
pub fn product_fuse(inputs: &[&ScoreVector]) -> Result<Fused> {
    let first = inputs
        .first()
        .ok_or_else(|| Error::invalid("nothing to fuse"))?;
    let n = first.len();
    let mut product = vec![1.0; n];
    for v in inputs {
        if v.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                actual: v.len(),
            });
        }
        for (p, &x) in product.iter_mut().zip(v.as_slice()) {
            *p *= x;
        }
    }
    let total: f64 = product.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Ok(Fused {
            scores: ScoreVector::uniform(n),
            degenerate: true,
        });
    }
    for p in &mut product {
        *p /= total;
    }
    Ok(Fused {
        scores: ScoreVector(product),
        degenerate: false,
    })
}

/// Fuse the forward and backward scores of one representation.
pub fn pair_fuse(a: &ScoreVector, b: &ScoreVector) -> Result<Fused> {
    product_fuse(&[a, b])
}

/// Fuse the three pair-fused vectors and predict the top class.
pub fn multi_fuse(
    sequence_id: impl Into<String>,
    ddi: &ScoreVector,
    ddni: &ScoreVector,
    ddmni: &ScoreVector,
) -> Result<(Prediction, Fused)> {
    let fused = product_fuse(&[ddi, ddni, ddmni])?;
    let prediction = Prediction {
        sequence_id: sequence_id.into(),
        predicted_label: fused.scores.argmax(),
        confidence: fused.scores.max(),
        degenerate: fused.degenerate,
    };
    Ok((prediction, fused))
}
