use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassAccuracy {
    pub class: usize,
    pub n: usize,
    pub correct: usize,
    pub accuracy: f64,
}

/// Recognition rate over a test set, `r = correct / n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub n: usize,
    pub correct: usize,
    pub recognition_rate: f64,
    pub per_class: Vec<ClassAccuracy>,
}

/// `r = (1/n) Σ_i δ(p_l(i), t_l(i))`.
///
/// `per_class` covers classes `0..class_count` (or up to the largest label
/// seen when `class_count` is `None`); classes without test samples report
/// accuracy 0 with `n = 0`.
pub fn recognition_rate(
    predicted: &[usize],
    truth: &[usize],
    class_count: Option<usize>,
) -> Result<EvalReport> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch {
            expected: truth.len(),
            actual: predicted.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::invalid("recognition rate needs at least one sample"));
    }
    let classes = class_count.unwrap_or_else(|| {
        predicted.iter().chain(truth).copied().max().map_or(0, |m| m + 1)
    });
    let mut per_class: Vec<ClassAccuracy> = (0..classes)
        .map(|class| ClassAccuracy {
            class,
            n: 0,
            correct: 0,
            accuracy: 0.0,
        })
        .collect();
    let mut correct = 0;
    for (&p, &t) in predicted.iter().zip(truth) {
        let hit = p == t;
        correct += usize::from(hit);
        let row = per_class
            .get_mut(t)
            .ok_or_else(|| Error::invalid(format!("label {t} outside {classes} classes")))?;
        row.n += 1;
        row.correct += usize::from(hit);
    }
    for row in &mut per_class {
        if row.n > 0 {
            row.accuracy = row.correct as f64 / row.n as f64;
        }
    }
    Ok(EvalReport {
        n: truth.len(),
        correct,
        recognition_rate: correct as f64 / truth.len() as f64,
        per_class,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let all: Vec<usize> = (0..10).map(|i| i % 3).collect();
        assert_eq!(recognition_rate(&all, &all, None).unwrap().recognition_rate, 1.0);
        let wrong: Vec<usize> = all.iter().map(|l| (l + 1) % 3).collect();
        assert_eq!(recognition_rate(&wrong, &all, None).unwrap().recognition_rate, 0.0);
        let r = recognition_rate(&[0, 1, 2, 0, 0], &[0, 1, 2, 1, 2], Some(3)).unwrap();
        assert_eq!((r.n, r.correct, r.recognition_rate), (5, 3, 0.6));
        assert_eq!(r.per_class[1].n, 2);
        assert_eq!(r.per_class[1].accuracy, 0.5);
    }

    #[test]
    fn errors() {
        assert!(recognition_rate(&[0], &[0, 1], None).is_err());
        assert!(recognition_rate(&[], &[], None).is_err());
        assert!(recognition_rate(&[0], &[3], Some(2)).is_err());
    }

    #[test]
    fn report_json_fields() {
        let r = recognition_rate(&[1], &[1], Some(2)).unwrap();
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        for key in ["n", "correct", "recognition_rate", "per_class"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }
}
