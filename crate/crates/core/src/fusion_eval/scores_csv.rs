//! Score tables for externally trained classifiers.
//!
//! CSV with header `sequence_id,kind,direction,score_0,...,score_{C-1}`, one
//! row per (sequence, kind, direction).

use std::collections::HashMap;
use std::path::Path;

use super::{multi_fuse, pair_fuse, Prediction, ScoreVector};
use crate::depth_io::{Direction, ImageKind};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct ScoreRow {
    pub sequence_id: String,
    pub kind: ImageKind,
    pub direction: Direction,
    pub scores: ScoreVector,
}

pub fn write_scores_csv(path: &Path, rows: &[ScoreRow], class_count: usize) -> Result<()> {
    let err = |reason: String| Error::Scores {
        path: path.to_path_buf(),
        reason,
    };
    let mut w = csv::Writer::from_path(path).map_err(|e| err(e.to_string()))?;
    let mut header = vec!["sequence_id".to_string(), "kind".into(), "direction".into()];
    header.extend((0..class_count).map(|c| format!("score_{c}")));
    w.write_record(&header).map_err(|e| err(e.to_string()))?;
    for row in rows {
        if row.scores.len() != class_count {
            return Err(err(format!(
                "row {} has {} scores, expected {class_count}",
                row.sequence_id,
                row.scores.len()
            )));
        }
        let mut rec = vec![
            row.sequence_id.clone(),
            row.kind.to_string(),
            row.direction.to_string(),
        ];
        rec.extend(row.scores.as_slice().iter().map(|v| format!("{v:e}")));
        w.write_record(&rec).map_err(|e| err(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_scores_csv(path: &Path, class_count: usize) -> Result<Vec<ScoreRow>> {
    let err = |line: usize, reason: String| Error::Scores {
        path: path.to_path_buf(),
        reason: format!("line {line}: {reason}"),
    };
    let mut r = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| err(0, e.to_string()))?;
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| err(line, e.to_string()))?;
        if rec.len() != 3 + class_count {
            return Err(err(
                line,
                format!("expected {} columns, found {}", 3 + class_count, rec.len()),
            ));
        }
        let kind = rec[1].parse().map_err(|e: Error| err(line, e.to_string()))?;
        let direction = rec[2].parse().map_err(|e: Error| err(line, e.to_string()))?;
        let scores = (3..rec.len())
            .map(|c| {
                rec[c]
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| err(line, format!("column {c}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(ScoreRow {
            sequence_id: rec[0].to_string(),
            kind,
            direction,
            scores: ScoreVector::new(scores).map_err(|e| err(line, e.to_string()))?,
        });
    }
    Ok(rows)
}

/// Fused result for one sequence, with the three pair-fused vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct FusedSample {
    pub prediction: Prediction,
    /// DDI, DDNI and DDMNI pair fusions, in that order.
    pub pairs: [ScoreVector; 3],
    pub fused: ScoreVector,
}

/// Fuse the six scores of one sequence.
pub fn fuse_six(sequence_id: &str, scores: &HashMap<(ImageKind, Direction), ScoreVector>) -> Result<FusedSample> {
    let get = |k: ImageKind, d: Direction| {
        scores
            .get(&(k, d))
            .ok_or_else(|| Error::invalid(format!("{sequence_id}: missing {k} {d} scores")))
    };
    let mut pairs = Vec::with_capacity(3);
    for kind in ImageKind::ALL {
        let f = pair_fuse(get(kind, Direction::Forward)?, get(kind, Direction::Backward)?)?;
        if f.degenerate {
            log::warn!("{sequence_id}: {kind} pair fusion degenerate, using uniform scores");
        }
        pairs.push(f.scores);
    }
    let pairs: [ScoreVector; 3] = pairs.try_into().expect("three kinds");
    let (prediction, fused) = multi_fuse(sequence_id, &pairs[0], &pairs[1], &pairs[2])?;
    Ok(FusedSample {
        prediction,
        pairs,
        fused: fused.scores,
    })
}

/// Fuse score tables that each list the same sequences in the same order.
///
/// Rows may be split across tables in any way (one table per kind and
/// direction is typical); every sequence needs all six (kind, direction)
/// rows overall.
pub fn fuse_score_tables(tables: &[(String, Vec<ScoreRow>)]) -> Result<Vec<FusedSample>> {
    let (first_name, first) = tables
        .first()
        .ok_or_else(|| Error::invalid("no score tables given"))?;
    for (name, table) in &tables[1..] {
        if table.len() != first.len() {
            return Err(Error::invalid(format!(
                "{name} has {} rows but {first_name} has {}",
                table.len(),
                first.len()
            )));
        }
        if let Some((i, (a, b))) = first
            .iter()
            .zip(table)
            .enumerate()
            .find(|(_, (a, b))| a.sequence_id != b.sequence_id)
        {
            return Err(Error::invalid(format!(
                "sequence id mismatch at row {}: {first_name} has {:?}, {name} has {:?}",
                i + 1,
                a.sequence_id,
                b.sequence_id
            )));
        }
    }

    let mut order: Vec<&str> = Vec::new();
    let mut grouped: HashMap<&str, HashMap<(ImageKind, Direction), ScoreVector>> = HashMap::new();
    for (name, table) in tables {
        for row in table {
            let entry = grouped.entry(&row.sequence_id).or_insert_with(|| {
                order.push(&row.sequence_id);
                HashMap::new()
            });
            if entry
                .insert((row.kind, row.direction), row.scores.clone())
                .is_some()
            {
                return Err(Error::invalid(format!(
                    "{name}: duplicate {} {} row for {}",
                    row.kind, row.direction, row.sequence_id
                )));
            }
        }
    }
    order
        .iter()
        .map(|id| fuse_six(id, &grouped[id]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(id: &str, kind: ImageKind, direction: Direction, s: &[f64]) -> ScoreRow {
        ScoreRow {
            sequence_id: id.into(),
            kind,
            direction,
            scores: ScoreVector::new(s.to_vec()).unwrap(),
        }
    }

    fn six_tables(ids: &[&str], s: &[f64]) -> Vec<(String, Vec<ScoreRow>)> {
        ImageKind::ALL
            .iter()
            .flat_map(|&k| Direction::BOTH.map(move |d| (k, d)))
            .map(|(k, d)| {
                (
                    format!("{k}_{d}.csv"),
                    ids.iter().map(|id| row(id, k, d, s)).collect(),
                )
            })
            .collect()
    }

    #[test]
    fn csv_round_trip() {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("s.csv");
        let rows = vec![
            row("a", ImageKind::Ddi, Direction::Forward, &[0.1, 0.9]),
            row("b", ImageKind::Ddi, Direction::Forward, &[1.0 / 3.0, 2.0 / 3.0]),
        ];
        write_scores_csv(&path, &rows, 2).unwrap();
        assert_eq!(read_scores_csv(&path, 2).unwrap(), rows);
        assert!(read_scores_csv(&path, 3).is_err());
    }

    #[test]
    fn rejects_negative_scores() {
        let tmp = tempfile::tempdir().unwrap();
        let path = tmp.path().join("s.csv");
        std::fs::write(&path, "sequence_id,kind,direction,score_0,score_1\na,ddi,forward,0.5,-1\n").unwrap();
        let e = read_scores_csv(&path, 2).unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
    }

    #[test]
    fn one_hot_tables_give_their_label() {
        let out = fuse_score_tables(&six_tables(&["a", "b"], &[0.0, 1.0, 0.0])).unwrap();
        assert_eq!(out.len(), 2);
        assert!(out.iter().all(|s| s.prediction.predicted_label == 1 && s.prediction.confidence == 1.0));
    }

    #[test]
    fn mismatched_ids_are_named() {
        let mut t = six_tables(&["a", "b"], &[0.5, 0.5]);
        t[3].1[1].sequence_id = "z".into();
        let e = fuse_score_tables(&t).unwrap_err().to_string();
        assert!(e.contains("row 2") && e.contains("\"z\""), "{e}");
    }

    #[test]
    fn missing_kind_is_an_error() {
        let mut t = six_tables(&["a"], &[0.5, 0.5]);
        t.pop();
        assert!(fuse_score_tables(&t).is_err());
    }
}
