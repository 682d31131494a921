//! Multiplicative score fusion, recognition rate, and a nearest-centroid
//! baseline classifier for end-to-end runs.

mod centroid;
mod eval;
mod fusion;
mod scores_csv;

use std::collections::HashMap;

pub use centroid::{downsample, train_centroids, CentroidModel};
pub use eval::{recognition_rate, ClassAccuracy, EvalReport};
pub use fusion::{multi_fuse, pair_fuse, product_fuse, Fused, Prediction, ScoreVector};
pub use scores_csv::{
    fuse_score_tables, fuse_six, read_scores_csv, write_scores_csv, FusedSample, ScoreRow,
};

use crate::depth_io::{Direction, ImageKind};
use crate::error::Result;
use crate::representations::RepresentationSet;

/// Score all six images of a set with the centroid model.
pub fn score_set(model: &CentroidModel, set: &RepresentationSet) -> Result<Vec<ScoreRow>> {
    set.images()
        .into_iter()
        .map(|img| {
            Ok(ScoreRow {
                sequence_id: set.sequence_id.clone(),
                kind: img.kind(),
                direction: img.direction(),
                scores: model.score(img)?,
            })
        })
        .collect()
}

/// Score, pair-fuse and multi-fuse one set.
pub fn classify_set(model: &CentroidModel, set: &RepresentationSet) -> Result<FusedSample> {
    let scores: HashMap<(ImageKind, Direction), ScoreVector> = score_set(model, set)?
        .into_iter()
        .map(|r| ((r.kind, r.direction), r.scores))
        .collect();
    fuse_six(&set.sequence_id, &scores)
}
