use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::Args;
use dynapool::depth_io::{
    load_sequence, synth_sequence, write_sequence, Archetype, Manifest, ManifestEntry, SynthSpec,
};
use dynapool::fusion_eval::{
    classify_set, fuse_score_tables, read_scores_csv, recognition_rate, train_centroids, FusedSample,
};
use dynapool::representations::{
    build_all, load_outputs, outputs_complete, write_outputs, RepresentationConfig, RepresentationSet,
};
use log::{error, info};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::{usage, PartialFailure};

#[derive(Args, Debug)]
pub struct SynthArgs {
    /// Sequences per class.
    #[arg(long)]
    count: usize,
    /// Number of gesture classes (at most 5).
    #[arg(long, default_value_t = 5)]
    classes: usize,
    /// Frames per sequence.
    #[arg(long)]
    frames: Option<usize>,
    /// Frame width and height in pixels.
    #[arg(long)]
    size: Option<usize>,
    /// Depth noise standard deviation, millimetres.
    #[arg(long)]
    noise: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
pub struct ConvertArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Directory receiving the PNGs and sidecars.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[arg(long)]
    train_manifest: PathBuf,
    #[arg(long)]
    test_manifest: PathBuf,
    /// Keep converted images here and reuse them on later runs.
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Centroid classifier image size.
    #[arg(long)]
    downsample: Option<usize>,
}

#[derive(Args, Debug)]
pub struct FuseArgs {
    /// Score CSV files, typically one per kind and direction.
    #[arg(required = true, num_args = 1..)]
    scores: Vec<PathBuf>,
    #[arg(long)]
    class_count: usize,
    /// Include the pair-fused and fused vectors in the output.
    #[arg(long)]
    dump_intermediate: bool,
    /// Write predictions here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(json: &impl Serialize, out: Option<&Path>) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(json)? + "\n";
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn synth(args: &SynthArgs, cfg: &RunConfig) -> anyhow::Result<()> {
    if args.classes == 0 || args.classes > Archetype::GESTURES.len() {
        return Err(usage(format!(
            "--classes must be between 1 and {}",
            Archetype::GESTURES.len()
        )));
    }
    if args.count == 0 {
        return Err(usage("--count must be at least 1"));
    }
    let frames = args.frames.unwrap_or(cfg.synth.frames);
    let size = args.size.unwrap_or(cfg.synth.size);
    let noise = args.noise.unwrap_or(cfg.synth.noise);
    let base = cfg.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15);

    let mut entries = Vec::with_capacity(args.classes * args.count);
    for (class, &archetype) in Archetype::GESTURES[..args.classes].iter().enumerate() {
        for i in 0..args.count {
            let seed = base.wrapping_add((class * args.count + i) as u64);
            let spec = SynthSpec::new(archetype, frames, size, size, seed).with_noise(noise);
            spec.validate().map_err(|e| usage(e.to_string()))?;
            let id = format!("c{class}_{i:04}");
            let seq = synth_sequence(&spec)?;
            write_sequence(&seq, &args.out.join(&id))?;
            entries.push(ManifestEntry {
                id: id.clone(),
                dir: PathBuf::from(id),
                label: Some(class),
            });
        }
    }
    let manifest = Manifest::new(entries, args.classes)?;
    let path = args.out.join("manifest.json");
    manifest.save(&path)?;
    info!("wrote {} sequences and {}", manifest.sequences.len(), path.display());
    Ok(())
}

#[derive(Debug, Default, Serialize)]
struct ConvertSummary {
    converted: usize,
    skipped: usize,
    failed: Vec<String>,
}

enum Outcome {
    Converted,
    Skipped,
    Failed(String),
}

fn convert_one(entry: &ManifestEntry, config: &RepresentationConfig, out: &Path) -> dynapool::Result<Outcome> {
    if outputs_complete(out, &entry.id, config) {
        return Ok(Outcome::Skipped);
    }
    let seq = load_sequence(entry)?;
    let set = build_all(&seq, config)?;
    write_outputs(&set, config, out)?;
    Ok(Outcome::Converted)
}

pub fn convert(args: &ConvertArgs, cfg: &RunConfig) -> anyhow::Result<()> {
    let manifest = Manifest::load(&args.manifest)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let outcomes: Vec<Outcome> = manifest
        .sequences
        .par_iter()
        .map(|e| match convert_one(e, &cfg.representation, &args.out) {
            Ok(o) => o,
            Err(err) => {
                error!("{}: {err}", e.id);
                Outcome::Failed(e.id.clone())
            }
        })
        .collect();
    let mut summary = ConvertSummary::default();
    for o in outcomes {
        match o {
            Outcome::Converted => summary.converted += 1,
            Outcome::Skipped => summary.skipped += 1,
            Outcome::Failed(id) => summary.failed.push(id),
        }
    }
    info!(
        "converted {}, skipped {}, failed {}",
        summary.converted,
        summary.skipped,
        summary.failed.len()
    );
    emit(&summary, None)?;
    let total = manifest.sequences.len();
    match summary.failed.len() {
        0 => Ok(()),
        n if n == total => bail!("all {n} sequences failed"),
        n => Err(PartialFailure(format!("{n} of {total} sequences failed")).into()),
    }
}

fn labelled(manifest: &Manifest, path: &Path) -> anyhow::Result<Vec<usize>> {
    manifest
        .sequences
        .iter()
        .map(|e| {
            e.label
                .with_context(|| format!("{}: sequence {:?} has no label", path.display(), e.id))
        })
        .collect()
}

fn representations(
    manifest: &Manifest,
    config: &RepresentationConfig,
    cache: Option<&Path>,
) -> anyhow::Result<Vec<RepresentationSet>> {
    manifest
        .sequences
        .par_iter()
        .map(|e| {
            let set = match cache {
                Some(dir) if outputs_complete(dir, &e.id, config) => load_outputs(dir, &e.id)?,
                Some(dir) => {
                    let set = build_all(&load_sequence(e)?, config)?;
                    write_outputs(&set, config, dir)?;
                    set
                }
                None => build_all(&load_sequence(e)?, config)?,
            };
            Ok(set)
        })
        .collect::<dynapool::Result<Vec<_>>>()
        .map_err(Into::into)
}

pub fn evaluate(args: &EvaluateArgs, cfg: &RunConfig) -> anyhow::Result<()> {
    let downsample = args.downsample.unwrap_or(cfg.downsample);
    if downsample == 0 {
        return Err(usage("--downsample must be at least 1"));
    }
    let train_m = Manifest::load(&args.train_manifest)?;
    let test_m = Manifest::load(&args.test_manifest)?;
    let train_labels = labelled(&train_m, &args.train_manifest)?;
    let truth = labelled(&test_m, &args.test_manifest)?;
    if truth.is_empty() {
        bail!("{}: no test sequences", args.test_manifest.display());
    }
    let class_count = train_m.class_count;
    if let Some(&bad) = truth.iter().find(|&&l| l >= class_count) {
        bail!("test label {bad} outside the {class_count} training classes");
    }
    if let Some(dir) = &args.cache {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }

    let cache = args.cache.as_deref();
    let train_sets = representations(&train_m, &cfg.representation, cache)?;
    let test_sets = representations(&test_m, &cfg.representation, cache)?;
    info!("built {} train and {} test sets", train_sets.len(), test_sets.len());
    let train: Vec<(RepresentationSet, usize)> = train_sets.into_iter().zip(train_labels).collect();
    let model = train_centroids(&train, downsample, class_count)?;
    let predicted = test_sets
        .par_iter()
        .map(|s| classify_set(&model, s).map(|f| f.prediction.predicted_label))
        .collect::<dynapool::Result<Vec<_>>>()?;
    let report = recognition_rate(&predicted, &truth, Some(class_count))?;
    info!("recognition rate {:.4} ({}/{})", report.recognition_rate, report.correct, report.n);
    emit(&report, args.out.as_deref())
}

#[derive(Serialize)]
struct PairScores<'a> {
    ddi: &'a [f64],
    ddni: &'a [f64],
    ddmni: &'a [f64],
}

#[derive(Serialize)]
struct FuseOutput<'a> {
    sequence_id: &'a str,
    predicted_label: usize,
    confidence: f64,
    degenerate: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pairs: Option<PairScores<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fused: Option<&'a [f64]>,
}

fn fuse_output(s: &FusedSample, dump: bool) -> FuseOutput<'_> {
    FuseOutput {
        sequence_id: &s.prediction.sequence_id,
        predicted_label: s.prediction.predicted_label,
        confidence: s.prediction.confidence,
        degenerate: s.prediction.degenerate,
        pairs: dump.then(|| PairScores {
            ddi: s.pairs[0].as_slice(),
            ddni: s.pairs[1].as_slice(),
            ddmni: s.pairs[2].as_slice(),
        }),
        fused: dump.then(|| s.fused.as_slice()),
    }
}

pub fn fuse(args: &FuseArgs) -> anyhow::Result<()> {
    if args.class_count == 0 {
        return Err(usage("--class-count must be at least 1"));
    }
    let tables = args
        .scores
        .iter()
        .map(|p| Ok((p.display().to_string(), read_scores_csv(p, args.class_count)?)))
        .collect::<dynapool::Result<Vec<_>>>()?;
    let fused = fuse_score_tables(&tables)?;
    let out: Vec<FuseOutput> = fused.iter().map(|s| fuse_output(s, args.dump_intermediate)).collect();
    emit(&out, args.out.as_deref())
}
