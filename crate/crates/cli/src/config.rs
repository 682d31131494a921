use std::path::Path;

use anyhow::Context;
use dynapool::representations::RepresentationConfig;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Defaults for `synth`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthDefaults {
    pub frames: usize,
    pub size: usize,
    /// Depth noise standard deviation, millimetres.
    pub noise: f64,
}

impl Default for SynthDefaults {
    fn default() -> Self {
        SynthDefaults {
            frames: 24,
            size: 64,
            noise: 10.0,
        }
    }
}

/// Every numeric default, as printed by `--print-config` and accepted by
/// `--config`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub representation: RepresentationConfig,
    pub synth: SynthDefaults,
    /// Side length of the centroid classifier's downsampled images.
    pub downsample: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            seed: 0,
            representation: RepresentationConfig::default(),
            synth: SynthDefaults::default(),
            downsample: 16,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<RunConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let cfg: RunConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            anyhow::bail!(
                "{}: schema_version {} is not supported (expected {SCHEMA_VERSION})",
                path.display(),
                cfg.schema_version
            );
        }
        Ok(cfg)
    }
}
