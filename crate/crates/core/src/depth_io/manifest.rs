use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub id: String,
    pub dir: PathBuf,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<usize>,
}

/// JSON index of sequences: `{"sequences":[{"id","dir","label"?}], "class_count"}`.
///
/// Relative `dir` values are resolved against the manifest's own directory
/// by [`Manifest::load`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub sequences: Vec<ManifestEntry>,
    pub class_count: usize,
}

impl Manifest {
    pub fn new(sequences: Vec<ManifestEntry>, class_count: usize) -> Result<Self> {
        let m = Manifest {
            sequences,
            class_count,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for e in &self.sequences {
            if !seen.insert(e.id.as_str()) {
                return Err(Error::Manifest(format!("duplicate sequence id {:?}", e.id)));
            }
            if let Some(l) = e.label {
                if l >= self.class_count {
                    return Err(Error::Manifest(format!(
                        "label {l} of {:?} outside [0, {})",
                        e.id, self.class_count
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: Manifest = serde_json::from_str(text).map_err(|e| Error::Manifest(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut m = Manifest::from_json(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        for e in &mut m.sequences {
            if e.dir.is_relative() {
                e.dir = base.join(&e.dir);
            }
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_exact_schema() {
        let m = Manifest::from_json(
            r#"{"sequences":[{"id":"a","dir":"a","label":1},{"id":"b","dir":"b"}],"class_count":2}"#,
        )
        .unwrap();
        assert_eq!(m.sequences.len(), 2);
        assert_eq!(m.sequences[1].label, None);
    }

    #[test]
    fn rejects_duplicates_labels_and_unknown_fields() {
        assert!(Manifest::from_json(
            r#"{"sequences":[{"id":"a","dir":"a"},{"id":"a","dir":"b"}],"class_count":1}"#
        )
        .is_err());
        assert!(Manifest::from_json(r#"{"sequences":[{"id":"a","dir":"a","label":2}],"class_count":2}"#).is_err());
        assert!(Manifest::from_json(
            r#"{"sequences":[{"id":"a","dir":"a","frames":3}],"class_count":2}"#
        )
        .is_err());
    }

    #[test]
    fn load_resolves_relative_dirs() {
        let tmp = tempfile::tempdir().unwrap();
        let m = Manifest::new(
            vec![ManifestEntry {
                id: "a".into(),
                dir: "seq/a".into(),
                label: Some(0),
            }],
            1,
        )
        .unwrap();
        let path = tmp.path().join("manifest.json");
        m.save(&path).unwrap();
        let back = Manifest::load(&path).unwrap();
        assert_eq!(back.sequences[0].dir, tmp.path().join("seq/a"));
    }
}
