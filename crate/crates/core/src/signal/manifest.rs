use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::clip::{read_clip_file, ClipFile, FeatureClip, Label};
use super::preprocess::clip_to_features;
use crate::error::{Error, Result};

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub clip_id: String,
    /// Relative to the manifest's directory.
    pub path: String,
    pub label: Label,
    pub patient_id: String,
}

/// JSON index of one dataset split.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub version: u32,
    pub split: Split,
    pub entries: Vec<ManifestEntry>,
    pub seed: u64,
}

impl DatasetManifest {
    pub fn new(split: Split, seed: u64, entries: Vec<ManifestEntry>) -> Self {
        DatasetManifest {
            version: MANIFEST_VERSION,
            split,
            entries,
            seed,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let manifest: DatasetManifest = serde_json::from_str(&text)?;
        manifest.check_unique_ids()?;
        Ok(manifest)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn check_unique_ids(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for e in &self.entries {
            if !seen.insert(e.clip_id.as_str()) {
                return Err(Error::Schema(format!("duplicate clip_id {}", e.clip_id)));
            }
        }
        Ok(())
    }

    /// Checks every path resolves to a clip whose header id matches.
    pub fn verify_files(&self, root: &Path) -> Result<()> {
        for e in &self.entries {
            let clip = read_clip_file(&root.join(&e.path))?;
            if clip.clip_id() != e.clip_id {
                return Err(Error::Schema(format!(
                    "manifest entry {} points at clip {}",
                    e.clip_id,
                    clip.clip_id()
                )));
            }
        }
        Ok(())
    }

    pub fn resolve(&self, root: &Path, entry: &ManifestEntry) -> PathBuf {
        root.join(&entry.path)
    }

    pub fn load_clip(&self, root: &Path, entry: &ManifestEntry) -> Result<ClipFile> {
        read_clip_file(&self.resolve(root, entry))
    }

    /// Loads every entry as features, converting raw clips on the fly and
    /// checking each header id against its entry.
    pub fn load_features(&self, root: &Path) -> Result<Vec<FeatureClip>> {
        self.entries
            .iter()
            .map(|e| {
                let clip = self.load_clip(root, e)?;
                if clip.clip_id() != e.clip_id {
                    return Err(Error::Schema(format!(
                        "manifest entry {} points at clip {}",
                        e.clip_id,
                        clip.clip_id()
                    )));
                }
                match clip {
                    ClipFile::Feature(f) => Ok(f),
                    ClipFile::Raw(r) => clip_to_features(&r),
                }
            })
            .collect()
    }

    pub fn sort_by_clip_id(&mut self) {
        self.entries.sort_by(|a, b| a.clip_id.cmp(&b.clip_id));
    }

    pub fn class_counts(&self) -> std::collections::BTreeMap<Label, usize> {
        let mut counts = std::collections::BTreeMap::new();
        for e in &self.entries {
            *counts.entry(e.label).or_insert(0) += 1;
        }
        counts
    }
}

/// Random 9:1-style partition of training entries into (train, val).
/// `val_fraction` of the entries (rounded, at least one when there are two or
/// more entries) go to validation. Both outputs are sorted by clip id.
pub fn split_train_val(
    entries: Vec<ManifestEntry>,
    val_fraction: f64,
    seed: u64,
) -> (Vec<ManifestEntry>, Vec<ManifestEntry>) {
    let mut entries = entries;
    entries.sort_by(|a, b| a.clip_id.cmp(&b.clip_id));
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7661_6c5f_7370_6c74);
    entries.shuffle(&mut rng);
    let mut n_val = (entries.len() as f64 * val_fraction).round() as usize;
    if n_val == 0 && entries.len() >= 2 && val_fraction > 0.0 {
        n_val = 1;
    }
    let train = entries.split_off(n_val);
    let mut val = entries;
    let mut train = train;
    train.sort_by(|a, b| a.clip_id.cmp(&b.clip_id));
    val.sort_by(|a, b| a.clip_id.cmp(&b.clip_id));
    (train, val)
}
