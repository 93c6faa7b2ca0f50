use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::clip::{write_feature_clip, write_raw_clip, FeatureClip, Label, RawClip};
use super::manifest::{split_train_val, DatasetManifest, ManifestEntry, Split};
use super::preprocess::{clip_to_features, CLIP_SECONDS, SAMPLE_RATE_HZ, SEGMENT_LEN};
use crate::error::{Error, Result};
use crate::semantics::BrainTaxonomy;

/// Generative signature of one synthetic class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSignature {
    pub label: Label,
    pub band_hz: (f64, f64),
    pub amplitude_uv: f64,
    /// Electrode groups; each burst picks one group at random.
    pub electrode_groups: Vec<Vec<String>>,
    /// Relative amplitudes of the fundamental and its harmonics.
    pub harmonics: Vec<f64>,
}

impl ClassSignature {
    pub fn defaults() -> Vec<ClassSignature> {
        let g = |names: &[&str]| names.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        let all = BrainTaxonomy::default_10_20().electrode_names().to_vec();
        vec![
            ClassSignature {
                label: Label::CF,
                band_hz: (4.0, 7.0),
                amplitude_uv: 20.0,
                electrode_groups: vec![g(&["F7", "T3", "T5"]), g(&["F8", "T4", "T6"])],
                harmonics: vec![1.0],
            },
            ClassSignature {
                label: Label::GN,
                band_hz: (14.0, 20.0),
                amplitude_uv: 12.0,
                electrode_groups: vec![all],
                harmonics: vec![1.0],
            },
            ClassSignature {
                label: Label::AB,
                band_hz: (2.5, 3.5),
                amplitude_uv: 30.0,
                electrode_groups: vec![g(&["FP1", "FP2", "F3", "F4", "FZ", "C3", "C4", "CZ"])],
                harmonics: vec![1.0, 0.5, 0.33],
            },
            ClassSignature {
                label: Label::CT,
                band_hz: (20.0, 30.0),
                amplitude_uv: 12.0,
                electrode_groups: vec![g(&["C3", "C4", "CZ", "P3", "P4", "PZ"])],
                harmonics: vec![1.0],
            },
        ]
    }
}

/// Synthetic dataset configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub counts: BTreeMap<Label, usize>,
    pub seed: u64,
    /// Fraction of clips (by whole recordings) held out for test.
    pub test_fraction: f64,
    /// Fraction of the remaining clips used for validation.
    pub val_fraction: f64,
    /// Consecutive 60 s windows generated per synthetic recording.
    pub windows_per_recording: usize,
    pub noise_std_uv: f64,
    pub electrodes: Vec<String>,
    pub signatures: Vec<ClassSignature>,
}

impl SynthConfig {
    pub fn new(counts: impl IntoIterator<Item = (Label, usize)>, seed: u64) -> Self {
        SynthConfig {
            counts: counts.into_iter().collect(),
            seed,
            test_fraction: 0.2,
            val_fraction: 0.1,
            windows_per_recording: 4,
            noise_std_uv: 10.0,
            electrodes: BrainTaxonomy::default_10_20().electrode_names().to_vec(),
            signatures: ClassSignature::defaults(),
        }
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    fn validate(&self) -> Result<()> {
        if self.total() == 0 {
            return Err(Error::invalid("synthetic dataset needs at least one clip"));
        }
        if self.windows_per_recording == 0 {
            return Err(Error::invalid("windows_per_recording must be >= 1"));
        }
        if !(0.0..1.0).contains(&self.test_fraction) || !(0.0..1.0).contains(&self.val_fraction) {
            return Err(Error::invalid("split fractions must lie in [0, 1)"));
        }
        for (label, &n) in &self.counts {
            if n > 0 && label.is_seizure() && !self.signatures.iter().any(|s| s.label == *label) {
                return Err(Error::invalid(format!("no signature for class {label}")));
            }
        }
        for sig in &self.signatures {
            for name in sig.electrode_groups.iter().flatten() {
                if !self.electrodes.contains(name) {
                    return Err(Error::invalid(format!(
                        "signature for {} names unknown electrode {name}",
                        sig.label
                    )));
                }
            }
        }
        Ok(())
    }
}

/// One planned recording: consecutive windows with their labels.
#[derive(Debug, Clone)]
pub struct RecordingPlan {
    pub index: usize,
    pub recording_id: String,
    pub patient_id: String,
    pub labels: Vec<Label>,
    pub test: bool,
}

/// Deterministic planner and signal generator.
pub struct SyntheticGenerator {
    config: SynthConfig,
    plans: Vec<RecordingPlan>,
}

impl SyntheticGenerator {
    pub fn new(config: SynthConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let mut labels: Vec<Label> = config
            .counts
            .iter()
            .flat_map(|(&l, &n)| std::iter::repeat_n(l, n))
            .collect();
        labels.shuffle(&mut rng);
        let mut plans: Vec<RecordingPlan> = labels
            .chunks(config.windows_per_recording)
            .enumerate()
            .map(|(i, chunk)| RecordingPlan {
                index: i,
                recording_id: format!("syn{i:04}"),
                patient_id: format!("P{i:04}"),
                labels: chunk.to_vec(),
                test: false,
            })
            .collect();
        let mut order: Vec<usize> = (0..plans.len()).collect();
        order.shuffle(&mut rng);
        let target = (config.total() as f64 * config.test_fraction).round() as usize;
        let mut held = 0;
        for i in order {
            if held >= target {
                break;
            }
            plans[i].test = true;
            held += plans[i].labels.len();
        }
        Ok(SyntheticGenerator { config, plans })
    }

    pub fn config(&self) -> &SynthConfig {
        &self.config
    }

    pub fn plans(&self) -> &[RecordingPlan] {
        &self.plans
    }

    /// Generates every window of one recording. Output depends only on the
    /// config and the plan index.
    pub fn generate(&self, plan: &RecordingPlan) -> Vec<RawClip> {
        let cfg = &self.config;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(plan.index as u64 + 1);
        let n = cfg.electrodes.len();
        let window = SEGMENT_LEN * CLIP_SECONDS;
        let len = window * plan.labels.len();
        let fs = SAMPLE_RATE_HZ;
        let noise = Normal::new(0.0, cfg.noise_std_uv).expect("noise std must be finite");
        let mut signal = Array2::<f64>::zeros((n, len));

        // background: delta rhythm everywhere, alpha over posterior sites
        let delta_hz = rng.random_range(1.0..2.5);
        let alpha_hz = rng.random_range(9.0..11.0);
        let posterior = ["O1", "O2", "P3", "P4", "PZ", "T5", "T6"];
        for (c, name) in cfg.electrodes.iter().enumerate() {
            let delta_phase = rng.random_range(0.0..2.0 * PI);
            let alpha_phase = rng.random_range(0.0..2.0 * PI);
            let alpha_amp = if posterior.contains(&name.as_str()) { 6.0 } else { 0.0 };
            let mut row = signal.row_mut(c);
            for (i, v) in row.iter_mut().enumerate() {
                let t = i as f64 / fs;
                *v = 8.0 * (2.0 * PI * delta_hz * t + delta_phase).sin()
                    + alpha_amp * (2.0 * PI * alpha_hz * t + alpha_phase).sin()
                    + noise.sample(&mut rng);
            }
        }

        for (w, &label) in plan.labels.iter().enumerate() {
            let Some(sig) = cfg.signatures.iter().find(|s| s.label == label) else {
                continue;
            };
            // sustained from onset to the end of the window
            let onset = rng.random_range(2.0..20.0);
            let freq = rng.random_range(sig.band_hz.0..sig.band_hz.1);
            let amp = sig.amplitude_uv * rng.random_range(0.6..1.0);
            let group = &sig.electrode_groups[rng.random_range(0..sig.electrode_groups.len())];
            let start = w * window + (onset * fs) as usize;
            let stop = (w + 1) * window;
            let ramp = 2.0 * fs;
            for name in group {
                let c = cfg.electrodes.iter().position(|e| e == name).expect("validated");
                let gain = amp * rng.random_range(0.7..1.0);
                let phase = rng.random_range(0.0..2.0 * PI);
                let mut row = signal.row_mut(c);
                for i in start..stop {
                    let k = (i - start) as f64;
                    let env = if k < ramp {
                        0.5 - 0.5 * (PI * k / ramp).cos()
                    } else {
                        1.0
                    };
                    let t = k / fs;
                    let wave: f64 = sig
                        .harmonics
                        .iter()
                        .enumerate()
                        .map(|(h, &a)| a * (2.0 * PI * freq * (h + 1) as f64 * t + phase).sin())
                        .sum();
                    row[i] += gain * env * wave;
                }
            }
        }

        plan.labels
            .iter()
            .enumerate()
            .map(|(w, &label)| RawClip {
                clip_id: super::window_id(&plan.recording_id, w),
                channels: signal
                    .slice(ndarray::s![.., w * window..(w + 1) * window])
                    .mapv(|v| v as f32),
                label,
                patient_id: plan.patient_id.clone(),
                sample_rate_hz: SAMPLE_RATE_HZ,
            })
            .collect()
    }
}

/// Manifests written by [`generate_synthetic_dataset`].
#[derive(Debug, Clone)]
pub struct SyntheticManifests {
    pub train: DatasetManifest,
    pub val: DatasetManifest,
    pub test: DatasetManifest,
}

/// In-memory feature clips for each split.
#[derive(Debug, Clone, Default)]
pub struct SyntheticData {
    pub train: Vec<FeatureClip>,
    pub val: Vec<FeatureClip>,
    pub test: Vec<FeatureClip>,
}

fn assign_splits(
    generator: &SyntheticGenerator,
    entries: Vec<(ManifestEntry, bool)>,
) -> (Vec<ManifestEntry>, Vec<ManifestEntry>, Vec<ManifestEntry>) {
    let (test, rest): (Vec<_>, Vec<_>) = entries.into_iter().partition(|(_, t)| *t);
    let rest = rest.into_iter().map(|(e, _)| e).collect();
    let (train, val) = split_train_val(rest, generator.config.val_fraction, generator.config.seed);
    let mut test: Vec<ManifestEntry> = test.into_iter().map(|(e, _)| e).collect();
    test.sort_by(|a, b| a.clip_id.cmp(&b.clip_id));
    (train, val, test)
}

/// Writes clip files under `out_dir/clips/`, one manifest per split
/// (`train.json`, `val.json`, `test.json`) and the class signatures to
/// `signatures.json`. With `features` set, clips are stored as
/// log-amplitude payloads instead of raw signal.
pub fn generate_synthetic_dataset(config: &SynthConfig, out_dir: &Path, features: bool) -> Result<SyntheticManifests> {
    let generator = SyntheticGenerator::new(config.clone())?;
    let clip_dir = out_dir.join("clips");
    std::fs::create_dir_all(&clip_dir).map_err(|e| Error::io(&clip_dir, e))?;
    let mut entries = Vec::with_capacity(config.total());
    for plan in generator.plans() {
        for clip in generator.generate(plan) {
            let rel = format!("clips/{}.ngc", clip.clip_id);
            let path = out_dir.join(&rel);
            if features {
                write_feature_clip(&path, &clip_to_features(&clip)?)?;
            } else {
                write_raw_clip(&path, &clip)?;
            }
            entries.push((
                ManifestEntry {
                    clip_id: clip.clip_id,
                    path: rel,
                    label: clip.label,
                    patient_id: clip.patient_id,
                },
                plan.test,
            ));
        }
    }
    let (train, val, test) = assign_splits(&generator, entries);
    let out = SyntheticManifests {
        train: DatasetManifest::new(Split::Train, config.seed, train),
        val: DatasetManifest::new(Split::Val, config.seed, val),
        test: DatasetManifest::new(Split::Test, config.seed, test),
    };
    out.train.save(&out_dir.join("train.json"))?;
    out.val.save(&out_dir.join("val.json"))?;
    out.test.save(&out_dir.join("test.json"))?;
    let sig_path = out_dir.join("signatures.json");
    std::fs::write(&sig_path, serde_json::to_string_pretty(&config.signatures)? + "\n")
        .map_err(|e| Error::io(&sig_path, e))?;
    Ok(out)
}

/// Generates and preprocesses a synthetic dataset without touching disk.
pub fn synthesize_features(config: &SynthConfig) -> Result<SyntheticData> {
    let generator = SyntheticGenerator::new(config.clone())?;
    let mut clips = BTreeMap::new();
    let mut entries = Vec::new();
    for plan in generator.plans() {
        for clip in generator.generate(plan) {
            entries.push((
                ManifestEntry {
                    clip_id: clip.clip_id.clone(),
                    path: String::new(),
                    label: clip.label,
                    patient_id: clip.patient_id.clone(),
                },
                plan.test,
            ));
            clips.insert(clip.clip_id.clone(), clip_to_features(&clip)?);
        }
    }
    let (train, val, test) = assign_splits(&generator, entries);
    let mut take = |list: Vec<ManifestEntry>| -> Vec<FeatureClip> {
        list.iter()
            .map(|e| clips.remove(&e.clip_id).expect("generated"))
            .collect()
    };
    Ok(SyntheticData {
        train: take(train),
        val: take(val),
        test: take(test),
    })
}
