//! Clip and manifest formats, synthetic EEG generation and preprocessing
//! from raw multichannel signal to per-second log-amplitude spectra.

mod clip;
mod manifest;
mod preprocess;
mod synth;

pub use clip::{read_clip_file, write_feature_clip, write_raw_clip, ClipFile, FeatureClip, Label, RawClip, CLIP_MAGIC};
pub use manifest::{split_train_val, DatasetManifest, ManifestEntry, Split, MANIFEST_VERSION};
pub use preprocess::{
    amplitude_spectrum, clip_to_features, fft_log_amplitude, resample, window_and_label, Annotation, Recording,
    WindowMode, CLIP_SECONDS, FREQ_BINS, LOG_EPSILON, SAMPLE_RATE_HZ, SEGMENT_LEN,
};
pub use synth::{
    generate_synthetic_dataset, synthesize_features, ClassSignature, RecordingPlan, SynthConfig, SyntheticData,
    SyntheticGenerator, SyntheticManifests,
};

/// Parses a clip id of the form `<recording>-w<index>` produced by
/// [`window_and_label`] and the synthetic generator.
pub fn parse_window_id(clip_id: &str) -> Option<(&str, usize)> {
    let (recording, index) = clip_id.rsplit_once("-w")?;
    index.parse().ok().map(|i| (recording, i))
}

/// Builds the clip id for window `index` of `recording`.
pub fn window_id(recording: &str, index: usize) -> String {
    format!("{recording}-w{index:04}")
}
