use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::signal::{DatasetManifest, Label};

/// Indices kept when sampling `round(ratio * count)` items of every label
/// without replacement. Each label draws from its own seeded stream.
/// Labels reduced to zero items are dropped with a warning. The result is
/// in ascending index order.
pub fn stratified_indices(labels: &[Label], ratio: f64, seed: u64) -> Vec<usize> {
    let mut by_label: BTreeMap<Label, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        by_label.entry(l).or_default().push(i);
    }
    let mut kept = Vec::new();
    for (label, members) in by_label {
        let take = (ratio * members.len() as f64).round() as usize;
        if take == 0 {
            log::warn!("subsampling removes every {} clip; class dropped", label.name());
            continue;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(u64::from(label.code()) + 1);
        let mut chosen: Vec<usize> = rand::seq::index::sample(&mut rng, members.len(), take)
            .into_iter()
            .map(|j| members[j])
            .collect();
        chosen.sort_unstable();
        kept.extend(chosen);
    }
    kept.sort_unstable();
    kept
}

/// Stratified subset of a manifest, sorted by clip id.
pub fn stratified_subsample(manifest: &DatasetManifest, ratio: f64, seed: u64) -> Result<DatasetManifest> {
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(Error::invalid(format!(
            "subsample ratio must be in (0, 1], got {ratio}"
        )));
    }
    let mut sorted = manifest.clone();
    sorted.sort_by_clip_id();
    let labels: Vec<Label> = sorted.entries.iter().map(|e| e.label).collect();
    let entries = stratified_indices(&labels, ratio, seed)
        .into_iter()
        .map(|i| sorted.entries[i].clone())
        .collect();
    Ok(DatasetManifest { entries, ..sorted })
}
