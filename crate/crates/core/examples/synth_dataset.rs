//! Generate a small seeded synthetic dataset on disk and inspect its splits.

use neurognn::signal::{generate_synthetic_dataset, Label, SynthConfig};

fn main() -> neurognn::Result<()> {
    let dir = tempfile::tempdir().expect("temp dir");
    let config = SynthConfig::new(
        [
            (Label::NonSeizure, 8),
            (Label::CF, 4),
            (Label::GN, 4),
            (Label::AB, 2),
            (Label::CT, 2),
        ],
        7,
    );
    let m = generate_synthetic_dataset(&config, dir.path(), false)?;
    for manifest in [&m.train, &m.val, &m.test] {
        println!(
            "{:<5} {:>3} clips {:?}",
            manifest.split.name(),
            manifest.entries.len(),
            manifest.class_counts()
        );
    }
    m.train.verify_files(dir.path())?;
    let first = &m.train.entries[0];
    println!(
        "first train clip: {} ({}) -> {}",
        first.clip_id,
        first.label.name(),
        first.path
    );
    Ok(())
}
