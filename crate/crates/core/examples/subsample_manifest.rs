//! Stratified subsampling of a training manifest at the usual ratio grid.

use neurognn::signal::{generate_synthetic_dataset, Label, SynthConfig};
use neurognn::train::stratified_subsample;

fn main() -> neurognn::Result<()> {
    let dir = tempfile::tempdir().expect("temp dir");
    let config = SynthConfig::new(
        [
            (Label::NonSeizure, 20),
            (Label::CF, 10),
            (Label::GN, 10),
            (Label::AB, 4),
            (Label::CT, 4),
        ],
        3,
    );
    let manifests = generate_synthetic_dataset(&config, dir.path(), true)?;
    println!("full      {:?}", manifests.train.class_counts());
    for ratio in [0.8, 0.6, 0.4, 0.2] {
        let sub = stratified_subsample(&manifests.train, ratio, 0)?;
        println!("ratio {ratio}  {:?}", sub.class_counts());
    }
    Ok(())
}
