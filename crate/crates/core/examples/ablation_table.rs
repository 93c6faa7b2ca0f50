//! Train the full model and the four single-context ablations; print the
//! comparison table.

use neurognn::model::Task;
use neurognn::semantics::{BrainTaxonomy, FallbackEncoder};
use neurognn::signal::{synthesize_features, Label, SynthConfig};
use neurognn::train::{run_ablation_suite, TrainConfig};

fn main() -> neurognn::Result<()> {
    let mut synth = SynthConfig::new([(Label::NonSeizure, 12), (Label::GN, 6), (Label::CT, 6)], 9);
    synth.val_fraction = 0.25;
    let data = synthesize_features(&synth)?;
    let config = TrainConfig {
        task: Task::Detection,
        hidden_dim: 8,
        semantic_dim: 8,
        gcn_dim: 8,
        heads: 2,
        lr: 1e-3,
        batch_size: 8,
        max_epochs: Some(2),
        seed: 4,
        ..TrainConfig::default()
    };
    let report = run_ablation_suite(
        &data.train,
        &data.val,
        &data.test,
        &config,
        &BrainTaxonomy::default_10_20(),
        &FallbackEncoder,
        None,
    )?;
    print!("{}", report.to_table());
    Ok(())
}
