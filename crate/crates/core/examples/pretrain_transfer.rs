//! Forecasting pretraining followed by transfer into a classification model.

use neurognn::model::Task;
use neurognn::semantics::{BrainTaxonomy, FallbackEncoder};
use neurognn::signal::{synthesize_features, Label, SynthConfig};
use neurognn::train::{pretrain_then_transfer, train, TrainConfig};

fn main() -> neurognn::Result<()> {
    let mut synth = SynthConfig::new([(Label::CF, 8), (Label::GN, 8), (Label::AB, 8), (Label::CT, 8)], 5);
    synth.val_fraction = 0.25;
    let data = synthesize_features(&synth)?;
    let taxonomy = BrainTaxonomy::default_10_20();
    let small = TrainConfig {
        hidden_dim: 16,
        semantic_dim: 16,
        gcn_dim: 8,
        heads: 4,
        lr: 1e-3,
        batch_size: 8,
        max_epochs: Some(2),
        seed: 2,
        ..TrainConfig::default()
    };
    let pre_config = TrainConfig {
        task: Task::Pretraining,
        ..small.clone()
    };
    let pre = train(&data.train, &data.val, &pre_config, &taxonomy, &FallbackEncoder, None)?;
    for r in &pre.log {
        println!(
            "pretrain epoch {}  train {:.4}  val {:.4}",
            r.epoch, r.train_loss, r.val_loss
        );
    }
    let cls_config = TrainConfig {
        task: Task::Classification,
        ..small
    };
    let init = pretrain_then_transfer(&pre.best, &cls_config, &taxonomy, &FallbackEncoder)?;
    let shared = init
        .params
        .tensors()
        .iter()
        .filter(|t| pre.best.params.by_name(&t.name).is_some_and(|s| s.value == t.value))
        .count();
    println!("{shared} of {} tensors carried over", init.params.len());
    let cls = train(
        &data.train,
        &data.val,
        &cls_config,
        &taxonomy,
        &FallbackEncoder,
        Some(&pre.best),
    )?;
    println!("classification val loss after epoch 1: {:.4}", cls.log[0].val_loss);
    Ok(())
}
