//! Train a small seizure detector on synthetic data and report test AUROC.
//! Set `NEUROGNN_EPOCHS` for a longer run.

use neurognn::eval::{headline_metric, EvalReport};
use neurognn::model::Task;
use neurognn::semantics::{BrainTaxonomy, FallbackEncoder};
use neurognn::signal::{synthesize_features, Label, SynthConfig};
use neurognn::train::{evaluate_clips, train, TrainConfig};

fn main() -> neurognn::Result<()> {
    let epochs = std::env::var("NEUROGNN_EPOCHS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(3);
    let mut synth = SynthConfig::new(
        [
            (Label::NonSeizure, 24),
            (Label::CF, 6),
            (Label::GN, 6),
            (Label::AB, 6),
            (Label::CT, 6),
        ],
        11,
    );
    synth.val_fraction = 0.2;
    let data = synthesize_features(&synth)?;
    let config = TrainConfig {
        task: Task::Detection,
        hidden_dim: 16,
        semantic_dim: 16,
        gcn_dim: 8,
        heads: 4,
        lr: 1e-3,
        batch_size: 8,
        max_epochs: Some(epochs),
        seed: 1,
        ..TrainConfig::default()
    };
    let outcome = train(
        &data.train,
        &data.val,
        &config,
        &BrainTaxonomy::default_10_20(),
        &FallbackEncoder,
        None,
    )?;
    for r in &outcome.log {
        println!(
            "epoch {:>2}  train {:.4}  val {:.4}  auroc {:?}",
            r.epoch, r.train_loss, r.val_loss, r.val_metric
        );
    }
    let preds = evaluate_clips(&outcome.best, &data.test, &config)?;
    let report = EvalReport::from_predictions(Task::Detection, &preds)?;
    println!(
        "best epoch {}; test AUROC {:?}",
        outcome.best_epoch,
        headline_metric(Task::Detection, &preds)
    );
    println!("confusion {:?}", report.confusion);
    Ok(())
}
