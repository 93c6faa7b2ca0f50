use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::TrainConfig;
use super::data::{examples_for, predict, run_batch, Example, Predictions};
use super::normalizer::Normalizer;
use super::optim::{cosine_lr, Adam, EarlyStopping};
use super::subsample::stratified_indices;
use crate::error::{Error, Result};
use crate::eval::headline_metric;
use crate::model::{ModelState, Task};
use crate::semantics::{BrainTaxonomy, TextEncoder};
use crate::signal::FeatureClip;

/// One line of the metrics log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub val_metric: Option<f64>,
    pub lr: f64,
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Model from the selected epoch.
    pub best: ModelState,
    pub best_epoch: usize,
    pub log: Vec<EpochRecord>,
    pub stopped_early: bool,
    /// Validation predictions of the selected model.
    pub val_predictions: Predictions,
}

/// Writes the log as JSON lines.
pub fn write_metrics_log(out: &mut impl Write, log: &[EpochRecord]) -> Result<()> {
    for r in log {
        serde_json::to_writer(&mut *out, r)?;
        out.write_all(b"\n").map_err(|e| Error::Io {
            path: "<metrics log>".into(),
            source: e,
        })?;
    }
    Ok(())
}

/// Fresh model for `config`, optionally initialized from a pretrained one.
pub fn init_model(
    config: &TrainConfig,
    taxonomy: &BrainTaxonomy,
    encoder: &dyn TextEncoder,
    pretrained: Option<&ModelState>,
) -> Result<ModelState> {
    let mut state = ModelState::new(config.model_config(), taxonomy.clone(), encoder, config.seed)?;
    if let Some(source) = pretrained {
        let copied = state.transfer_from(source)?;
        log::info!("transferred {} tensors from the pretrained model", copied.len());
    }
    Ok(state)
}

/// Downstream model with graph-construction and GCN weights copied from a
/// pretrained checkpoint; heads stay freshly initialized.
pub fn pretrain_then_transfer(
    pretrained: &ModelState,
    config: &TrainConfig,
    taxonomy: &BrainTaxonomy,
    encoder: &dyn TextEncoder,
) -> Result<ModelState> {
    if config.task == Task::Pretraining {
        return Err(Error::Config("transfer target must be a downstream task".into()));
    }
    init_model(config, taxonomy, encoder, Some(pretrained))
}

fn param_summary(state: &ModelState) -> String {
    state
        .params
        .tensors()
        .iter()
        .map(|t| {
            let norm = t.value.iter().map(|v| v * v).sum::<f64>().sqrt();
            format!("{}: norm {norm:.6e}", t.name)
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn better(task: Task, metric: Option<f64>, loss: f64, best: Option<(Option<f64>, f64)>) -> bool {
    let Some((best_metric, best_loss)) = best else {
        return true;
    };
    match (task, metric, best_metric) {
        (Task::Pretraining, _, _) => loss < best_loss,
        (_, Some(m), Some(b)) => m > b,
        (_, Some(_), None) => true,
        (_, None, Some(_)) => false,
        (_, None, None) => loss < best_loss,
    }
}

/// Trains on `train`, validating on `val` after every epoch.
///
/// Pretraining pairs every clip with the next window of the same recording
/// found in either split. The normalizer is fitted on the training clips
/// actually used. The model with the best validation metric is returned
/// (lowest validation loss for pretraining).
pub fn train(
    train: &[FeatureClip],
    val: &[FeatureClip],
    config: &TrainConfig,
    taxonomy: &BrainTaxonomy,
    encoder: &dyn TextEncoder,
    pretrained: Option<&ModelState>,
) -> Result<TrainOutcome> {
    config.validate()?;
    let task = config.task;
    let train_clips: Vec<FeatureClip> = if config.subsample_ratio < 1.0 {
        let labels: Vec<_> = train.iter().map(|c| c.label).collect();
        stratified_indices(&labels, config.subsample_ratio, config.seed)
            .into_iter()
            .map(|i| train[i].clone())
            .collect()
    } else {
        train.to_vec()
    };
    let pool: Vec<&FeatureClip> = train_clips.iter().chain(val.iter()).collect();
    let train_ex = examples_for(&train_clips, &pool, task);
    let val_ex = examples_for(val, &pool, task);
    if train_ex.is_empty() {
        return Err(Error::Config(format!("no training examples for task {}", task.name())));
    }
    if val_ex.is_empty() {
        return Err(Error::Config(format!(
            "no validation examples for task {}",
            task.name()
        )));
    }

    let mut state = init_model(config, taxonomy, encoder, pretrained)?;
    state.normalizer = Normalizer::fit(train_ex.iter().map(|e| e.clip));
    let mut adam = Adam::new(&state.params, config.weight_decay);
    let mut stopper = EarlyStopping::new(config.patience);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);

    let epochs = config.epochs();
    let mut log = Vec::new();
    let mut best: Option<(ModelState, usize, Option<f64>, f64, Predictions)> = None;
    let mut stopped_early = false;
    let mut order: Vec<usize> = (0..train_ex.len()).collect();
    for epoch in 0..epochs {
        let lr = cosine_lr(config.lr, epoch, epochs);
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for (b, idx) in order.chunks(config.batch_size).enumerate() {
            let batch: Vec<Example> = idx.iter().map(|&i| train_ex[i]).collect();
            let mut grads = state.params.zero_grads();
            let out = run_batch(&state, &batch, config.loss_weights, Some(&mut grads))?;
            let batch_loss: f64 = out.losses.iter().sum();
            if !batch_loss.is_finite() || !grads.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch: epoch + 1,
                    batch: b + 1,
                    diagnostics: format!(
                        "lr {lr:e}\nbatch loss {batch_loss}\nclips {}\n{}",
                        batch
                            .iter()
                            .map(|e| e.clip.clip_id.as_str())
                            .collect::<Vec<_>>()
                            .join(","),
                        param_summary(&state)
                    ),
                });
            }
            loss_sum += batch_loss;
            adam.step(&mut state.params, &grads, lr);
        }
        let preds = predict(&state, &val_ex, config.loss_weights)?;
        let metric = headline_metric(task, &preds);
        let record = EpochRecord {
            epoch: epoch + 1,
            train_loss: loss_sum / train_ex.len() as f64,
            val_loss: preds.mean_loss,
            val_metric: if task == Task::Pretraining {
                Some(preds.mean_loss)
            } else {
                metric
            },
            lr,
            alpha: state.alpha(),
        };
        log::info!(
            "epoch {} train {:.5} val {:.5} metric {:?}",
            record.epoch,
            record.train_loss,
            record.val_loss,
            record.val_metric
        );
        if !record.val_loss.is_finite() {
            return Err(Error::NonFiniteLoss {
                epoch: epoch + 1,
                batch: 0,
                diagnostics: format!("validation loss {}\n{}", record.val_loss, param_summary(&state)),
            });
        }
        if better(task, metric, preds.mean_loss, best.as_ref().map(|b| (b.2, b.3))) {
            best = Some((state.clone(), epoch + 1, metric, preds.mean_loss, preds));
        }
        let stop = stopper.observe(record.val_loss);
        log.push(record);
        if stop {
            stopped_early = true;
            break;
        }
    }
    let (best, best_epoch, _, _, val_predictions) = best.expect("at least one epoch");
    Ok(TrainOutcome {
        best,
        best_epoch,
        log,
        stopped_early,
        val_predictions,
    })
}

/// Runs `state` over the clips relevant to its task. Pretraining looks
/// continuations up among `clips` themselves.
pub fn evaluate_clips(state: &ModelState, clips: &[FeatureClip], config: &TrainConfig) -> Result<Predictions> {
    let pool: Vec<&FeatureClip> = clips.iter().collect();
    let ex = examples_for(clips, &pool, state.config.task);
    if ex.is_empty() {
        return Err(Error::Config(format!(
            "no examples for task {}",
            state.config.task.name()
        )));
    }
    predict(state, &ex, config.loss_weights)
}
