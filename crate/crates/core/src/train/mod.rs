//! Losses, optimization, the training loop, transfer, subsampling and
//! ablations.

mod ablation;
mod config;
mod data;
mod loss;
mod normalizer;
mod optim;
mod subsample;
mod trainer;

pub use ablation::{pct_change, run_ablation_suite, AblationReport, AblationRow};
pub use config::TrainConfig;
pub use data::{
    examples_for, forecast_target, labeled_examples, predict, pretraining_examples, run_batch, task_target,
    BatchOutput, Example, Predictions, CHUNK,
};
pub use loss::{
    batch_task_loss, pretrain_loss, pretrain_loss_grad, task_loss, task_loss_grad, LossWeights, PretrainTerms,
};
pub use normalizer::{Normalizer, STD_FLOOR};
pub use optim::{cosine_lr, Adam, EarlyStopping, BETA1, BETA2, EPSILON};
pub use subsample::{stratified_indices, stratified_subsample};
pub use trainer::{
    evaluate_clips, init_model, pretrain_then_transfer, train, write_metrics_log, EpochRecord, TrainOutcome,
};
