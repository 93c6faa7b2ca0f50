use std::path::Path;

use serde::{Deserialize, Serialize};

use super::loss::LossWeights;
use crate::error::{Error, Result};
use crate::model::{Ablation, ModelConfig, Task};

/// Everything a training run depends on. Loaded from JSON; missing fields
/// take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub task: Task,
    pub lr: f64,
    pub batch_size: usize,
    /// `None` resolves to 100 for downstream tasks and 300 for pretraining.
    pub max_epochs: Option<usize>,
    pub patience: usize,
    pub weight_decay: f64,
    pub loss_weights: LossWeights,
    pub ablation: Ablation,
    pub seed: u64,
    pub subsample_ratio: f64,
    pub hidden_dim: usize,
    pub semantic_dim: usize,
    pub gcn_dim: usize,
    pub gcn_layers: usize,
    pub heads: usize,
    pub encoder: String,
}

impl Default for TrainConfig {
    fn default() -> Self {
        let m = ModelConfig::default();
        TrainConfig {
            task: Task::Detection,
            lr: 2e-4,
            batch_size: 40,
            max_epochs: None,
            patience: 5,
            weight_decay: 5e-4,
            loss_weights: LossWeights::default(),
            ablation: Ablation::None,
            seed: 0,
            subsample_ratio: 1.0,
            hidden_dim: m.hidden_dim,
            semantic_dim: m.semantic_dim,
            gcn_dim: m.gcn_dim,
            gcn_layers: m.gcn_layers,
            heads: m.heads,
            encoder: m.encoder,
        }
    }
}

impl TrainConfig {
    pub fn for_task(task: Task) -> Self {
        TrainConfig {
            task,
            ..TrainConfig::default()
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn epochs(&self) -> usize {
        self.max_epochs.unwrap_or(match self.task {
            Task::Pretraining => 300,
            _ => 100,
        })
    }

    /// Fills `max_epochs` so snapshots show the value actually used.
    pub fn resolved(&self) -> Self {
        TrainConfig {
            max_epochs: Some(self.epochs()),
            ..self.clone()
        }
    }

    pub fn model_config(&self) -> ModelConfig {
        ModelConfig {
            hidden_dim: self.hidden_dim,
            semantic_dim: self.semantic_dim,
            gcn_dim: self.gcn_dim,
            gcn_layers: self.gcn_layers,
            heads: self.heads,
            encoder: self.encoder.clone(),
            task: self.task,
            ablation: self.ablation,
            ..ModelConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return bad(format!("lr must be positive, got {}", self.lr));
        }
        if self.batch_size == 0 {
            return bad("batch_size must be positive".into());
        }
        if self.epochs() == 0 {
            return bad("max_epochs must be positive".into());
        }
        if !(self.weight_decay >= 0.0) {
            return bad(format!("weight_decay must be non-negative, got {}", self.weight_decay));
        }
        let w = self.loss_weights;
        if w.mse < 0.0 || w.consistency < 0.0 || ((w.mse + w.consistency) - 1.0).abs() > 1e-9 {
            return bad(format!(
                "loss weights must be non-negative and sum to 1, got {} + {}",
                w.mse, w.consistency
            ));
        }
        if !(self.subsample_ratio > 0.0 && self.subsample_ratio <= 1.0) {
            return bad(format!(
                "subsample_ratio must be in (0, 1], got {}",
                self.subsample_ratio
            ));
        }
        self.model_config().validate()
    }
}
