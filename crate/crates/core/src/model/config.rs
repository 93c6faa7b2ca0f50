use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{CLIP_SECONDS, FREQ_BINS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Detection,
    Classification,
    Pretraining,
}

impl Task {
    pub fn num_classes(self) -> usize {
        match self {
            Task::Detection => 2,
            Task::Classification => 4,
            Task::Pretraining => 0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Task::Detection => "detection",
            Task::Classification => "classification",
            Task::Pretraining => "pretraining",
        }
    }
}

/// Model variants with one graph context removed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Ablation {
    #[default]
    None,
    /// `S = threshold(S_Gate)`; no attention.
    NoTemporal,
    /// No semantic columns in `V`; `S_Gate = S_D`.
    NoSemantics,
    /// `S_Gate = S_E`.
    NoSpace,
    /// Electrodes only; region pooling without the meta-node vector.
    NoMeta,
}

impl Ablation {
    pub const ALL: [Ablation; 5] = [
        Ablation::None,
        Ablation::NoTemporal,
        Ablation::NoSemantics,
        Ablation::NoSpace,
        Ablation::NoMeta,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Ablation::None => "none",
            Ablation::NoTemporal => "no_temporal",
            Ablation::NoSemantics => "no_semantics",
            Ablation::NoSpace => "no_space",
            Ablation::NoMeta => "no_meta",
        }
    }

    /// Row label used in ablation reports.
    pub fn display(self) -> &'static str {
        match self {
            Ablation::None => "NeuroGNN",
            Ablation::NoTemporal => "w/o. TemporalCorr",
            Ablation::NoSemantics => "w/o. Semantics",
            Ablation::NoSpace => "w/o. Space",
            Ablation::NoMeta => "w/o. Meta-Nodes",
        }
    }

    pub fn parse(s: &str) -> Option<Ablation> {
        Ablation::ALL.into_iter().find(|a| a.name() == s)
    }

    pub fn uses_temporal(self) -> bool {
        self != Ablation::NoTemporal
    }

    pub fn uses_semantics(self) -> bool {
        self != Ablation::NoSemantics
    }

    pub fn uses_space(self) -> bool {
        self != Ablation::NoSpace
    }

    pub fn uses_meta(self) -> bool {
        self != Ablation::NoMeta
    }
}

/// Architecture hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    /// BiGRU hidden size per direction (M).
    pub hidden_dim: usize,
    /// Semantic embedding size (K).
    pub semantic_dim: usize,
    /// GCN node embedding size (Z).
    pub gcn_dim: usize,
    /// GCN layers including the projection layer.
    pub gcn_layers: usize,
    pub heads: usize,
    pub freq_bins: usize,
    pub frames: usize,
    /// Forecast horizon in frames.
    pub horizon: usize,
    /// `fallback` or `external:<name>`.
    pub encoder: String,
    pub task: Task,
    pub ablation: Ablation,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            hidden_dim: 512,
            semantic_dim: 512,
            gcn_dim: 256,
            gcn_layers: 3,
            heads: 8,
            freq_bins: FREQ_BINS,
            frames: CLIP_SECONDS,
            horizon: 12,
            encoder: "fallback".into(),
            task: Task::Detection,
            ablation: Ablation::None,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.hidden_dim == 0 || self.semantic_dim == 0 || self.gcn_dim < 2 {
            return fail("model dimensions must be positive (gcn_dim >= 2)".into());
        }
        if self.gcn_layers < 2 {
            return fail(format!("gcn_layers must be >= 2, got {}", self.gcn_layers));
        }
        if self.heads == 0 || (2 * self.hidden_dim) % self.heads != 0 {
            return fail(format!(
                "2 * hidden_dim ({}) must be divisible by heads ({})",
                2 * self.hidden_dim,
                self.heads
            ));
        }
        if self.freq_bins == 0 || self.frames == 0 || self.horizon == 0 {
            return fail("freq_bins, frames and horizon must be positive".into());
        }
        Ok(())
    }

    /// Width of the node feature matrix V.
    pub fn node_feature_dim(&self) -> usize {
        2 * self.hidden_dim
            + if self.ablation.uses_semantics() {
                self.semantic_dim
            } else {
                0
            }
    }
}
