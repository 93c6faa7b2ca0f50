use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::config::TrainConfig;
use super::trainer::{evaluate_clips, train};
use crate::error::{Error, Result};
use crate::eval::{headline_metric, metric_name};
use crate::model::{Ablation, ModelState, Task};
use crate::semantics::{BrainTaxonomy, TextEncoder};
use crate::signal::FeatureClip;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub variant: Ablation,
    pub name: String,
    pub metric: f64,
    /// `(variant - full) / full * 100`; zero for the full model.
    pub pct_change: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    pub task: Task,
    pub metric: String,
    pub rows: Vec<AblationRow>,
}

pub fn pct_change(variant: f64, full: f64) -> f64 {
    (variant - full) / full * 100.0
}

impl AblationReport {
    /// Builds the report from per-variant metrics; the first entry must be
    /// the full model.
    pub fn from_metrics(task: Task, metrics: &[(Ablation, f64)]) -> Result<Self> {
        let full = match metrics.first() {
            Some(&(Ablation::None, m)) => m,
            _ => return Err(Error::invalid("ablation metrics must start with the full model")),
        };
        Ok(AblationReport {
            task,
            metric: metric_name(task).to_string(),
            rows: metrics
                .iter()
                .map(|&(variant, metric)| AblationRow {
                    variant,
                    name: variant.display().to_string(),
                    metric,
                    pct_change: if variant == Ablation::None {
                        0.0
                    } else {
                        pct_change(metric, full)
                    },
                })
                .collect(),
        })
    }

    /// Plain-text table: variant, metric, change.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<20} {:>12} {:>10}", "Model", self.metric, "change");
        for r in &self.rows {
            let change = if r.variant == Ablation::None {
                "-".to_string()
            } else {
                format!("{:+.2}%", r.pct_change)
            };
            let _ = writeln!(s, "{:<20} {:>12.4} {:>10}", r.name, r.metric, change);
        }
        s
    }
}

/// Trains the full model and the four single-context ablations with the
/// same seed and reports each variant's headline metric on `test` (or on
/// `val` when `test` is empty).
pub fn run_ablation_suite(
    train_clips: &[FeatureClip],
    val: &[FeatureClip],
    test: &[FeatureClip],
    base: &TrainConfig,
    taxonomy: &BrainTaxonomy,
    encoder: &dyn TextEncoder,
    pretrained: Option<&ModelState>,
) -> Result<AblationReport> {
    if base.task == Task::Pretraining {
        return Err(Error::Config("ablation suite needs a downstream task".into()));
    }
    let eval_clips = if test.is_empty() { val } else { test };
    let mut metrics = Vec::new();
    for variant in Ablation::ALL {
        let config = TrainConfig {
            ablation: variant,
            ..base.clone()
        };
        log::info!("ablation variant {}", variant.display());
        // transfer only applies where the architectures agree
        let init = pretrained.filter(|p| p.config.ablation == variant);
        let outcome = train(train_clips, val, &config, taxonomy, encoder, init)?;
        let preds = evaluate_clips(&outcome.best, eval_clips, &config)?;
        let metric = headline_metric(base.task, &preds).ok_or_else(|| {
            Error::UndefinedMetric(format!("{} undefined on evaluation split", metric_name(base.task)))
        })?;
        metrics.push((variant, metric));
    }
    AblationReport::from_metrics(base.task, &metrics)
}
