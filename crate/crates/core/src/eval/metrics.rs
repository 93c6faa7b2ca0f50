use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::Task;
use crate::signal::Label;
use crate::train::Predictions;

/// Probability that a random positive scores above a random negative, ties
/// counting one half. Computed from average ranks.
pub fn auroc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::invalid(format!(
            "{} scores for {} labels",
            scores.len(),
            labels.len()
        )));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::NumericInput("NaN score".into()));
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::UndefinedMetric(format!(
            "AUROC needs both classes ({pos} positive, {neg} negative)"
        )));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // ranks i+1 ..= j+1 share their average
        let avg = (i + j + 2) as f64 / 2.0;
        rank_sum += avg * order[i..=j].iter().filter(|&&k| labels[k]).count() as f64;
        i = j + 1;
    }
    let (p, n) = (pos as f64, neg as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

/// `counts[true][predicted]`.
pub fn confusion_matrix(predictions: &[usize], labels: &[usize], num_classes: usize) -> Vec<Vec<usize>> {
    let mut m = vec![vec![0; num_classes]; num_classes];
    for (&p, &l) in predictions.iter().zip(labels) {
        m[l][p] += 1;
    }
    m
}

/// F1 of every class, zero where precision + recall is zero.
pub fn per_class_f1(confusion: &[Vec<usize>]) -> Vec<f64> {
    let k = confusion.len();
    (0..k)
        .map(|c| {
            let tp = confusion[c][c] as f64;
            let predicted: usize = (0..k).map(|r| confusion[r][c]).sum();
            let support: usize = confusion[c].iter().sum();
            let precision = if predicted > 0 { tp / predicted as f64 } else { 0.0 };
            let recall = if support > 0 { tp / support as f64 } else { 0.0 };
            if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            }
        })
        .collect()
}

/// Support-weighted mean of per-class F1.
pub fn weighted_f1(predictions: &[usize], labels: &[usize], num_classes: usize) -> f64 {
    if labels.is_empty() {
        return 0.0;
    }
    let cm = confusion_matrix(predictions, labels, num_classes);
    let f1 = per_class_f1(&cm);
    cm.iter()
        .zip(&f1)
        .map(|(row, f)| row.iter().sum::<usize>() as f64 * f)
        .sum::<f64>()
        / labels.len() as f64
}

pub fn argmax(v: &ndarray::Array1<f64>) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Class names in target-index order.
pub fn class_names(task: Task) -> Vec<String> {
    match task {
        Task::Detection => vec!["non_seizure".into(), "seizure".into()],
        Task::Classification => Label::SEIZURE_TYPES.iter().map(|l| l.name().to_string()).collect(),
        Task::Pretraining => Vec::new(),
    }
}

/// Headline metric of a task: AUROC for detection, weighted F1 for
/// classification. `None` for pretraining or when undefined.
pub fn headline_metric(task: Task, preds: &Predictions) -> Option<f64> {
    match task {
        Task::Detection => {
            let scores: Vec<f64> = preds.probs.iter().map(|p| p[1]).collect();
            let labels: Vec<bool> = preds.targets.iter().map(|&t| t == 1).collect();
            auroc(&scores, &labels).ok()
        }
        Task::Classification => {
            let predicted: Vec<usize> = preds.probs.iter().map(argmax).collect();
            Some(weighted_f1(&predicted, &preds.targets, task.num_classes()))
        }
        Task::Pretraining => None,
    }
}

pub fn metric_name(task: Task) -> &'static str {
    match task {
        Task::Detection => "auroc",
        Task::Classification => "weighted_f1",
        Task::Pretraining => "val_loss",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: Task,
    pub metrics: BTreeMap<String, f64>,
    pub loss: f64,
    pub class_names: Vec<String>,
    pub confusion: Vec<Vec<usize>>,
    pub per_class_f1: Vec<f64>,
    pub n_samples: usize,
}

impl EvalReport {
    pub fn from_predictions(task: Task, preds: &Predictions) -> Result<Self> {
        let mut metrics = BTreeMap::new();
        let (confusion, f1) = if task == Task::Pretraining {
            (Vec::new(), Vec::new())
        } else {
            let k = task.num_classes();
            let predicted: Vec<usize> = preds.probs.iter().map(argmax).collect();
            let cm = confusion_matrix(&predicted, &preds.targets, k);
            let correct = predicted.iter().zip(&preds.targets).filter(|(p, t)| p == t).count();
            if !preds.targets.is_empty() {
                metrics.insert("accuracy".into(), correct as f64 / preds.targets.len() as f64);
            }
            metrics.insert("weighted_f1".into(), weighted_f1(&predicted, &preds.targets, k));
            if task == Task::Detection {
                if let Some(a) = headline_metric(task, preds) {
                    metrics.insert("auroc".into(), a);
                }
            }
            let f1 = per_class_f1(&cm);
            (cm, f1)
        };
        Ok(EvalReport {
            task,
            metrics,
            loss: preds.mean_loss,
            class_names: class_names(task),
            confusion,
            per_class_f1: f1,
            n_samples: preds.clip_ids.len(),
        })
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

/// Mean and population standard deviation.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}
