use std::collections::BTreeMap;

use ndarray::{s, Array1, Array2};

use super::loss::{pretrain_loss, pretrain_loss_grad, task_loss, task_loss_grad, LossWeights};
use crate::error::{Error, Result};
use crate::model::{Grads, ModelState, Task};
use crate::signal::{parse_window_id, window_id, FeatureClip, Label};

/// Clips pushed through the network together. Larger batches are split
/// into chunks of this size and their gradients accumulated, which bounds
/// peak memory without changing the result.
pub const CHUNK: usize = 8;

/// One training or evaluation example. Pretraining examples carry the
/// window that follows `clip` in its recording.
#[derive(Debug, Clone, Copy)]
pub struct Example<'a> {
    pub clip: &'a FeatureClip,
    pub next: Option<&'a FeatureClip>,
}

/// Class index of a label under `task`; `None` when the clip does not take
/// part in that task.
pub fn task_target(label: Label, task: Task) -> Option<usize> {
    match task {
        Task::Detection => Some(usize::from(label.is_seizure())),
        Task::Classification => label.seizure_class(),
        Task::Pretraining => None,
    }
}

/// Downstream examples; non-seizure clips are dropped for classification.
pub fn labeled_examples(clips: &[FeatureClip], task: Task) -> Vec<Example<'_>> {
    clips
        .iter()
        .filter(|c| task_target(c.label, task).is_some())
        .map(|clip| Example { clip, next: None })
        .collect()
}

/// Pairs each clip with the next window of its recording, looked up in
/// `pool`. Clips without a continuation are skipped.
pub fn pretraining_examples<'a>(clips: &'a [FeatureClip], pool: &[&'a FeatureClip]) -> Vec<Example<'a>> {
    let by_id: BTreeMap<&str, &FeatureClip> = pool.iter().map(|c| (c.clip_id.as_str(), *c)).collect();
    clips
        .iter()
        .filter_map(|clip| {
            let (rec, idx) = parse_window_id(&clip.clip_id)?;
            let next = by_id.get(window_id(rec, idx + 1).as_str())?;
            Some(Example { clip, next: Some(next) })
        })
        .collect()
}

/// Forecast target: the first `horizon` frames of the continuation,
/// standardized and extended with meta-nodes, flattened per node.
pub fn forecast_target(state: &ModelState, next: &FeatureClip) -> Result<Array2<f64>> {
    let h = state.config.horizon;
    if next.features.dim().1 < h {
        return Err(Error::invalid(format!(
            "continuation {} has fewer than {h} frames",
            next.clip_id
        )));
    }
    let x = state.prepare_input(next.features.slice(s![.., ..h, ..]))?;
    let (n, t, f) = x.dim();
    Ok(x.as_standard_layout()
        .into_owned()
        .into_shape_with_order((n, t * f))
        .expect("contiguous"))
}

/// Per-example outputs of [`run_batch`].
#[derive(Debug, Clone, Default)]
pub struct BatchOutput {
    pub losses: Vec<f64>,
    /// Class probabilities (downstream tasks only).
    pub probs: Vec<Array1<f64>>,
    pub embeddings: Vec<Array1<f64>>,
}

/// Forward pass over `examples` and, when `grads` is given, backward pass
/// of the mean loss.
pub fn run_batch(
    state: &ModelState,
    examples: &[Example<'_>],
    weights: LossWeights,
    mut grads: Option<&mut Grads>,
) -> Result<BatchOutput> {
    let scale = 1.0 / examples.len().max(1) as f64;
    let mut out = BatchOutput::default();
    for chunk in examples.chunks(CHUNK) {
        let inputs = chunk
            .iter()
            .map(|ex| state.prepare_input(ex.clip.features.view()))
            .collect::<Result<Vec<_>>>()?;
        let fwd = state.forward(&inputs)?;
        let mut d_v = Vec::with_capacity(chunk.len());
        for (ex, clip) in chunk.iter().zip(&fwd.clips) {
            out.embeddings.push(clip.g.clone());
            match state.config.task {
                Task::Pretraining => {
                    let next = ex
                        .next
                        .ok_or_else(|| Error::invalid(format!("{} has no continuation", ex.clip.clip_id)))?;
                    let target = forecast_target(state, next)?;
                    let forecast = state.forecast(&clip.v_out);
                    let layout = state.layout();
                    out.losses
                        .push(pretrain_loss(&forecast, &target, state.taxonomy(), layout, weights)?.total);
                    if let Some(g) = grads.as_deref_mut() {
                        let d = pretrain_loss_grad(&forecast, &target, state.taxonomy(), layout, weights)? * scale;
                        d_v.push(state.forecast_backward(clip, &d, g));
                    }
                }
                task => {
                    let label = task_target(ex.clip.label, task)
                        .ok_or_else(|| Error::invalid(format!("{} has no {} label", ex.clip.clip_id, task.name())))?;
                    let cache = state.classify(&clip.g);
                    out.losses.push(task_loss(&cache.probs, label));
                    if let Some(g) = grads.as_deref_mut() {
                        let d = task_loss_grad(&cache.probs, label) * scale;
                        d_v.push(state.classify_backward(clip, &cache, &d, g));
                    }
                    out.probs.push(cache.probs);
                }
            }
        }
        if let Some(g) = grads.as_deref_mut() {
            state.backward(&fwd, &d_v, g);
        }
    }
    Ok(out)
}

/// Inference results over a clip list, in input order.
#[derive(Debug, Clone)]
pub struct Predictions {
    pub clip_ids: Vec<String>,
    pub labels: Vec<Label>,
    /// Class targets under the model's task (empty for pretraining).
    pub targets: Vec<usize>,
    pub probs: Vec<Array1<f64>>,
    pub embeddings: Vec<Array1<f64>>,
    pub mean_loss: f64,
}

/// Runs the model on every example without touching its parameters.
pub fn predict(state: &ModelState, examples: &[Example<'_>], weights: LossWeights) -> Result<Predictions> {
    let out = run_batch(state, examples, weights, None)?;
    let task = state.config.task;
    Ok(Predictions {
        clip_ids: examples.iter().map(|e| e.clip.clip_id.clone()).collect(),
        labels: examples.iter().map(|e| e.clip.label).collect(),
        targets: examples
            .iter()
            .filter_map(|e| task_target(e.clip.label, task))
            .collect(),
        mean_loss: out.losses.iter().sum::<f64>() / out.losses.len().max(1) as f64,
        probs: out.probs,
        embeddings: out.embeddings,
    })
}

/// Examples of `task` built from `clips`; pretraining looks continuations
/// up in `pool`.
pub fn examples_for<'a>(clips: &'a [FeatureClip], pool: &[&'a FeatureClip], task: Task) -> Vec<Example<'a>> {
    match task {
        Task::Pretraining => pretraining_examples(clips, pool),
        task => labeled_examples(clips, task),
    }
}
