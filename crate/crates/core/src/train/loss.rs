use ndarray::{s, Array1, Array2};

use crate::error::{Error, Result};
use crate::semantics::{BrainTaxonomy, NodeLayout};

/// Weights of the two pretraining objectives; they sum to one.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LossWeights {
    pub mse: f64,
    pub consistency: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights {
            mse: 0.9,
            consistency: 0.1,
        }
    }
}

/// `-ln p[label]`.
pub fn task_loss(probs: &Array1<f64>, label: usize) -> f64 {
    -probs[label].ln()
}

/// Gradient of [`task_loss`] w.r.t. the logits that produced `probs`.
pub fn task_loss_grad(probs: &Array1<f64>, label: usize) -> Array1<f64> {
    let mut d = probs.clone();
    d[label] -= 1.0;
    d
}

/// Mean over the batch.
pub fn batch_task_loss(probs: &[Array1<f64>], labels: &[usize]) -> f64 {
    probs.iter().zip(labels).map(|(p, &l)| task_loss(p, l)).sum::<f64>() / probs.len() as f64
}

/// The two pretraining terms of one clip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PretrainTerms {
    pub mse: f64,
    pub consistency: f64,
    pub total: f64,
}

fn check_shapes(forecasts: &Array2<f64>, targets: &Array2<f64>, layout: NodeLayout) -> Result<()> {
    if forecasts.dim() != targets.dim() || forecasts.nrows() != layout.num_nodes() {
        return Err(Error::invalid(format!(
            "forecast {:?} / target {:?} do not match {} nodes",
            forecasts.dim(),
            targets.dim(),
            layout.num_nodes()
        )));
    }
    Ok(())
}

/// Weighted sum of the forecast MSE over all nodes and the mean over regions
/// of the MSE between each region's mean electrode forecast and its
/// meta-node forecast. Rows are nodes; columns are the flattened
/// `horizon x F` frames. Without meta-nodes the consistency term is zero.
pub fn pretrain_loss(
    forecasts: &Array2<f64>,
    targets: &Array2<f64>,
    taxonomy: &BrainTaxonomy,
    layout: NodeLayout,
    weights: LossWeights,
) -> Result<PretrainTerms> {
    check_shapes(forecasts, targets, layout)?;
    let mse = (forecasts - targets).mapv(|e| e * e).mean().unwrap_or(0.0);
    let consistency = if layout.has_meta() {
        (0..taxonomy.num_regions())
            .map(|r| {
                let diff = region_mean(forecasts, taxonomy.members(r)) - forecasts.row(layout.num_electrodes + r);
                diff.mapv(|e| e * e).mean().unwrap_or(0.0)
            })
            .sum::<f64>()
            / taxonomy.num_regions() as f64
    } else {
        0.0
    };
    Ok(PretrainTerms {
        mse,
        consistency,
        total: weights.mse * mse + weights.consistency * consistency,
    })
}

fn region_mean(forecasts: &Array2<f64>, members: &[usize]) -> Array1<f64> {
    let mut acc = Array1::zeros(forecasts.ncols());
    for &m in members {
        acc += &forecasts.row(m);
    }
    acc / members.len() as f64
}

/// Gradient of [`pretrain_loss`]'s total w.r.t. the forecasts.
pub fn pretrain_loss_grad(
    forecasts: &Array2<f64>,
    targets: &Array2<f64>,
    taxonomy: &BrainTaxonomy,
    layout: NodeLayout,
    weights: LossWeights,
) -> Result<Array2<f64>> {
    check_shapes(forecasts, targets, layout)?;
    let mut d = (forecasts - targets) * (2.0 * weights.mse / forecasts.len() as f64);
    if layout.has_meta() {
        let regions = taxonomy.num_regions() as f64;
        let scale = 2.0 * weights.consistency / (forecasts.ncols() as f64 * regions);
        for r in 0..taxonomy.num_regions() {
            let members = taxonomy.members(r);
            let meta = layout.num_electrodes + r;
            let diff = region_mean(forecasts, members) - forecasts.row(meta);
            let share = &diff * (scale / members.len() as f64);
            for &m in members {
                let mut row = d.row_mut(m);
                row += &share;
            }
            let mut row = d.slice_mut(s![meta, ..]);
            row.scaled_add(-scale, &diff);
        }
    }
    Ok(d)
}
