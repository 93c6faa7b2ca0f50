use ndarray::Array2;

use crate::model::{round_f32, Grads, ParamStore};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const EPSILON: f64 = 1e-8;

/// Adam with an L2 penalty folded into the gradient of decayed tensors.
#[derive(Debug, Clone)]
pub struct Adam {
    pub weight_decay: f64,
    m: Vec<Array2<f64>>,
    v: Vec<Array2<f64>>,
    t: i32,
}

impl Adam {
    pub fn new(params: &ParamStore, weight_decay: f64) -> Self {
        let zeros = || {
            params
                .tensors()
                .iter()
                .map(|t| Array2::zeros(t.value.raw_dim()))
                .collect()
        };
        Adam {
            weight_decay,
            m: zeros(),
            v: zeros(),
            t: 0,
        }
    }

    pub fn steps(&self) -> i32 {
        self.t
    }

    /// One update. Parameters are rounded to f32 afterwards so stored
    /// checkpoints reproduce the in-memory model exactly.
    pub fn step(&mut self, params: &mut ParamStore, grads: &Grads, lr: f64) {
        self.t += 1;
        let c1 = 1.0 - BETA1.powi(self.t);
        let c2 = 1.0 - BETA2.powi(self.t);
        for (i, tensor) in params.tensors_mut().iter_mut().enumerate() {
            let decay = if tensor.decay { self.weight_decay } else { 0.0 };
            let m = &mut self.m[i];
            let v = &mut self.v[i];
            ndarray::Zip::from(&mut tensor.value)
                .and(m)
                .and(v)
                .and(&grads.0[i])
                .for_each(|w, m, v, &g| {
                    let g = g + decay * *w;
                    *m = BETA1 * *m + (1.0 - BETA1) * g;
                    *v = BETA2 * *v + (1.0 - BETA2) * g * g;
                    let step = lr * (*m / c1) / ((*v / c2).sqrt() + EPSILON);
                    *w = round_f32(*w - step);
                });
        }
    }
}

/// Cosine annealing from `base` at epoch 0 to zero at `max_epochs - 1`.
pub fn cosine_lr(base: f64, epoch: usize, max_epochs: usize) -> f64 {
    if max_epochs <= 1 {
        return base;
    }
    let progress = epoch.min(max_epochs - 1) as f64 / (max_epochs - 1) as f64;
    base * 0.5 * (1.0 + (std::f64::consts::PI * progress).cos())
}

/// Stops once the validation loss has risen `patience` epochs in a row.
#[derive(Debug, Clone)]
pub struct EarlyStopping {
    patience: usize,
    previous: Option<f64>,
    rises: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        EarlyStopping {
            patience,
            previous: None,
            rises: 0,
        }
    }

    /// Records one epoch's validation loss; true means stop now.
    pub fn observe(&mut self, val_loss: f64) -> bool {
        if let Some(prev) = self.previous {
            if val_loss > prev {
                self.rises += 1;
            } else {
                self.rises = 0;
            }
        }
        self.previous = Some(val_loss);
        self.patience > 0 && self.rises >= self.patience
    }
}
