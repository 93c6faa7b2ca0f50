use ndarray::{Array1, Array3, ArrayView3, Axis};

use crate::model::round_f32;
use crate::signal::FeatureClip;

/// Smallest standard deviation kept after fitting.
pub const STD_FLOOR: f64 = 1e-6;

/// Per-frequency-bin z-score fitted on the training split.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalizer {
    pub mean: Array1<f64>,
    pub std: Array1<f64>,
}

/// Rounds to f32 without dropping below [`STD_FLOOR`].
fn floor_f32(v: f64) -> f64 {
    let r = round_f32(v.max(STD_FLOOR));
    if r < STD_FLOOR {
        f64::from((r as f32).next_up())
    } else {
        r
    }
}

impl Normalizer {
    pub fn identity(bins: usize) -> Self {
        Normalizer {
            mean: Array1::zeros(bins),
            std: Array1::ones(bins),
        }
    }

    /// Statistics over every electrode and frame of every clip, per bin.
    /// Values are rounded to f32 so a checkpoint reproduces them exactly.
    pub fn fit<'a>(clips: impl IntoIterator<Item = &'a FeatureClip>) -> Self {
        let mut sum: Option<Array1<f64>> = None;
        let mut sq: Option<Array1<f64>> = None;
        let mut count = 0usize;
        for clip in clips {
            let (n, t, f) = clip.features.dim();
            let flat = clip
                .features
                .view()
                .into_shape_with_order((n * t, f))
                .expect("contiguous clip");
            let s = sum.get_or_insert_with(|| Array1::zeros(f));
            let q = sq.get_or_insert_with(|| Array1::zeros(f));
            for row in flat.rows() {
                for (k, &v) in row.iter().enumerate() {
                    let v = v as f64;
                    s[k] += v;
                    q[k] += v * v;
                }
            }
            count += n * t;
        }
        let (Some(sum), Some(sq)) = (sum, sq) else {
            return Normalizer::identity(0);
        };
        let c = count as f64;
        let mean = &sum / c;
        let var = (&sq / c - &mean * &mean).mapv(|v| v.max(0.0));
        Normalizer {
            mean: mean.mapv(round_f32),
            std: var.mapv(|v| floor_f32(v.sqrt())),
        }
    }

    /// `(x - mean) / std` along the last axis.
    pub fn apply(&self, x: ArrayView3<f32>) -> Array3<f64> {
        let mut out = x.mapv(|v| v as f64);
        for mut lane in out.lanes_mut(Axis(2)) {
            lane -= &self.mean;
            lane /= &self.std;
        }
        out
    }
}
