use ndarray::{Array1, Array2, Axis};

/// Numerically stable softmax.
pub fn softmax(logits: &Array1<f64>) -> Array1<f64> {
    let max = logits.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let e = logits.mapv(|v| (v - max).exp());
    let sum = e.sum();
    e / sum
}

#[derive(Debug, Clone)]
pub struct MlpCache {
    pub hidden_pre: Array1<f64>,
    pub hidden: Array1<f64>,
    pub probs: Array1<f64>,
}

/// Two-layer classifier `Z -> Z/2 -> classes` with relu and softmax.
pub fn classify(g: &Array1<f64>, w1: &Array2<f64>, b1: &Array1<f64>, w2: &Array2<f64>, b2: &Array1<f64>) -> MlpCache {
    let hidden_pre = g.dot(w1) + b1;
    let hidden = hidden_pre.mapv(|v| v.max(0.0));
    let probs = softmax(&(hidden.dot(w2) + b2));
    MlpCache {
        hidden_pre,
        hidden,
        probs,
    }
}

pub struct MlpGrads {
    pub d_g: Array1<f64>,
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
}

/// Backward pass from the gradient w.r.t. the logits.
pub fn classify_backward(
    cache: &MlpCache,
    g: &Array1<f64>,
    w1: &Array2<f64>,
    w2: &Array2<f64>,
    d_logits: &Array1<f64>,
) -> MlpGrads {
    let outer = |a: &Array1<f64>, b: &Array1<f64>| a.view().insert_axis(Axis(1)).dot(&b.view().insert_axis(Axis(0)));
    let d_w2 = outer(&cache.hidden, d_logits);
    let mut d_hidden = w2.dot(d_logits);
    d_hidden.zip_mut_with(&cache.hidden_pre, |d, &p| {
        if p <= 0.0 {
            *d = 0.0;
        }
    });
    MlpGrads {
        d_g: w1.dot(&d_hidden),
        w1: outer(g, &d_hidden),
        b1: d_hidden,
        w2: d_w2,
        b2: d_logits.clone(),
    }
}

/// Shared affine map per node: `V' W + b`, one row of `horizon * F` values
/// per node.
pub fn forecast_head(v_out: &Array2<f64>, w: &Array2<f64>, b: &Array1<f64>) -> Array2<f64> {
    v_out.dot(w) + b
}

/// Returns `(dV', dW, db)`.
pub fn forecast_head_backward(
    v_out: &Array2<f64>,
    w: &Array2<f64>,
    d_forecast: &Array2<f64>,
) -> (Array2<f64>, Array2<f64>, Array1<f64>) {
    (
        d_forecast.dot(&w.t()),
        v_out.t().dot(d_forecast),
        d_forecast.sum_axis(Axis(0)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_matches_exp_over_sum() {
        let logits = Array1::from(vec![0.3, -1.2, 2.5, 0.0, 1.1]);
        let p = softmax(&logits);
        let z: f64 = logits.iter().map(|v| v.exp()).sum();
        for (a, l) in p.iter().zip(logits.iter()) {
            assert!((a - l.exp() / z).abs() < 1e-9);
        }
        assert!((p.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_parameters_give_uniform_probabilities() {
        let g = Array1::from(vec![1.0, -2.0, 3.0, 0.5]);
        let out = classify(
            &g,
            &Array2::zeros((4, 2)),
            &Array1::zeros(2),
            &Array2::zeros((2, 4)),
            &Array1::zeros(4),
        );
        assert!(out.probs.iter().all(|&p| (p - 0.25).abs() < 1e-15));
    }

    #[test]
    fn zero_forecast_head_is_zero() {
        let v = Array2::from_elem((5, 3), 2.0);
        let f = forecast_head(&v, &Array2::zeros((3, 24)), &Array1::zeros(24));
        assert_eq!(f.dim(), (5, 24));
        assert!(f.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn forecast_gradient_matches_finite_differences() {
        let v = Array2::from_shape_fn((3, 2), |(i, j)| ((i * 2 + j) as f64 * 0.8).sin());
        let target = Array2::from_shape_fn((3, 4), |(i, j)| (i as f64 * 0.3) - j as f64 * 0.1);
        let mut w = Array2::from_shape_fn((2, 4), |(i, j)| ((i * 4 + j) as f64 * 0.5).cos());
        let b = Array1::from(vec![0.1, -0.2, 0.0, 0.3]);
        let mse = |w: &Array2<f64>| (forecast_head(&v, w, &b) - &target).mapv(|e| e * e).mean().unwrap();
        let d_f = (forecast_head(&v, &w, &b) - &target) * (2.0 / 12.0);
        let (_, dw, _) = forecast_head_backward(&v, &w, &d_f);
        let h = 1e-6;
        for i in 0..2 {
            for j in 0..4 {
                let orig = w[[i, j]];
                w[[i, j]] = orig + h;
                let up = mse(&w);
                w[[i, j]] = orig - h;
                let down = mse(&w);
                w[[i, j]] = orig;
                let fd = (up - down) / (2.0 * h);
                assert!((fd - dw[[i, j]]).abs() <= 1e-4 * fd.abs().max(1e-6));
            }
        }
    }
}
