use ndarray::{s, Array2, Axis};

/// Activations kept for the backward pass.
#[derive(Debug, Clone)]
pub struct AttentionCache {
    q: Array2<f64>,
    k: Array2<f64>,
    probs: Vec<Array2<f64>>,
}

fn softmax_rows(mut m: Array2<f64>) -> Array2<f64> {
    for mut row in m.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row /= sum;
    }
    m
}

/// Multi-head scaled dot-product attention weights over the node set.
/// Each head uses a `d / heads` slice of the learned query and key
/// projections; the result is the mean over heads of the row-softmax weight
/// matrices, so every row sums to one.
pub fn temporal_similarity(
    c: &Array2<f64>,
    w_query: &Array2<f64>,
    w_key: &Array2<f64>,
    heads: usize,
) -> (Array2<f64>, AttentionCache) {
    let n = c.nrows();
    let q = c.dot(w_query);
    let k = c.dot(w_key);
    let dh = q.ncols() / heads;
    let scale = 1.0 / (dh as f64).sqrt();
    let mut s_t = Array2::<f64>::zeros((n, n));
    let mut probs = Vec::with_capacity(heads);
    for h in 0..heads {
        let qh = q.slice(s![.., h * dh..(h + 1) * dh]);
        let kh = k.slice(s![.., h * dh..(h + 1) * dh]);
        let a = softmax_rows(qh.dot(&kh.t()) * scale);
        s_t.scaled_add(1.0 / heads as f64, &a);
        probs.push(a);
    }
    (s_t, AttentionCache { q, k, probs })
}

/// Returns `(dC, dW_query, dW_key)`.
pub fn temporal_similarity_backward(
    cache: &AttentionCache,
    c: &Array2<f64>,
    w_query: &Array2<f64>,
    w_key: &Array2<f64>,
    d_st: &Array2<f64>,
) -> (Array2<f64>, Array2<f64>, Array2<f64>) {
    let heads = cache.probs.len();
    let dh = cache.q.ncols() / heads;
    let scale = 1.0 / (dh as f64).sqrt();
    let mut dq = Array2::<f64>::zeros(cache.q.raw_dim());
    let mut dk = Array2::<f64>::zeros(cache.k.raw_dim());
    let da = d_st / heads as f64;
    for (h, a) in cache.probs.iter().enumerate() {
        let inner = (&da * a).sum_axis(Axis(1)).insert_axis(Axis(1));
        let dscore = a * &(&da - &inner) * scale;
        let cols = s![.., h * dh..(h + 1) * dh];
        dq.slice_mut(cols).assign(&dscore.dot(&cache.k.slice(cols)));
        dk.slice_mut(cols).assign(&dscore.t().dot(&cache.q.slice(cols)));
    }
    let dc = dq.dot(&w_query.t()) + dk.dot(&w_key.t());
    (dc, c.t().dot(&dq), c.t().dot(&dk))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn rows_sum_to_one() {
        let c = Array2::from_shape_fn((5, 8), |(i, j)| ((i * 8 + j) as f64 * 0.77).sin());
        let w = Array2::from_shape_fn((8, 8), |(i, j)| ((i + 2 * j) as f64 * 0.31).cos());
        let (s_t, _) = temporal_similarity(&c, &w, &w.t().to_owned(), 4);
        for row in s_t.rows() {
            assert!((row.sum() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn identical_embeddings_give_uniform_rows() {
        let c = Array2::from_shape_fn((6, 4), |(_, j)| j as f64 * 0.5 - 0.3);
        let w = Array2::from_shape_fn((4, 4), |(i, j)| (i * 4 + j) as f64 * 0.1);
        let (s_t, _) = temporal_similarity(&c, &w, &w, 2);
        assert!(s_t.iter().all(|&v| (v - 1.0 / 6.0).abs() < 1e-12));
    }

    #[test]
    fn single_head_two_nodes_matches_hand_softmax() {
        let c = array![[1.0, 0.0], [0.5, 2.0]];
        let wq = array![[0.3, -0.2], [0.1, 0.4]];
        let wk = array![[-0.5, 0.2], [0.6, 0.1]];
        let (s_t, _) = temporal_similarity(&c, &wq, &wk, 1);
        let q = [[0.3, -0.2], [0.3 * 0.5 + 0.1 * 2.0, -0.2 * 0.5 + 0.4 * 2.0]];
        let k = [[-0.5, 0.2], [-0.5 * 0.5 + 0.6 * 2.0, 0.2 * 0.5 + 0.1 * 2.0]];
        for i in 0..2 {
            let logits: Vec<f64> = (0..2)
                .map(|j| (q[i][0] * k[j][0] + q[i][1] * k[j][1]) / 2f64.sqrt())
                .collect();
            let z: f64 = logits.iter().map(|l| l.exp()).sum();
            for j in 0..2 {
                assert!((s_t[[i, j]] - logits[j].exp() / z).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn backward_matches_finite_differences() {
        let c = Array2::from_shape_fn((4, 6), |(i, j)| ((i * 6 + j) as f64 * 0.41).sin());
        let mut wq = Array2::from_shape_fn((6, 6), |(i, j)| ((i * 3 + j) as f64 * 0.23).cos() * 0.5);
        let wk = Array2::from_shape_fn((6, 6), |(i, j)| ((i + 5 * j) as f64 * 0.17).sin() * 0.5);
        let r = Array2::from_shape_fn((4, 4), |(i, j)| (i as f64 - j as f64) * 0.3 + 0.1);
        let (_, cache) = temporal_similarity(&c, &wq, &wk, 3);
        let (dc, dwq, _) = temporal_similarity_backward(&cache, &c, &wq, &wk, &r);
        let h = 1e-6;
        for i in 0..6 {
            for j in 0..6 {
                let orig = wq[[i, j]];
                wq[[i, j]] = orig + h;
                let up = (temporal_similarity(&c, &wq, &wk, 3).0 * &r).sum();
                wq[[i, j]] = orig - h;
                let down = (temporal_similarity(&c, &wq, &wk, 3).0 * &r).sum();
                wq[[i, j]] = orig;
                let fd = (up - down) / (2.0 * h);
                assert!((fd - dwq[[i, j]]).abs() < 1e-7 + 1e-5 * fd.abs());
            }
        }
        let mut c2 = c.clone();
        for i in 0..4 {
            for j in 0..6 {
                let orig = c2[[i, j]];
                c2[[i, j]] = orig + h;
                let up = (temporal_similarity(&c2, &wq, &wk, 3).0 * &r).sum();
                c2[[i, j]] = orig - h;
                let down = (temporal_similarity(&c2, &wq, &wk, 3).0 * &r).sum();
                c2[[i, j]] = orig;
                let fd = (up - down) / (2.0 * h);
                assert!((fd - dc[[i, j]]).abs() < 1e-7 + 1e-5 * fd.abs());
            }
        }
    }
}
