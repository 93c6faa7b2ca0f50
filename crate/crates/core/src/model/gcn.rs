use ndarray::{Array2, Zip};

use crate::error::{Error, Result};

/// Activations of every layer for the backward pass.
#[derive(Debug, Clone)]
pub struct GcnCache {
    inputs: Vec<Array2<f64>>,
    propagated: Vec<Array2<f64>>,
    pre: Vec<Array2<f64>>,
}

/// Unnormalized GCN with residuals:
///
/// ```text
/// H1      = relu(S V W0)
/// H(l+1)  = relu(S H(l) W(l)) + H(l)     for l >= 1
/// ```
pub fn gcn_forward(v: &Array2<f64>, s: &Array2<f64>, weights: &[&Array2<f64>]) -> Result<(Array2<f64>, GcnCache)> {
    let n = v.nrows();
    if s.dim() != (n, n) {
        return Err(Error::invalid(format!(
            "adjacency {:?} does not match {n} nodes",
            s.dim()
        )));
    }
    if weights.is_empty() {
        return Err(Error::invalid("GCN needs at least one layer"));
    }
    let mut cache = GcnCache {
        inputs: Vec::with_capacity(weights.len()),
        propagated: Vec::with_capacity(weights.len()),
        pre: Vec::with_capacity(weights.len()),
    };
    let mut h = v.clone();
    for (l, w) in weights.iter().enumerate() {
        if w.nrows() != h.ncols() || (l > 0 && w.ncols() != h.ncols()) {
            return Err(Error::invalid(format!(
                "GCN layer {l}: weight {:?} incompatible with input width {}",
                w.dim(),
                h.ncols()
            )));
        }
        let sh = s.dot(&h);
        let y = sh.dot(*w);
        let mut out = y.mapv(|x| x.max(0.0));
        if l > 0 {
            out += &h;
        }
        cache.inputs.push(std::mem::replace(&mut h, out));
        cache.propagated.push(sh);
        cache.pre.push(y);
    }
    Ok((h, cache))
}

/// Returns `(dV, dS, dW per layer)`.
pub fn gcn_backward(
    cache: &GcnCache,
    s: &Array2<f64>,
    weights: &[&Array2<f64>],
    d_out: &Array2<f64>,
) -> (Array2<f64>, Array2<f64>, Vec<Array2<f64>>) {
    let mut d_s = Array2::<f64>::zeros(s.raw_dim());
    let mut d_w = vec![Array2::<f64>::zeros((0, 0)); weights.len()];
    let mut dh = d_out.clone();
    for l in (0..weights.len()).rev() {
        let mut dy = dh.clone();
        Zip::from(&mut dy).and(&cache.pre[l]).for_each(|g, &y| {
            if y <= 0.0 {
                *g = 0.0;
            }
        });
        d_w[l] = cache.propagated[l].t().dot(&dy);
        let d_sh = dy.dot(&weights[l].t());
        d_s += &d_sh.dot(&cache.inputs[l].t());
        let mut d_in = s.t().dot(&d_sh);
        if l > 0 {
            d_in += &dh;
        }
        dh = d_in;
    }
    (dh, d_s, d_w)
}
