use ndarray::{Array1, Array2, Axis};

use crate::error::{Error, Result};
use crate::semantics::BrainTaxonomy;

/// Row norms and normalized rows kept for the backward pass.
#[derive(Debug, Clone)]
pub struct SemanticCache {
    unit: Array2<f64>,
    norms: Array1<f64>,
    cosine: Array2<f64>,
}

/// `S_E[i][j] = max(0, cos(U_i, U_j))` with a unit diagonal.
pub fn semantic_similarity(u: &Array2<f64>, node_names: &[String]) -> Result<(Array2<f64>, SemanticCache)> {
    let norms: Array1<f64> = u.rows().into_iter().map(|r| r.dot(&r).sqrt()).collect();
    if let Some(i) = norms.iter().position(|&n| !(n > 0.0) || !n.is_finite()) {
        return Err(Error::DegenerateEmbedding {
            node: node_names.get(i).cloned().unwrap_or_else(|| format!("#{i}")),
        });
    }
    let unit = u / &norms.view().insert_axis(Axis(1));
    let cosine = unit.dot(&unit.t());
    let mut s_e = cosine.mapv(|c| c.clamp(0.0, 1.0));
    s_e.diag_mut().fill(1.0);
    Ok((s_e, SemanticCache { unit, norms, cosine }))
}

/// Gradient of a loss w.r.t. `U` given its gradient w.r.t. `S_E`.
pub fn semantic_similarity_backward(cache: &SemanticCache, d_se: &Array2<f64>) -> Array2<f64> {
    let n = d_se.nrows();
    let mut dcos = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let c = cache.cosine[[i, j]];
            if i != j && c > 0.0 && c < 1.0 {
                dcos[[i, j]] = d_se[[i, j]];
            }
        }
    }
    let d_unit = (&dcos + &dcos.t()).dot(&cache.unit);
    let mut du = Array2::<f64>::zeros(cache.unit.raw_dim());
    for i in 0..n {
        let ui = cache.unit.row(i);
        let gi = d_unit.row(i);
        let proj = gi.dot(&ui);
        let mut out = du.row_mut(i);
        out.assign(&((&gi - &(&ui * proj)) / cache.norms[i]));
    }
    du
}

/// Node distances, bandwidth and cutoff behind `S_D`.
#[derive(Debug, Clone)]
pub struct SpatialKernel {
    pub distances: Array2<f64>,
    /// Population standard deviation of distinct electrode-pair distances.
    pub sigma: f64,
    /// Cutoff, twice `sigma`.
    pub tau: f64,
    pub similarity: Array2<f64>,
}

/// `exp(-d^2 / sigma^2)` inside the cutoff, zero beyond it.
pub fn gaussian_kernel(d: f64, sigma: f64, tau: f64) -> f64 {
    if d <= tau {
        (-(d * d) / (sigma * sigma)).exp()
    } else {
        0.0
    }
}

/// Euclidean electrode distances, extended to meta-nodes by averaging over
/// region members (meta to electrode) or member pairs (meta to meta).
pub fn node_distances(taxonomy: &BrainTaxonomy, with_meta: bool) -> Array2<f64> {
    let n = taxonomy.num_electrodes();
    let coords = taxonomy.coords();
    let mut e = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            let diff = &coords.row(i) - &coords.row(j);
            e[[i, j]] = diff.dot(&diff).sqrt();
        }
    }
    if !with_meta {
        return e;
    }
    let r = taxonomy.num_regions();
    let mut d = Array2::<f64>::zeros((n + r, n + r));
    d.slice_mut(ndarray::s![..n, ..n]).assign(&e);
    for a in 0..r {
        let ma = taxonomy.members(a);
        for j in 0..n {
            let mean = ma.iter().map(|&m| e[[m, j]]).sum::<f64>() / ma.len() as f64;
            d[[n + a, j]] = mean;
            d[[j, n + a]] = mean;
        }
        for b in 0..r {
            let mb = taxonomy.members(b);
            let sum: f64 = ma
                .iter()
                .flat_map(|&x| mb.iter().map(move |&y| (x, y)))
                .map(|(x, y)| e[[x, y]])
                .sum();
            d[[n + a, n + b]] = sum / (ma.len() * mb.len()) as f64;
        }
    }
    d
}

pub fn spatial_similarity(taxonomy: &BrainTaxonomy, with_meta: bool) -> SpatialKernel {
    let distances = node_distances(taxonomy, with_meta);
    let n = taxonomy.num_electrodes();
    let pairs: Vec<f64> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| distances[[i, j]])
        .collect();
    let sigma = if pairs.is_empty() {
        1.0
    } else {
        let mean = pairs.iter().sum::<f64>() / pairs.len() as f64;
        let var = pairs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / pairs.len() as f64;
        if var > 0.0 {
            var.sqrt()
        } else {
            1.0
        }
    };
    let tau = 2.0 * sigma;
    let mut similarity = distances.mapv(|d| gaussian_kernel(d, sigma, tau));
    similarity.diag_mut().fill(1.0);
    SpatialKernel {
        distances,
        sigma,
        tau,
        similarity,
    }
}
