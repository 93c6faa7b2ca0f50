use ndarray::{Array1, Array2};

use crate::semantics::{BrainTaxonomy, NodeLayout};

/// Winning row per feature for every pooled vector.
#[derive(Debug, Clone)]
pub struct PoolCache {
    argmax: Vec<Vec<usize>>,
}

fn max_rows(v: &Array2<f64>, rows: &[usize]) -> (Array1<f64>, Vec<usize>) {
    let z = v.ncols();
    let mut best = Array1::from_elem(z, f64::NEG_INFINITY);
    let mut arg = vec![rows[0]; z];
    for &r in rows {
        for f in 0..z {
            if v[[r, f]] > best[f] {
                best[f] = v[[r, f]];
                arg[f] = r;
            }
        }
    }
    (best, arg)
}

/// Region-wise max over electrode rows, a max over all meta-node rows, then
/// the feature-wise mean of those pooled vectors. Without meta-nodes only the
/// region vectors are averaged.
pub fn hierarchical_pool(v: &Array2<f64>, taxonomy: &BrainTaxonomy, layout: NodeLayout) -> (Array1<f64>, PoolCache) {
    let mut pooled = Vec::with_capacity(taxonomy.num_regions() + 1);
    let mut argmax = Vec::with_capacity(taxonomy.num_regions() + 1);
    for r in 0..taxonomy.num_regions() {
        let (p, a) = max_rows(v, taxonomy.members(r));
        pooled.push(p);
        argmax.push(a);
    }
    if layout.has_meta() {
        let meta: Vec<usize> = (layout.num_electrodes..layout.num_nodes()).collect();
        let (p, a) = max_rows(v, &meta);
        pooled.push(p);
        argmax.push(a);
    }
    let count = pooled.len() as f64;
    let g = pooled.iter().fold(Array1::zeros(v.ncols()), |acc, p| acc + p) / count;
    (g, PoolCache { argmax })
}

pub fn hierarchical_pool_backward(cache: &PoolCache, d_g: &Array1<f64>, num_nodes: usize) -> Array2<f64> {
    let mut dv = Array2::zeros((num_nodes, d_g.len()));
    let share = 1.0 / cache.argmax.len() as f64;
    for arg in &cache.argmax {
        for (f, &row) in arg.iter().enumerate() {
            dv[[row, f]] += d_g[f] * share;
        }
    }
    dv
}
