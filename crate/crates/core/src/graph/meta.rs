use ndarray::{Array3, ArrayView3, Axis};

use crate::semantics::BrainTaxonomy;

/// Appends one meta-node per region whose series is the mean of the region's
/// electrodes, per time step and per feature. Input is N x T x F.
pub fn build_meta_series(x: ArrayView3<f64>, taxonomy: &BrainTaxonomy) -> Array3<f64> {
    let (n, t, f) = x.dim();
    assert_eq!(n, taxonomy.num_electrodes(), "electrode count mismatch");
    let regions = taxonomy.num_regions();
    let mut out = Array3::zeros((n + regions, t, f));
    out.slice_mut(ndarray::s![..n, .., ..]).assign(&x);
    for r in 0..regions {
        let members = taxonomy.members(r);
        let mut acc = out.index_axis_mut(Axis(0), n + r);
        for &m in members {
            acc += &x.index_axis(Axis(0), m);
        }
        acc /= members.len() as f64;
    }
    out
}
