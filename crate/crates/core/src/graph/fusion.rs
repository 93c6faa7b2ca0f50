use ndarray::{Array2, Zip};

/// How the semantic and spatial similarities are mixed before the temporal
/// modulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateMode {
    /// `(1 - alpha) * S_E + alpha * S_D`
    Mixed,
    /// `S_E` only (spatial context removed).
    SemanticOnly,
    /// `S_D` only (semantic context removed).
    SpatialOnly,
}

/// The matrices fused into one adjacency.
#[derive(Debug, Clone)]
pub struct SimilarityBundle {
    pub s_e: Option<Array2<f64>>,
    pub s_d: Option<Array2<f64>>,
    /// `None` when temporal correlation is disabled.
    pub s_t: Option<Array2<f64>>,
    pub alpha: f64,
    pub mode: GateMode,
    pub gate: Array2<f64>,
    pub s_prime: Array2<f64>,
}

impl SimilarityBundle {
    pub fn new(
        s_e: Option<Array2<f64>>,
        s_d: Option<Array2<f64>>,
        s_t: Option<Array2<f64>>,
        alpha: f64,
        mode: GateMode,
    ) -> Self {
        let gate = gate_matrix(s_e.as_ref(), s_d.as_ref(), alpha, mode);
        let s_prime = match &s_t {
            Some(t) => &gate * t,
            None => gate.clone(),
        };
        SimilarityBundle {
            s_e,
            s_d,
            s_t,
            alpha,
            mode,
            gate,
            s_prime,
        }
    }
}

pub fn gate_matrix(s_e: Option<&Array2<f64>>, s_d: Option<&Array2<f64>>, alpha: f64, mode: GateMode) -> Array2<f64> {
    match mode {
        GateMode::Mixed => {
            let (e, d) = (s_e.expect("S_E required"), s_d.expect("S_D required"));
            e * (1.0 - alpha) + d * alpha
        }
        GateMode::SemanticOnly => s_e.expect("S_E required").clone(),
        GateMode::SpatialOnly => s_d.expect("S_D required").clone(),
    }
}

/// Keeps entries at or above their row mean plus the diagonal; everything
/// else becomes zero. Returns the thresholded matrix and the 0/1 keep mask.
/// Equality with the mean is tested with a 1e-12 relative slack so that
/// constant rows survive summation rounding.
pub fn threshold_rows(s_prime: &Array2<f64>) -> (Array2<f64>, Array2<f64>) {
    let n = s_prime.ncols() as f64;
    let mut mask = Array2::<f64>::zeros(s_prime.raw_dim());
    for (i, (row, mut keep)) in s_prime.rows().into_iter().zip(mask.rows_mut()).enumerate() {
        let mean = row.sum() / n;
        let cut = mean - 1e-12 * mean.abs();
        for (j, (&v, k)) in row.iter().zip(keep.iter_mut()).enumerate() {
            if i == j || v >= cut {
                *k = 1.0;
            }
        }
    }
    let mut s = s_prime.clone();
    Zip::from(&mut s).and(&mask).for_each(|v, &m| *v *= m);
    (s, mask)
}

/// Final adjacency `S` from a bundle.
pub fn fuse_and_threshold(bundle: &SimilarityBundle) -> Array2<f64> {
    threshold_rows(&bundle.s_prime).0
}
