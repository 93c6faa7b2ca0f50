//! Brain taxonomy, descriptor text encoders and the trainable projection of
//! encoder outputs into the semantic embedding space.

mod encoder;
mod taxonomy;

use ndarray::{Array1, Array2};

pub use encoder::{
    encode_descriptors, EncoderRegistry, FallbackEncoder, PrecomputedEncoder, TextEncoder, FALLBACK_DIM,
};
pub use taxonomy::{load_taxonomy, toy_taxonomy, BrainTaxonomy, NodeLayout};

use crate::error::{Error, Result};

/// Row-wise affine map `raw * w + b`. Gradients for `w` and `b` come from
/// [`project_semantics_backward`]; the encoder output is treated as constant.
pub fn project_semantics(raw: &Array2<f64>, w: &Array2<f64>, b: &Array1<f64>) -> Result<Array2<f64>> {
    if raw.ncols() != w.nrows() || w.ncols() != b.len() {
        return Err(Error::invalid(format!(
            "semantic projection shapes: raw {:?}, w {:?}, b {}",
            raw.dim(),
            w.dim(),
            b.len()
        )));
    }
    Ok(raw.dot(w) + b)
}

/// Returns `(dW, db)` for an upstream gradient `d_u` of the projected matrix.
pub fn project_semantics_backward(raw: &Array2<f64>, d_u: &Array2<f64>) -> (Array2<f64>, Array1<f64>) {
    (raw.t().dot(d_u), d_u.sum_axis(ndarray::Axis(0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn identity_projection_is_noop() {
        let raw = array![[1.0, 2.0], [3.0, -4.0]];
        let u = project_semantics(&raw, &Array2::eye(2), &Array1::zeros(2)).unwrap();
        assert_eq!(u, raw);
    }

    #[test]
    fn bias_only_projection() {
        let raw = Array2::zeros((3, 4));
        let c = array![0.5, -1.0];
        let u = project_semantics(&raw, &Array2::ones((4, 2)), &c).unwrap();
        for row in u.rows() {
            assert_eq!(row, c);
        }
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let raw = Array2::zeros((3, 4));
        assert!(project_semantics(&raw, &Array2::zeros((5, 2)), &Array1::zeros(2)).is_err());
        assert!(project_semantics(&raw, &Array2::zeros((4, 2)), &Array1::zeros(3)).is_err());
    }

    #[test]
    fn projection_gradient_matches_central_differences() {
        // loss = sum(U .* R) for a fixed random R
        let raw = array![[0.3, -0.2, 0.9], [1.1, 0.4, -0.7]];
        let r = array![[0.2, -1.3], [0.8, 0.5]];
        let mut w = array![[0.1, 0.2], [-0.3, 0.4], [0.5, -0.6]];
        let b = array![0.05, -0.02];
        let loss = |w: &Array2<f64>| (project_semantics(&raw, w, &b).unwrap() * &r).sum();
        let (dw, db) = project_semantics_backward(&raw, &r);
        assert_eq!(db, r.sum_axis(ndarray::Axis(0)));
        let h = 1e-6;
        for i in 0..3 {
            for j in 0..2 {
                let orig = w[[i, j]];
                w[[i, j]] = orig + h;
                let up = loss(&w);
                w[[i, j]] = orig - h;
                let down = loss(&w);
                w[[i, j]] = orig;
                let fd = (up - down) / (2.0 * h);
                assert!(
                    (fd - dw[[i, j]]).abs() <= 1e-4 * dw[[i, j]].abs().max(1e-8),
                    "{fd} vs {}",
                    dw[[i, j]]
                );
            }
        }
    }
}
