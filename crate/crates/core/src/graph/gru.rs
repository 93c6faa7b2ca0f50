//! Single-layer GRU run in both directions over every node's frame sequence
//! with shared weights, and its backpropagation-through-time.
//!
//! Gate columns are laid out `[reset | update | candidate]`:
//!
//! ```text
//! r  = sigmoid(x W_r + b_r + h U_r + c_r)
//! z  = sigmoid(x W_z + b_z + h U_z + c_z)
//! n  = tanh(x W_n + b_n + r * (h U_n + c_n))
//! h' = (1 - z) * n + z * h
//! ```

use ndarray::{s, Array1, Array2, ArrayView1, Axis};

/// Borrowed weights of one direction.
#[derive(Clone, Copy)]
pub struct GruWeights<'a> {
    /// F x 3M
    pub w_in: &'a Array2<f64>,
    /// M x 3M
    pub w_hid: &'a Array2<f64>,
    pub b_in: ArrayView1<'a, f64>,
    pub b_hid: ArrayView1<'a, f64>,
}

impl GruWeights<'_> {
    pub fn hidden(&self) -> usize {
        self.w_hid.nrows()
    }
}

#[derive(Debug, Clone)]
pub struct GruGrads {
    pub w_in: Array2<f64>,
    pub w_hid: Array2<f64>,
    pub b_in: Array1<f64>,
    pub b_hid: Array1<f64>,
}

#[derive(Debug, Clone)]
struct Step {
    h_prev: Array2<f64>,
    r: Array2<f64>,
    z: Array2<f64>,
    n: Array2<f64>,
    /// h_prev U_n + c_n
    hn: Array2<f64>,
}

/// Cached activations of one direction, in processing order.
#[derive(Debug, Clone)]
pub struct GruTrace {
    steps: Vec<Step>,
    reverse: bool,
}

fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

/// Row block of time step `t` in a time-major `(T * rows) x D` matrix.
fn block(t: usize, rows: usize) -> std::ops::Range<usize> {
    t * rows..(t + 1) * rows
}

/// Runs one direction. `x` is the time-major input `(T * rows) x F`.
/// Returns the final hidden state (rows x M).
pub fn gru_forward(
    x: &Array2<f64>,
    frames: usize,
    rows: usize,
    w: GruWeights,
    reverse: bool,
) -> (Array2<f64>, GruTrace) {
    let m = w.hidden();
    let xp = x.dot(w.w_in) + &w.b_in;
    let mut h = Array2::<f64>::zeros((rows, m));
    let mut steps = Vec::with_capacity(frames);
    for k in 0..frames {
        let t = if reverse { frames - 1 - k } else { k };
        let xt = xp.slice(s![block(t, rows), ..]);
        let hp = h.dot(w.w_hid) + &w.b_hid;
        let mut r = Array2::zeros((rows, m));
        let mut z = Array2::zeros((rows, m));
        let mut n = Array2::zeros((rows, m));
        let hn = hp.slice(s![.., 2 * m..]).to_owned();
        let mut h_next = Array2::zeros((rows, m));
        for i in 0..rows {
            for j in 0..m {
                let rv = sigmoid(xt[[i, j]] + hp[[i, j]]);
                let zv = sigmoid(xt[[i, m + j]] + hp[[i, m + j]]);
                let nv = (xt[[i, 2 * m + j]] + rv * hn[[i, j]]).tanh();
                r[[i, j]] = rv;
                z[[i, j]] = zv;
                n[[i, j]] = nv;
                h_next[[i, j]] = (1.0 - zv) * nv + zv * h[[i, j]];
            }
        }
        steps.push(Step {
            h_prev: std::mem::replace(&mut h, h_next),
            r,
            z,
            n,
            hn,
        });
    }
    (h, GruTrace { steps, reverse })
}

/// Backpropagates a gradient on the final hidden state.
pub fn gru_backward(x: &Array2<f64>, rows: usize, trace: &GruTrace, w: GruWeights, d_final: &Array2<f64>) -> GruGrads {
    let m = w.hidden();
    let frames = trace.steps.len();
    let mut dxp = Array2::<f64>::zeros((frames * rows, 3 * m));
    let mut d_w_hid = Array2::<f64>::zeros(w.w_hid.raw_dim());
    let mut d_b_hid = Array1::<f64>::zeros(3 * m);
    let mut dh = d_final.clone();
    let mut dhp = Array2::<f64>::zeros((rows, 3 * m));
    for (k, st) in trace.steps.iter().enumerate().rev() {
        let t = if trace.reverse { frames - 1 - k } else { k };
        let mut dx = dxp.slice_mut(s![block(t, rows), ..]);
        let mut dh_prev = Array2::<f64>::zeros((rows, m));
        for i in 0..rows {
            for j in 0..m {
                let (r, z, n, hn) = (st.r[[i, j]], st.z[[i, j]], st.n[[i, j]], st.hn[[i, j]]);
                let g = dh[[i, j]];
                let dn = g * (1.0 - z);
                let dz = g * (st.h_prev[[i, j]] - n);
                dh_prev[[i, j]] = g * z;
                let da_n = dn * (1.0 - n * n);
                let dr = da_n * hn;
                let da_r = dr * r * (1.0 - r);
                let da_z = dz * z * (1.0 - z);
                dx[[i, j]] = da_r;
                dx[[i, m + j]] = da_z;
                dx[[i, 2 * m + j]] = da_n;
                dhp[[i, j]] = da_r;
                dhp[[i, m + j]] = da_z;
                dhp[[i, 2 * m + j]] = da_n * r;
            }
        }
        d_w_hid += &st.h_prev.t().dot(&dhp);
        d_b_hid += &dhp.sum_axis(Axis(0));
        dh_prev += &dhp.dot(&w.w_hid.t());
        dh = dh_prev;
    }
    GruGrads {
        w_in: x.t().dot(&dxp),
        w_hid: d_w_hid,
        b_in: dxp.sum_axis(Axis(0)),
        b_hid: d_b_hid,
    }
}

/// Both directions over the same time-major input.
#[derive(Debug, Clone)]
pub struct BiGruCache {
    pub x: Array2<f64>,
    pub rows: usize,
    forward: GruTrace,
    backward: GruTrace,
}

/// Returns `C = [h_forward | h_backward]` (rows x 2M).
pub fn bigru_forward(
    x: Array2<f64>,
    frames: usize,
    rows: usize,
    fwd: GruWeights,
    bwd: GruWeights,
) -> (Array2<f64>, BiGruCache) {
    let (hf, tf) = gru_forward(&x, frames, rows, fwd, false);
    let (hb, tb) = gru_forward(&x, frames, rows, bwd, true);
    let c = ndarray::concatenate(Axis(1), &[hf.view(), hb.view()]).expect("same row count");
    (
        c,
        BiGruCache {
            x,
            rows,
            forward: tf,
            backward: tb,
        },
    )
}

pub fn bigru_backward(cache: &BiGruCache, fwd: GruWeights, bwd: GruWeights, d_c: &Array2<f64>) -> (GruGrads, GruGrads) {
    let m = fwd.hidden();
    let df = d_c.slice(s![.., ..m]).to_owned();
    let db = d_c.slice(s![.., m..]).to_owned();
    (
        gru_backward(&cache.x, cache.rows, &cache.forward, fwd, &df),
        gru_backward(&cache.x, cache.rows, &cache.backward, bwd, &db),
    )
}
