use std::collections::BTreeMap;

use ndarray::{Array2, ArrayView1};
use rand::Rng;

/// Index of a tensor inside a [`ParamStore`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ParamId(pub(crate) usize);

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    pub name: String,
    pub value: Array2<f64>,
    /// Whether L2 regularization applies (weights yes; biases and the gate no).
    pub decay: bool,
}

/// Ordered collection of named trainable tensors. Vectors are stored as
/// 1 x n matrices and scalars as 1 x 1.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParamStore {
    tensors: Vec<Tensor>,
    index: BTreeMap<String, usize>,
}

/// Rounds to the nearest f32 so parameters survive a float32 checkpoint
/// unchanged.
pub fn round_f32(v: f64) -> f64 {
    v as f32 as f64
}

impl ParamStore {
    pub fn add(&mut self, name: &str, value: Array2<f64>, decay: bool) -> ParamId {
        assert!(!self.index.contains_key(name), "duplicate parameter {name}");
        let id = self.tensors.len();
        self.index.insert(name.to_string(), id);
        self.tensors.push(Tensor {
            name: name.to_string(),
            value: value.mapv(round_f32),
            decay,
        });
        ParamId(id)
    }

    /// Xavier-uniform weight matrix: U(-a, a), a = sqrt(6 / (fan_in + fan_out)).
    pub fn add_xavier(&mut self, name: &str, rows: usize, cols: usize, rng: &mut impl Rng) -> ParamId {
        let a = (6.0 / (rows + cols) as f64).sqrt();
        let value = Array2::from_shape_simple_fn((rows, cols), || rng.random_range(-a..a));
        self.add(name, value, true)
    }

    pub fn add_zeros(&mut self, name: &str, rows: usize, cols: usize) -> ParamId {
        self.add(name, Array2::zeros((rows, cols)), false)
    }

    pub fn get(&self, id: ParamId) -> &Array2<f64> {
        &self.tensors[id.0].value
    }

    pub fn row(&self, id: ParamId) -> ArrayView1<'_, f64> {
        self.tensors[id.0].value.row(0)
    }

    pub fn scalar(&self, id: ParamId) -> f64 {
        self.tensors[id.0].value[[0, 0]]
    }

    pub fn get_mut(&mut self, id: ParamId) -> &mut Array2<f64> {
        &mut self.tensors[id.0].value
    }

    pub fn id(&self, name: &str) -> Option<ParamId> {
        self.index.get(name).copied().map(ParamId)
    }

    pub fn by_name(&self, name: &str) -> Option<&Tensor> {
        self.index.get(name).map(|&i| &self.tensors[i])
    }

    pub fn tensors(&self) -> &[Tensor] {
        &self.tensors
    }

    pub fn tensors_mut(&mut self) -> &mut [Tensor] {
        &mut self.tensors
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn num_scalars(&self) -> usize {
        self.tensors.iter().map(|t| t.value.len()).sum()
    }

    pub fn zero_grads(&self) -> Grads {
        Grads(self.tensors.iter().map(|t| Array2::zeros(t.value.raw_dim())).collect())
    }
}

/// Gradients aligned with a [`ParamStore`].
#[derive(Debug, Clone, PartialEq)]
pub struct Grads(pub Vec<Array2<f64>>);

impl Grads {
    pub fn get(&self, id: ParamId) -> &Array2<f64> {
        &self.0[id.0]
    }

    pub fn add(&mut self, id: ParamId, g: &Array2<f64>) {
        self.0[id.0] += g;
    }

    pub fn add_row(&mut self, id: ParamId, g: ArrayView1<f64>) {
        let mut row = self.0[id.0].row_mut(0);
        row += &g;
    }

    pub fn add_scalar(&mut self, id: ParamId, g: f64) {
        self.0[id.0][[0, 0]] += g;
    }

    pub fn scale(&mut self, s: f64) {
        self.0.iter_mut().for_each(|g| *g *= s);
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|g| g.iter().all(|v| v.is_finite()))
    }
}
