//! The full differentiable model: graph construction, GCN block, pooling and
//! heads, with a hand-written backward pass.
//!
//! Node features enter as `N x T x F` standardized log-amplitude tensors. The
//! BiGRU runs over all nodes of all clips in a batch at once; everything from
//! the similarity matrices onward is per clip. The semantic projection and
//! `S_E` do not depend on the clip and are computed once per batch.

use ndarray::{s, Array1, Array2, Array3, ArrayView3, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{Ablation, ModelConfig, Task};
use super::gcn::{gcn_backward, gcn_forward, GcnCache};
use super::heads::{classify, classify_backward, forecast_head, forecast_head_backward, MlpCache};
use super::params::{Grads, ParamId, ParamStore};
use super::pool::{hierarchical_pool, hierarchical_pool_backward, PoolCache};
use crate::error::{Error, Result};
use crate::graph::{
    bigru_backward, bigru_forward, build_meta_series, semantic_similarity, semantic_similarity_backward,
    spatial_similarity, temporal_similarity, temporal_similarity_backward, threshold_rows, AttentionCache, BiGruCache,
    GateMode, GruWeights, SemanticCache, SimilarityBundle, SpatialKernel,
};
use crate::semantics::{
    encode_descriptors, project_semantics, project_semantics_backward, BrainTaxonomy, NodeLayout, TextEncoder,
};
use crate::train::Normalizer;

#[derive(Debug, Clone, Copy)]
struct GruIds {
    w_in: ParamId,
    w_hid: ParamId,
    b_in: ParamId,
    b_hid: ParamId,
}

#[derive(Debug, Clone, Copy)]
struct MlpIds {
    w1: ParamId,
    b1: ParamId,
    w2: ParamId,
    b2: ParamId,
}

#[derive(Debug, Clone)]
struct ParamIds {
    gru_fwd: GruIds,
    gru_bwd: GruIds,
    semantic: Option<(ParamId, ParamId)>,
    attention: Option<(ParamId, ParamId)>,
    alpha: Option<ParamId>,
    gcn: Vec<ParamId>,
    mlp: Option<MlpIds>,
    forecast: Option<(ParamId, ParamId)>,
}

/// Clip-independent inputs to graph construction.
#[derive(Debug, Clone)]
pub struct GraphContext {
    pub taxonomy: BrainTaxonomy,
    pub layout: NodeLayout,
    pub node_names: Vec<String>,
    /// Frozen encoder output, one row per node.
    pub raw_semantic: Option<Array2<f64>>,
    pub spatial: Option<SpatialKernel>,
}

/// Parameter tensor name prefixes copied from a pretrained model.
pub const TRANSFER_PREFIXES: [&str; 5] = ["temporal.", "semantic.", "attention.", "gate.", "gcn."];

/// Trainable parameters plus everything needed to run them.
#[derive(Debug, Clone)]
pub struct ModelState {
    pub config: ModelConfig,
    pub params: ParamStore,
    pub normalizer: Normalizer,
    ids: ParamIds,
    context: GraphContext,
}

fn register_gru(store: &mut ParamStore, prefix: &str, f: usize, m: usize, rng: &mut ChaCha8Rng) -> GruIds {
    GruIds {
        w_in: store.add_xavier(&format!("{prefix}.w_in"), f, 3 * m, rng),
        w_hid: store.add_xavier(&format!("{prefix}.w_hid"), m, 3 * m, rng),
        b_in: store.add_zeros(&format!("{prefix}.b_in"), 1, 3 * m),
        b_hid: store.add_zeros(&format!("{prefix}.b_hid"), 1, 3 * m),
    }
}

impl ModelState {
    /// Builds a freshly initialized model: Xavier-uniform weights, zero
    /// biases and `alpha = 0.5`, all drawn from `seed`.
    pub fn new(config: ModelConfig, taxonomy: BrainTaxonomy, encoder: &dyn TextEncoder, seed: u64) -> Result<Self> {
        config.validate()?;
        let ablation = config.ablation;
        let layout = taxonomy.layout(ablation.uses_meta());
        let node_names = taxonomy.node_names(ablation.uses_meta());
        let raw_semantic = if ablation.uses_semantics() {
            Some(encode_descriptors(&taxonomy, encoder, ablation.uses_meta())?)
        } else {
            None
        };
        let spatial = ablation
            .uses_space()
            .then(|| spatial_similarity(&taxonomy, ablation.uses_meta()));

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut store = ParamStore::default();
        let (f, m, k, z) = (config.freq_bins, config.hidden_dim, config.semantic_dim, config.gcn_dim);
        let gru_fwd = register_gru(&mut store, "temporal.forward", f, m, &mut rng);
        let gru_bwd = register_gru(&mut store, "temporal.backward", f, m, &mut rng);
        let semantic = raw_semantic.as_ref().map(|raw| {
            (
                store.add_xavier("semantic.w", raw.ncols(), k, &mut rng),
                store.add_zeros("semantic.b", 1, k),
            )
        });
        let attention = ablation.uses_temporal().then(|| {
            (
                store.add_xavier("attention.w_query", 2 * m, 2 * m, &mut rng),
                store.add_xavier("attention.w_key", 2 * m, 2 * m, &mut rng),
            )
        });
        let alpha = (ablation.uses_semantics() && ablation.uses_space()).then(|| {
            let id = store.add_zeros("gate.alpha_raw", 1, 1);
            id
        });
        let mut gcn = vec![store.add_xavier("gcn.w0", config.node_feature_dim(), z, &mut rng)];
        for l in 1..config.gcn_layers {
            gcn.push(store.add_xavier(&format!("gcn.w{l}"), z, z, &mut rng));
        }
        let (mlp, forecast) = match config.task {
            Task::Pretraining => (
                None,
                Some((
                    store.add_xavier("head.forecast.w", z, config.horizon * f, &mut rng),
                    store.add_zeros("head.forecast.b", 1, config.horizon * f),
                )),
            ),
            task => {
                let hidden = z / 2;
                (
                    Some(MlpIds {
                        w1: store.add_xavier("head.mlp.w1", z, hidden, &mut rng),
                        b1: store.add_zeros("head.mlp.b1", 1, hidden),
                        w2: store.add_xavier("head.mlp.w2", hidden, task.num_classes(), &mut rng),
                        b2: store.add_zeros("head.mlp.b2", 1, task.num_classes()),
                    }),
                    None,
                )
            }
        };
        Ok(ModelState {
            normalizer: Normalizer::identity(f),
            config,
            params: store,
            ids: ParamIds {
                gru_fwd,
                gru_bwd,
                semantic,
                attention,
                alpha,
                gcn,
                mlp,
                forecast,
            },
            context: GraphContext {
                taxonomy,
                layout,
                node_names,
                raw_semantic,
                spatial,
            },
        })
    }

    pub fn context(&self) -> &GraphContext {
        &self.context
    }

    pub fn taxonomy(&self) -> &BrainTaxonomy {
        &self.context.taxonomy
    }

    pub fn layout(&self) -> NodeLayout {
        self.context.layout
    }

    /// Current gate value `alpha = sigmoid(alpha_raw)`, when the gate exists.
    pub fn alpha(&self) -> Option<f64> {
        self.ids.alpha.map(|id| sigmoid(self.params.scalar(id)))
    }

    fn gate_mode(&self) -> GateMode {
        match self.config.ablation {
            Ablation::NoSemantics => GateMode::SpatialOnly,
            Ablation::NoSpace => GateMode::SemanticOnly,
            _ => GateMode::Mixed,
        }
    }

    fn gru(&self, ids: GruIds) -> GruWeights<'_> {
        GruWeights {
            w_in: self.params.get(ids.w_in),
            w_hid: self.params.get(ids.w_hid),
            b_in: self.params.row(ids.b_in),
            b_hid: self.params.row(ids.b_hid),
        }
    }

    fn gcn_weights(&self) -> Vec<&Array2<f64>> {
        self.ids.gcn.iter().map(|&id| self.params.get(id)).collect()
    }

    /// Standardizes an electrode tensor (N x T x F) and appends meta-node
    /// rows when the variant uses them.
    pub fn prepare_input(&self, features: ArrayView3<f32>) -> Result<Array3<f64>> {
        let (n, _, f) = features.dim();
        if n != self.context.layout.num_electrodes || f != self.config.freq_bins {
            return Err(Error::invalid(format!(
                "clip shape {:?} does not match {} electrodes x {} bins",
                features.dim(),
                self.context.layout.num_electrodes,
                self.config.freq_bins
            )));
        }
        let x = self.normalizer.apply(features);
        Ok(if self.context.layout.has_meta() {
            build_meta_series(x.view(), &self.context.taxonomy)
        } else {
            x
        })
    }

    fn shared_forward(&self) -> Result<SharedForward> {
        let (u, s_e, sem_cache) = match (&self.ids.semantic, &self.context.raw_semantic) {
            (Some((w, b)), Some(raw)) => {
                let u = project_semantics(raw, self.params.get(*w), &self.params.row(*b).to_owned())?;
                let (s_e, cache) = semantic_similarity(&u, &self.context.node_names)?;
                (Some(u), Some(s_e), Some(cache))
            }
            _ => (None, None, None),
        };
        Ok(SharedForward {
            u,
            s_e,
            sem_cache,
            alpha: self.alpha().unwrap_or(0.5),
        })
    }

    /// Runs graph construction and the GCN block for a batch of prepared
    /// inputs (each N' x T x F).
    pub fn forward(&self, inputs: &[Array3<f64>]) -> Result<BatchForward> {
        let nodes = self.context.layout.num_nodes();
        let frames = inputs.first().map(|x| x.dim().1).unwrap_or(self.config.frames);
        let f = self.config.freq_bins;
        for x in inputs {
            if x.dim() != (nodes, frames, f) {
                return Err(Error::invalid(format!(
                    "prepared input {:?}, expected {:?}",
                    x.dim(),
                    (nodes, frames, f)
                )));
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::NumericInput("non-finite value in node series".into()));
            }
        }
        let shared = self.shared_forward()?;
        let rows = nodes * inputs.len();
        let mut x_flat = Array2::<f64>::zeros((frames * rows, f));
        for (b, x) in inputs.iter().enumerate() {
            for t in 0..frames {
                let start = t * rows + b * nodes;
                x_flat
                    .slice_mut(s![start..start + nodes, ..])
                    .assign(&x.slice(s![.., t, ..]));
            }
        }
        let (c_all, gru) = bigru_forward(
            x_flat,
            frames,
            rows,
            self.gru(self.ids.gru_fwd),
            self.gru(self.ids.gru_bwd),
        );
        if c_all.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericInput("non-finite temporal embedding".into()));
        }

        let weights = self.gcn_weights();
        let mut clips = Vec::with_capacity(inputs.len());
        for b in 0..inputs.len() {
            let c = c_all.slice(s![b * nodes..(b + 1) * nodes, ..]).to_owned();
            let (s_t, att) = match self.ids.attention {
                Some((wq, wk)) => {
                    let (s_t, cache) =
                        temporal_similarity(&c, self.params.get(wq), self.params.get(wk), self.config.heads);
                    (Some(s_t), Some(cache))
                }
                None => (None, None),
            };
            let bundle = SimilarityBundle::new(
                shared.s_e.clone(),
                self.context.spatial.as_ref().map(|k| k.similarity.clone()),
                s_t,
                shared.alpha,
                self.gate_mode(),
            );
            let (adj, mask) = threshold_rows(&bundle.s_prime);
            let v = match &shared.u {
                Some(u) => ndarray::concatenate(Axis(1), &[c.view(), u.view()]).expect("row counts agree"),
                None => c.clone(),
            };
            let (v_out, gcn) = gcn_forward(&v, &adj, &weights)?;
            let (g, pool) = hierarchical_pool(&v_out, &self.context.taxonomy, self.context.layout);
            clips.push(ClipForward {
                c,
                att,
                bundle,
                mask,
                s: adj,
                v,
                gcn,
                v_out,
                pool,
                g,
            });
        }
        Ok(BatchForward { shared, gru, clips })
    }

    /// Accumulates parameter gradients given `dL/dV'` for every clip.
    pub fn backward(&self, fwd: &BatchForward, d_v_out: &[Array2<f64>], grads: &mut Grads) {
        let nodes = self.context.layout.num_nodes();
        let m = self.config.hidden_dim;
        let weights = self.gcn_weights();
        let mut d_c_all = Array2::<f64>::zeros((nodes * fwd.clips.len(), 2 * m));
        let mut d_u = fwd.shared.u.as_ref().map(|u| Array2::<f64>::zeros(u.raw_dim()));
        let mut d_se = fwd.shared.s_e.as_ref().map(|s| Array2::<f64>::zeros(s.raw_dim()));
        let mut d_alpha = 0.0;
        let alpha = fwd.shared.alpha;

        for (b, (clip, d_out)) in fwd.clips.iter().zip(d_v_out).enumerate() {
            let (d_v, d_s, d_w) = gcn_backward(&clip.gcn, &clip.s, &weights, d_out);
            for (id, g) in self.ids.gcn.iter().zip(&d_w) {
                grads.add(*id, g);
            }
            let mut d_c = d_v.slice(s![.., ..2 * m]).to_owned();
            if let Some(du) = d_u.as_mut() {
                *du += &d_v.slice(s![.., 2 * m..]);
            }
            let d_sp = &d_s * &clip.mask;
            let d_gate = match (&clip.bundle.s_t, &clip.att, self.ids.attention) {
                (Some(s_t), Some(att), Some((wq, wk))) => {
                    let d_st = &d_sp * &clip.bundle.gate;
                    let (dc_att, dwq, dwk) =
                        temporal_similarity_backward(att, &clip.c, self.params.get(wq), self.params.get(wk), &d_st);
                    d_c += &dc_att;
                    grads.add(wq, &dwq);
                    grads.add(wk, &dwk);
                    &d_sp * s_t
                }
                _ => d_sp,
            };
            match clip.bundle.mode {
                GateMode::Mixed => {
                    if let (Some(dse), Some(s_e), Some(s_d)) = (d_se.as_mut(), &clip.bundle.s_e, &clip.bundle.s_d) {
                        dse.scaled_add(1.0 - alpha, &d_gate);
                        d_alpha += (&d_gate * &(s_d - s_e)).sum();
                    }
                }
                GateMode::SemanticOnly => {
                    if let Some(dse) = d_se.as_mut() {
                        *dse += &d_gate;
                    }
                }
                GateMode::SpatialOnly => {}
            }
            d_c_all.slice_mut(s![b * nodes..(b + 1) * nodes, ..]).assign(&d_c);
        }

        if let Some(id) = self.ids.alpha {
            grads.add_scalar(id, d_alpha * alpha * (1.0 - alpha));
        }
        if let (Some(mut du), Some((w, b)), Some(raw)) = (d_u, self.ids.semantic, &self.context.raw_semantic) {
            if let (Some(dse), Some(cache)) = (&d_se, &fwd.shared.sem_cache) {
                du += &semantic_similarity_backward(cache, dse);
            }
            let (dw, db) = project_semantics_backward(raw, &du);
            grads.add(w, &dw);
            grads.add_row(b, db.view());
        }
        let (gf, gb) = bigru_backward(
            &fwd.gru,
            self.gru(self.ids.gru_fwd),
            self.gru(self.ids.gru_bwd),
            &d_c_all,
        );
        for (ids, g) in [(self.ids.gru_fwd, gf), (self.ids.gru_bwd, gb)] {
            grads.add(ids.w_in, &g.w_in);
            grads.add(ids.w_hid, &g.w_hid);
            grads.add_row(ids.b_in, g.b_in.view());
            grads.add_row(ids.b_hid, g.b_hid.view());
        }
    }

    fn mlp(&self) -> MlpIds {
        self.ids.mlp.expect("model has no classification head")
    }

    /// Class probabilities for a graph embedding.
    pub fn classify(&self, g: &Array1<f64>) -> MlpCache {
        let ids = self.mlp();
        classify(
            g,
            self.params.get(ids.w1),
            &self.params.row(ids.b1).to_owned(),
            self.params.get(ids.w2),
            &self.params.row(ids.b2).to_owned(),
        )
    }

    /// Accumulates head gradients and returns `dL/dV'`.
    pub fn classify_backward(
        &self,
        clip: &ClipForward,
        cache: &MlpCache,
        d_logits: &Array1<f64>,
        grads: &mut Grads,
    ) -> Array2<f64> {
        let ids = self.mlp();
        let out = classify_backward(
            cache,
            &clip.g,
            self.params.get(ids.w1),
            self.params.get(ids.w2),
            d_logits,
        );
        grads.add(ids.w1, &out.w1);
        grads.add_row(ids.b1, out.b1.view());
        grads.add(ids.w2, &out.w2);
        grads.add_row(ids.b2, out.b2.view());
        hierarchical_pool_backward(&clip.pool, &out.d_g, self.context.layout.num_nodes())
    }

    pub fn has_forecast_head(&self) -> bool {
        self.ids.forecast.is_some()
    }

    /// Per-node forecasts, N' x (horizon * F).
    pub fn forecast(&self, v_out: &Array2<f64>) -> Array2<f64> {
        let (w, b) = self.ids.forecast.expect("model has no forecast head");
        forecast_head(v_out, self.params.get(w), &self.params.row(b).to_owned())
    }

    pub fn forecast_backward(&self, clip: &ClipForward, d_forecast: &Array2<f64>, grads: &mut Grads) -> Array2<f64> {
        let (w, b) = self.ids.forecast.expect("model has no forecast head");
        let (d_v, d_w, d_b) = forecast_head_backward(&clip.v_out, self.params.get(w), d_forecast);
        grads.add(w, &d_w);
        grads.add_row(b, d_b.view());
        d_v
    }

    /// Replaces this model's parameters with those of `other` by name,
    /// requiring the same names and shapes.
    pub fn load_params(&mut self, tensors: &[(String, Array2<f64>)]) -> Result<()> {
        let mut problems = Vec::new();
        for t in self.params.tensors() {
            match tensors.iter().find(|(n, _)| n == &t.name) {
                None => problems.push(format!("{} (missing)", t.name)),
                Some((_, v)) if v.dim() != t.value.dim() => {
                    problems.push(format!("{} (shape {:?} vs {:?})", t.name, v.dim(), t.value.dim()))
                }
                _ => {}
            }
        }
        for (n, _) in tensors {
            if self.params.id(n).is_none() {
                problems.push(format!("{n} (unexpected)"));
            }
        }
        if !problems.is_empty() {
            return Err(Error::Checkpoint(format!(
                "parameter mismatch: {}",
                problems.join(", ")
            )));
        }
        for (n, v) in tensors {
            let id = self.params.id(n).expect("checked");
            self.params.get_mut(id).assign(v);
        }
        Ok(())
    }

    /// Copies the graph-construction and GCN tensors from a pretrained model.
    /// Heads keep their fresh initialization.
    pub fn transfer_from(&mut self, source: &ModelState) -> Result<Vec<String>> {
        let mut mismatched = Vec::new();
        let mut copied = Vec::new();
        for t in self.params.tensors() {
            if !TRANSFER_PREFIXES.iter().any(|p| t.name.starts_with(p)) {
                continue;
            }
            match source.params.by_name(&t.name) {
                Some(src) if src.value.dim() == t.value.dim() => copied.push(t.name.clone()),
                Some(src) => mismatched.push(format!("{} {:?} vs {:?}", t.name, src.value.dim(), t.value.dim())),
                None => mismatched.push(format!("{} missing in source", t.name)),
            }
        }
        if !mismatched.is_empty() {
            return Err(Error::Transfer(mismatched));
        }
        for name in &copied {
            let src = source.params.by_name(name).expect("checked").value.clone();
            let id = self.params.id(name).expect("present");
            self.params.get_mut(id).assign(&src);
        }
        Ok(copied)
    }
}

pub(crate) fn sigmoid(v: f64) -> f64 {
    1.0 / (1.0 + (-v).exp())
}

/// Clip-independent part of a forward pass.
#[derive(Debug, Clone)]
pub struct SharedForward {
    /// Projected semantic embeddings (N' x K).
    pub u: Option<Array2<f64>>,
    pub s_e: Option<Array2<f64>>,
    sem_cache: Option<SemanticCache>,
    pub alpha: f64,
}

/// Every intermediate of one clip's graph and GCN pass.
#[derive(Debug, Clone)]
pub struct ClipForward {
    /// Temporal embeddings `[h_forward | h_backward]`.
    pub c: Array2<f64>,
    att: Option<AttentionCache>,
    pub bundle: SimilarityBundle,
    pub mask: Array2<f64>,
    /// Final adjacency.
    pub s: Array2<f64>,
    /// Node features `[C | U]`.
    pub v: Array2<f64>,
    gcn: GcnCache,
    /// GCN output V'.
    pub v_out: Array2<f64>,
    pool: PoolCache,
    /// Graph embedding.
    pub g: Array1<f64>,
}

#[derive(Debug, Clone)]
pub struct BatchForward {
    pub shared: SharedForward,
    gru: BiGruCache,
    pub clips: Vec<ClipForward>,
}
