use std::path::{Path, PathBuf};

use ndarray::{s, Array2, Array3};
use serde::Serialize;

use super::fusion::SimilarityBundle;
use crate::error::{Error, Result};
use crate::model::ModelState;
use crate::signal::FeatureClip;

/// The per-clip graph `G = (V, S)`.
#[derive(Debug, Clone)]
pub struct NeuroGraph {
    pub clip_id: String,
    /// N' x (2M + K)
    pub v: Array2<f64>,
    /// N' x N', entries in [0, 1].
    pub s: Array2<f64>,
    pub node_index: Vec<String>,
    /// The similarity matrices that produced `s`.
    pub bundle: SimilarityBundle,
    /// Projected semantic embeddings U, when semantics are enabled.
    pub u: Option<Array2<f64>>,
}

/// Final BiGRU states per node.
#[derive(Debug, Clone)]
pub struct TemporalEmbeddings {
    /// N' x 2M, rows `[h_forward | h_backward]`.
    pub c: Array2<f64>,
    pub forward: Array2<f64>,
    pub backward: Array2<f64>,
}

/// Runs the shared BiGRU over prepared node series (N' x T x F).
pub fn temporal_encode(x: &Array3<f64>, state: &ModelState) -> Result<TemporalEmbeddings> {
    let fwd = state.forward(std::slice::from_ref(x))?;
    let c = fwd.clips[0].c.clone();
    let m = state.config.hidden_dim;
    Ok(TemporalEmbeddings {
        forward: c.slice(s![.., ..m]).to_owned(),
        backward: c.slice(s![.., m..]).to_owned(),
        c,
    })
}

/// Builds the graph for one clip. Deterministic: no stochastic operations.
pub fn build_neurograph(clip: &FeatureClip, state: &ModelState) -> Result<NeuroGraph> {
    let x = state.prepare_input(clip.features.view())?;
    let mut fwd = state.forward(std::slice::from_ref(&x))?;
    let out = fwd.clips.swap_remove(0);
    Ok(NeuroGraph {
        clip_id: clip.clip_id.clone(),
        v: out.v,
        s: out.s,
        node_index: state.context().node_names.clone(),
        bundle: out.bundle,
        u: fwd.shared.u,
    })
}

#[derive(Serialize)]
struct GraphExportHeader<'a> {
    clip_id: &'a str,
    node_index: &'a [String],
    v_shape: [usize; 2],
    s_shape: [usize; 2],
    alpha: f64,
    binary: String,
    layout: &'static str,
}

/// Writes `<clip_id>.graph.json` and `<clip_id>.graph.bin` into `dir`. The
/// binary holds V then S as row-major little-endian f32.
pub fn write_graph_export(dir: &Path, graph: &NeuroGraph) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let bin_name = format!("{}.graph.bin", graph.clip_id);
    let json_path = dir.join(format!("{}.graph.json", graph.clip_id));
    let bin_path = dir.join(&bin_name);
    let header = GraphExportHeader {
        clip_id: &graph.clip_id,
        node_index: &graph.node_index,
        v_shape: [graph.v.nrows(), graph.v.ncols()],
        s_shape: [graph.s.nrows(), graph.s.ncols()],
        alpha: graph.bundle.alpha,
        binary: bin_name,
        layout: "V then S, row-major float32 little-endian",
    };
    std::fs::write(&json_path, serde_json::to_string_pretty(&header)? + "\n").map_err(|e| Error::io(&json_path, e))?;
    let mut bytes = Vec::with_capacity((graph.v.len() + graph.s.len()) * 4);
    for v in graph.v.iter().chain(graph.s.iter()) {
        bytes.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    std::fs::write(&bin_path, bytes).map_err(|e| Error::io(&bin_path, e))?;
    Ok((json_path, bin_path))
}
