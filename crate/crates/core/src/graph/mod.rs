//! Per-clip graph construction: meta-node series, BiGRU temporal embeddings,
//! the semantic, spatial and temporal similarity matrices, and their fusion
//! into a thresholded directed adjacency.

mod attention;
mod fusion;
mod gru;
mod meta;
mod neurograph;
mod similarity;

pub use attention::{temporal_similarity, temporal_similarity_backward, AttentionCache};
pub use fusion::{fuse_and_threshold, gate_matrix, threshold_rows, GateMode, SimilarityBundle};
pub use gru::{bigru_backward, bigru_forward, gru_backward, gru_forward, BiGruCache, GruGrads, GruTrace, GruWeights};
pub use meta::build_meta_series;
pub use neurograph::{build_neurograph, temporal_encode, write_graph_export, NeuroGraph, TemporalEmbeddings};
pub use similarity::{
    gaussian_kernel, node_distances, semantic_similarity, semantic_similarity_backward, spatial_similarity,
    SemanticCache, SpatialKernel,
};

pub use crate::semantics::toy_taxonomy;
