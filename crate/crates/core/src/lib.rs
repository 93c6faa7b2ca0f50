//! Dynamic multi-context graph neural network for EEG seizure detection and
//! seizure-type classification.
//!
//! The pipeline turns 60 second multichannel EEG clips into per-second FFT
//! log-amplitude frames, builds one graph per clip over the electrodes plus
//! six brain-region meta-nodes, and classifies the graph with a residual GCN,
//! hierarchical pooling and an MLP head. Edge weights fuse four contexts:
//! electrode geometry, learned temporal attention, descriptor-text semantics
//! and region membership. A self-supervised forecasting task can pretrain the
//! graph-construction and GNN weights before the downstream task.
//!
//! Module map:
//!
//! - [`signal`]: clip and manifest formats, synthetic EEG, preprocessing.
//! - [`semantics`]: brain taxonomy, text encoders, semantic projection.
//! - [`graph`]: meta-node series, BiGRU, similarity matrices, fused adjacency.
//! - [`model`]: GCN block, pooling, heads, parameters and checkpoints.
//! - [`train`]: losses, optimizer, training loop, transfer, ablations.
//! - [`eval`]: AUROC, weighted F1, clustering purity, embeddings, PCA view.
//! - [`cli`]: the `neurognn` command line.

pub mod cli;
pub mod error;
pub mod eval;
pub mod graph;
pub mod model;
pub mod semantics;
pub mod signal;
pub mod train;

pub use error::{Error, Result};
