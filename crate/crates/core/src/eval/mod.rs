//! Metrics, clustering purity, embedding export and 2D projection.

mod cluster;
mod embed;
mod metrics;
mod project;

pub use cluster::{clustering_purity, kmeans, purity_of, KMeans, RESTARTS};
pub use embed::{embedding_matrix, embedding_records, export_embeddings, read_embeddings, EmbeddingRecord};
pub use metrics::{
    argmax, auroc, class_names, confusion_matrix, headline_metric, mean_std, metric_name, per_class_f1, weighted_f1,
    EvalReport,
};
pub use project::{project_2d, scatter_svg, write_scatter_svg, Projection};
