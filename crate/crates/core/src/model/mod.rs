//! GCN block, hierarchical pooling, task heads, the assembled model and its
//! checkpoint format.

mod checkpoint;
mod config;
mod gcn;
mod heads;
mod network;
mod params;
mod pool;

pub use checkpoint::{
    checkpoint_bytes, load_checkpoint, model_from_bytes, read_checkpoint_parts, save_checkpoint, CheckpointHeader,
    CHECKPOINT_MAGIC, CHECKPOINT_VERSION,
};
pub use config::{Ablation, ModelConfig, Task};
pub use gcn::{gcn_backward, gcn_forward, GcnCache};
pub use heads::{classify, classify_backward, forecast_head, forecast_head_backward, softmax, MlpCache, MlpGrads};
pub use network::{BatchForward, ClipForward, GraphContext, ModelState, SharedForward, TRANSFER_PREFIXES};
pub use params::{round_f32, Grads, ParamId, ParamStore, Tensor};
pub use pool::{hierarchical_pool, hierarchical_pool_backward, PoolCache};
