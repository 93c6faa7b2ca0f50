//! Save a model to the versioned checkpoint format and load it back.

use neurognn::model::{load_checkpoint, save_checkpoint, ModelConfig, ModelState};
use neurognn::semantics::{BrainTaxonomy, EncoderRegistry, FallbackEncoder};

fn main() -> neurognn::Result<()> {
    let config = ModelConfig {
        hidden_dim: 8,
        semantic_dim: 8,
        gcn_dim: 8,
        heads: 2,
        ..ModelConfig::default()
    };
    let state = ModelState::new(config, BrainTaxonomy::default_10_20(), &FallbackEncoder, 42)?;
    let dir = tempfile::tempdir().expect("temp dir");
    let path = dir.path().join("model.ngck");
    save_checkpoint(&path, &state, serde_json::json!({ "note": "example" }))?;
    let (back, header) = load_checkpoint(&path, &EncoderRegistry::default())?;
    println!(
        "format v{}; {} tensors, {} scalars",
        header.format_version,
        back.params.len(),
        back.params.num_scalars()
    );
    println!("transferable prefixes: {:?}", header.transfer_whitelist);
    let same = state
        .params
        .tensors()
        .iter()
        .zip(back.params.tensors())
        .all(|(a, b)| a == b);
    println!("parameters identical after reload: {same}");
    Ok(())
}
