//! Build the dynamic multi-context graph of one synthetic clip with a
//! freshly initialized small model.

use neurognn::graph::build_neurograph;
use neurognn::model::{ModelConfig, ModelState};
use neurognn::semantics::{BrainTaxonomy, FallbackEncoder};
use neurognn::signal::{synthesize_features, Label, SynthConfig};

fn main() -> neurognn::Result<()> {
    let data = synthesize_features(&SynthConfig::new([(Label::GN, 2), (Label::NonSeizure, 2)], 3))?;
    let config = ModelConfig {
        hidden_dim: 16,
        semantic_dim: 16,
        gcn_dim: 8,
        heads: 4,
        ..ModelConfig::default()
    };
    let state = ModelState::new(config, BrainTaxonomy::default_10_20(), &FallbackEncoder, 0)?;
    let clip = data
        .train
        .iter()
        .chain(&data.test)
        .find(|c| c.label == Label::GN)
        .expect("a GN clip");
    let graph = build_neurograph(clip, &state)?;
    let edges = graph.s.iter().filter(|&&v| v > 0.0).count();
    println!("clip {} ({})", clip.clip_id, clip.label.name());
    println!(
        "V {:?}  S {:?}  kept edges {edges}/{}",
        graph.v.dim(),
        graph.s.dim(),
        graph.s.len()
    );
    println!("alpha {:.3}", graph.bundle.alpha);
    for (i, name) in graph.node_index.iter().enumerate().skip(19) {
        let row = graph.s.row(i);
        println!("{name:<11} degree {:.3}", row.sum());
    }
    Ok(())
}
