//! Export graph embeddings, cluster them and draw a 2D PCA scatter plot.

use neurognn::eval::{
    clustering_purity, embedding_matrix, embedding_records, export_embeddings, project_2d, read_embeddings,
    write_scatter_svg,
};
use neurognn::model::{ModelConfig, ModelState, Task};
use neurognn::semantics::{BrainTaxonomy, FallbackEncoder};
use neurognn::signal::{synthesize_features, Label, SynthConfig};
use neurognn::train::{evaluate_clips, TrainConfig};

fn main() -> neurognn::Result<()> {
    let data = synthesize_features(&SynthConfig::new(
        [(Label::CF, 3), (Label::GN, 3), (Label::AB, 3), (Label::CT, 3)],
        1,
    ))?;
    let config = ModelConfig {
        hidden_dim: 8,
        semantic_dim: 8,
        gcn_dim: 8,
        heads: 2,
        task: Task::Classification,
        ..ModelConfig::default()
    };
    let state = ModelState::new(config, BrainTaxonomy::default_10_20(), &FallbackEncoder, 0)?;
    let clips: Vec<_> = data.train.iter().chain(&data.val).chain(&data.test).cloned().collect();
    let preds = evaluate_clips(&state, &clips, &TrainConfig::for_task(Task::Classification))?;

    let dir = tempfile::tempdir().expect("temp dir");
    let path = dir.path().join("embeddings.jsonl");
    export_embeddings(&path, &embedding_records(&preds))?;
    let (matrix, labels) = embedding_matrix(&read_embeddings(&path)?)?;
    let codes: Vec<usize> = labels.iter().map(|l| l.code() as usize).collect();
    println!("{} embeddings of length {}", matrix.nrows(), matrix.ncols());
    println!(
        "purity (untrained model, k = 4): {:.3}",
        clustering_purity(&matrix, &codes, 4, 0, false)?
    );
    let projection = project_2d(&matrix)?;
    println!(
        "explained variance {:.4} / {:.4}",
        projection.variances[0], projection.variances[1]
    );
    let svg = dir.path().join("projection.svg");
    write_scatter_svg(&svg, &projection.coords, &labels, "untrained embeddings")?;
    println!(
        "scatter plot: {} bytes",
        std::fs::metadata(&svg).map(|m| m.len()).unwrap_or(0)
    );
    Ok(())
}
