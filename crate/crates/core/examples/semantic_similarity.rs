//! Encode the bundled electrode and region descriptors and compare them.

use ndarray::Array1;
use neurognn::graph::{semantic_similarity, spatial_similarity};
use neurognn::semantics::{encode_descriptors, project_semantics, BrainTaxonomy, FallbackEncoder};

fn main() -> neurognn::Result<()> {
    let taxonomy = BrainTaxonomy::default_10_20();
    let names = taxonomy.node_names(true);
    let raw = encode_descriptors(&taxonomy, &FallbackEncoder, true)?;
    // identity projection keeps the raw geometry
    let eye = ndarray::Array2::eye(raw.ncols());
    let u = project_semantics(&raw, &eye, &Array1::zeros(raw.ncols()))?;
    let (s_e, _) = semantic_similarity(&u, &names)?;
    let spatial = spatial_similarity(&taxonomy, true);
    println!("sigma {:.4}  tau {:.4}", spatial.sigma, spatial.tau);
    for (a, b) in [("FP1", "FP2"), ("O1", "O2"), ("FP1", "O2"), ("T3", "temporal")] {
        let i = names.iter().position(|n| n == a).unwrap();
        let j = names.iter().position(|n| n == b).unwrap();
        println!(
            "{a:>8} - {b:<8} semantic {:.3}  spatial {:.3}",
            s_e[[i, j]],
            spatial.similarity[[i, j]]
        );
    }
    Ok(())
}
