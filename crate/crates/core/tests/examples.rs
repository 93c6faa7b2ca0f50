//! Runs every program in `examples/`. `cargo test` builds them next to the
//! test binaries.

use std::path::PathBuf;
use std::process::Command;

fn example_path(name: &str) -> PathBuf {
    let exe = std::env::current_exe().expect("test binary path");
    let profile_dir = exe.parent().and_then(|deps| deps.parent()).expect("target profile dir");
    profile_dir
        .join("examples")
        .join(format!("{name}{}", std::env::consts::EXE_SUFFIX))
}

fn run(name: &str) -> String {
    let path = example_path(name);
    assert!(path.exists(), "{} not built", path.display());
    let out = Command::new(&path)
        .env_remove("NEUROGNN_EPOCHS")
        .output()
        .expect("spawn example");
    assert!(
        out.status.success(),
        "{name} failed:\n{}\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 output")
}

#[test]
fn synth_dataset() {
    let out = run("synth_dataset");
    assert!(out.contains("train") && out.contains("first train clip"));
}

#[test]
fn preprocess_recording() {
    assert!(!run("preprocess_recording").is_empty());
}

#[test]
fn semantic_similarity() {
    assert!(run("semantic_similarity").contains("sigma"));
}

#[test]
fn build_graph() {
    assert!(run("build_graph").contains("degree"));
}

#[test]
fn train_detection() {
    assert!(run("train_detection").contains("test AUROC"));
}

#[test]
fn pretrain_transfer() {
    assert!(run("pretrain_transfer").contains("carried over"));
}

#[test]
fn ablation_table() {
    let out = run("ablation_table");
    for name in ["w/o. Semantics", "w/o. Space", "w/o. Meta-Nodes"] {
        assert!(out.contains(name), "missing {name}");
    }
}

#[test]
fn embeddings_projection() {
    assert!(run("embeddings_projection").contains("purity"));
}

#[test]
fn checkpoint_roundtrip() {
    assert!(run("checkpoint_roundtrip").contains("tensors"));
}

#[test]
fn subsample_manifest() {
    assert!(run("subsample_manifest").contains("ratio 0.2"));
}
