use std::io::Write;
use std::path::Path;

use base64::engine::general_purpose::STANDARD;
use base64::Engine;
use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::Label;
use crate::train::Predictions;

/// One line of an embeddings file. `g` is base64 of little-endian f32s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingRecord {
    pub clip_id: String,
    pub label: Label,
    pub dim: usize,
    pub g: String,
}

impl EmbeddingRecord {
    pub fn new(clip_id: &str, label: Label, g: &Array1<f64>) -> Self {
        let bytes: Vec<u8> = g.iter().flat_map(|&v| (v as f32).to_le_bytes()).collect();
        EmbeddingRecord {
            clip_id: clip_id.to_string(),
            label,
            dim: g.len(),
            g: STANDARD.encode(bytes),
        }
    }

    pub fn vector(&self) -> Result<Vec<f32>> {
        let bytes = STANDARD
            .decode(&self.g)
            .map_err(|e| Error::Schema(format!("{}: bad base64 payload: {e}", self.clip_id)))?;
        if bytes.len() != self.dim * 4 {
            return Err(Error::Schema(format!(
                "{}: payload holds {} bytes for dim {}",
                self.clip_id,
                bytes.len(),
                self.dim
            )));
        }
        Ok(bytes
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect())
    }
}

/// Graph embeddings of every predicted clip, sorted by clip id.
pub fn embedding_records(preds: &Predictions) -> Vec<EmbeddingRecord> {
    let mut records: Vec<EmbeddingRecord> = preds
        .clip_ids
        .iter()
        .zip(&preds.labels)
        .zip(&preds.embeddings)
        .map(|((id, &label), g)| EmbeddingRecord::new(id, label, g))
        .collect();
    records.sort_by(|a, b| a.clip_id.cmp(&b.clip_id));
    records
}

/// Writes the records as JSON lines.
pub fn export_embeddings(path: &Path, records: &[EmbeddingRecord]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn read_embeddings(path: &Path) -> Result<Vec<EmbeddingRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Error::from))
        .collect()
}

/// Stacks the records into an M x Z matrix plus their labels.
pub fn embedding_matrix(records: &[EmbeddingRecord]) -> Result<(Array2<f64>, Vec<Label>)> {
    let dim = records.first().map_or(0, |r| r.dim);
    let mut data = Vec::with_capacity(records.len() * dim);
    for r in records {
        if r.dim != dim {
            return Err(Error::Schema(format!(
                "{} has dim {}, expected {dim}",
                r.clip_id, r.dim
            )));
        }
        data.extend(r.vector()?.into_iter().map(f64::from));
    }
    let m = Array2::from_shape_vec((records.len(), dim), data).expect("sizes checked");
    Ok((m, records.iter().map(|r| r.label).collect()))
}
