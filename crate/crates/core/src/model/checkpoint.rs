//! Versioned checkpoint container.
//!
//! ```text
//! "NGCK" | u32 version | u32 header_len | JSON header
//! | u32 tensor_count | per tensor: u32 name_len, name, u32 ndim, u32 dims..., f32 payload
//! ```
//!
//! All integers and floats are little-endian. The header carries the model
//! config, the taxonomy, the pretraining-transfer whitelist and free-form
//! metadata. Normalizer statistics are stored as the `normalizer.mean` and
//! `normalizer.std` tensors.

use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use super::config::ModelConfig;
use super::network::{ModelState, TRANSFER_PREFIXES};
use crate::error::{Error, Result};
use crate::semantics::{BrainTaxonomy, EncoderRegistry};
use crate::train::Normalizer;

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"NGCK";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub format_version: u32,
    pub model: ModelConfig,
    pub taxonomy: serde_json::Value,
    /// Tensor name prefixes copied by pretraining transfer.
    pub transfer_whitelist: Vec<String>,
    #[serde(default)]
    pub metadata: serde_json::Value,
}

fn put_u32(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(&(v as u32).to_le_bytes());
}

fn put_tensor(out: &mut Vec<u8>, name: &str, value: &Array2<f64>) {
    put_u32(out, name.len());
    out.extend_from_slice(name.as_bytes());
    put_u32(out, 2);
    put_u32(out, value.nrows());
    put_u32(out, value.ncols());
    for v in value.iter() {
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
}

/// Serializes a model with optional metadata.
pub fn checkpoint_bytes(state: &ModelState, metadata: serde_json::Value) -> Result<Vec<u8>> {
    let header = CheckpointHeader {
        format_version: CHECKPOINT_VERSION,
        model: state.config.clone(),
        taxonomy: serde_json::from_str(&state.taxonomy().to_json())?,
        transfer_whitelist: TRANSFER_PREFIXES.iter().map(|s| s.to_string()).collect(),
        metadata,
    };
    let json = serde_json::to_vec(&header)?;
    let mut out = Vec::new();
    out.extend_from_slice(CHECKPOINT_MAGIC);
    put_u32(&mut out, CHECKPOINT_VERSION as usize);
    put_u32(&mut out, json.len());
    out.extend_from_slice(&json);
    put_u32(&mut out, state.params.len() + 2);
    for t in state.params.tensors() {
        put_tensor(&mut out, &t.name, &t.value);
    }
    let f = state.normalizer.mean.len();
    put_tensor(
        &mut out,
        "normalizer.mean",
        &state
            .normalizer
            .mean
            .clone()
            .into_shape_with_order((1, f))
            .expect("1 x F"),
    );
    put_tensor(
        &mut out,
        "normalizer.std",
        &state
            .normalizer
            .std
            .clone()
            .into_shape_with_order((1, f))
            .expect("1 x F"),
    );
    Ok(out)
}

pub fn save_checkpoint(path: &Path, state: &ModelState, metadata: serde_json::Value) -> Result<()> {
    let bytes = checkpoint_bytes(state, metadata)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let out = self
            .bytes
            .get(self.pos..self.pos + n)
            .ok_or_else(|| Error::Checkpoint("truncated checkpoint".into()))?;
        self.pos += n;
        Ok(out)
    }

    fn u32(&mut self) -> Result<usize> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as usize)
    }
}

/// Parses the header and raw tensors without building a model.
pub fn read_checkpoint_parts(bytes: &[u8]) -> Result<(CheckpointHeader, Vec<(String, Array2<f64>)>)> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != CHECKPOINT_MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let version = r.u32()?;
    if version != CHECKPOINT_VERSION as usize {
        return Err(Error::Checkpoint(format!("unsupported checkpoint version {version}")));
    }
    let hlen = r.u32()?;
    let header: CheckpointHeader = serde_json::from_slice(r.take(hlen)?)?;
    let count = r.u32()?;
    let mut tensors = Vec::with_capacity(count);
    for _ in 0..count {
        let nlen = r.u32()?;
        let name = String::from_utf8(r.take(nlen)?.to_vec())
            .map_err(|_| Error::Checkpoint("tensor name is not UTF-8".into()))?;
        let ndim = r.u32()?;
        if ndim != 2 {
            return Err(Error::Checkpoint(format!("tensor {name} has {ndim} dims, expected 2")));
        }
        let (rows, cols) = (r.u32()?, r.u32()?);
        let payload = r.take(rows * cols * 4)?;
        let values: Vec<f64> = payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
            .collect();
        tensors.push((
            name,
            Array2::from_shape_vec((rows, cols), values).expect("sized payload"),
        ));
    }
    if r.pos != bytes.len() {
        return Err(Error::Checkpoint("trailing bytes".into()));
    }
    Ok((header, tensors))
}

/// Rebuilds a model from checkpoint bytes. The encoder named in the stored
/// config must be resolvable in `registry`.
pub fn model_from_bytes(bytes: &[u8], registry: &EncoderRegistry) -> Result<(ModelState, CheckpointHeader)> {
    let (header, mut tensors) = read_checkpoint_parts(bytes)?;
    let taxonomy = BrainTaxonomy::from_json(&header.taxonomy.to_string())?;
    let encoder = registry.resolve(&header.model.encoder)?;
    let mut state = ModelState::new(header.model.clone(), taxonomy, encoder, 0)?;
    let take = |tensors: &mut Vec<(String, Array2<f64>)>, name: &str| -> Result<Array2<f64>> {
        let i = tensors
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| Error::Checkpoint(format!("missing tensor {name}")))?;
        Ok(tensors.remove(i).1)
    };
    let mean = take(&mut tensors, "normalizer.mean")?;
    let std = take(&mut tensors, "normalizer.std")?;
    state.normalizer = Normalizer {
        mean: mean.row(0).to_owned(),
        std: std.row(0).to_owned(),
    };
    state.load_params(&tensors)?;
    Ok((state, header))
}

pub fn load_checkpoint(path: &Path, registry: &EncoderRegistry) -> Result<(ModelState, CheckpointHeader)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    model_from_bytes(&bytes, registry)
}
