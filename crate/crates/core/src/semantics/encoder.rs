use std::collections::BTreeMap;
use std::path::Path;

use ndarray::Array2;
use serde::Deserialize;

use super::BrainTaxonomy;
use crate::error::{Error, Result};

pub const FALLBACK_DIM: usize = 256;

/// Maps text to a fixed-length vector.
pub trait TextEncoder: Send + Sync {
    fn dim(&self) -> usize;
    fn encode(&self, text: &str) -> std::result::Result<Vec<f64>, String>;
}

/// Hashed bag-of-words encoder.
///
/// Text is lowercased and split on non-alphanumeric characters. Each token is
/// hashed with 64-bit FNV-1a over its UTF-8 bytes and counted in bucket
/// `hash % 256`. The count vector is L2-normalized; empty text gives zeros.
#[derive(Debug, Clone, Copy, Default)]
pub struct FallbackEncoder;

impl FallbackEncoder {
    pub fn bucket(token: &str) -> usize {
        let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
        for b in token.as_bytes() {
            hash ^= *b as u64;
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
        (hash % FALLBACK_DIM as u64) as usize
    }
}

impl TextEncoder for FallbackEncoder {
    fn dim(&self) -> usize {
        FALLBACK_DIM
    }

    fn encode(&self, text: &str) -> std::result::Result<Vec<f64>, String> {
        let mut v = vec![0.0; FALLBACK_DIM];
        let lower = text.to_lowercase();
        for token in lower.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()) {
            v[Self::bucket(token)] += 1.0;
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
        }
        Ok(v)
    }
}

/// Vectors computed offline by an external model, keyed by exact text.
///
/// File format: `{"dim": D, "vectors": {"<text>": [f, ...], ...}}`.
#[derive(Debug, Clone, Deserialize)]
pub struct PrecomputedEncoder {
    dim: usize,
    vectors: BTreeMap<String, Vec<f64>>,
}

impl PrecomputedEncoder {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let enc: PrecomputedEncoder = serde_json::from_str(&text)?;
        if let Some((k, v)) = enc.vectors.iter().find(|(_, v)| v.len() != enc.dim) {
            return Err(Error::Schema(format!(
                "vector for {k:?} has length {}, expected {}",
                v.len(),
                enc.dim
            )));
        }
        Ok(enc)
    }
}

impl TextEncoder for PrecomputedEncoder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn encode(&self, text: &str) -> std::result::Result<Vec<f64>, String> {
        self.vectors
            .get(text)
            .cloned()
            .ok_or_else(|| "text not present in precomputed table".to_string())
    }
}

/// Named encoders. `fallback` is always present; others are resolved as
/// `external:<name>`.
pub struct EncoderRegistry {
    encoders: BTreeMap<String, Box<dyn TextEncoder>>,
}

impl Default for EncoderRegistry {
    fn default() -> Self {
        let mut encoders: BTreeMap<String, Box<dyn TextEncoder>> = BTreeMap::new();
        encoders.insert("fallback".into(), Box::new(FallbackEncoder));
        EncoderRegistry { encoders }
    }
}

impl EncoderRegistry {
    pub fn register(&mut self, name: impl Into<String>, encoder: Box<dyn TextEncoder>) {
        self.encoders.insert(name.into(), encoder);
    }

    /// Resolves `fallback` or `external:<name>`.
    pub fn resolve(&self, spec: &str) -> Result<&dyn TextEncoder> {
        let key = match spec {
            "fallback" => "fallback",
            s => s
                .strip_prefix("external:")
                .ok_or_else(|| Error::Config(format!("unknown encoder spec `{spec}`")))?,
        };
        self.encoders
            .get(key)
            .map(|b| b.as_ref())
            .ok_or_else(|| Error::Config(format!("no encoder registered as `{key}`")))
    }
}

/// Encodes every node's descriptor in canonical node order.
pub fn encode_descriptors(taxonomy: &BrainTaxonomy, encoder: &dyn TextEncoder, with_meta: bool) -> Result<Array2<f64>> {
    let names = taxonomy.node_names(with_meta);
    let dim = encoder.dim();
    let mut out = Array2::zeros((names.len(), dim));
    for (i, name) in names.iter().enumerate() {
        let text = taxonomy.descriptor(name).unwrap_or_default();
        let v = encoder.encode(text).map_err(|reason| Error::Encoder {
            node: name.clone(),
            reason,
        })?;
        if v.len() != dim {
            return Err(Error::Encoder {
                node: name.clone(),
                reason: format!("encoder returned {} values, expected {dim}", v.len()),
            });
        }
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::Encoder {
                node: name.clone(),
                reason: "non-finite embedding".into(),
            });
        }
        out.row_mut(i).assign(&ndarray::Array1::from(v));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cosine(a: &[f64], b: &[f64]) -> f64 {
        let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
        let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
        dot / (na * nb)
    }

    #[test]
    fn fallback_basics() {
        let e = FallbackEncoder;
        assert!(e.encode("").unwrap().iter().all(|&v| v == 0.0));
        let v = e.encode("Motor cortex, hand area!").unwrap();
        assert!((v.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(e.encode("motor cortex").unwrap(), e.encode("cortex MOTOR").unwrap());
        assert!((cosine(&e.encode("frontal").unwrap(), &e.encode("frontal").unwrap()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_vocabulary_is_orthogonal() {
        let (a, b) = ("visual cortex", "hearing speech");
        let buckets_a: Vec<_> = a.split(' ').map(FallbackEncoder::bucket).collect();
        assert!(b.split(' ').all(|t| !buckets_a.contains(&FallbackEncoder::bucket(t))));
        let e = FallbackEncoder;
        assert_eq!(cosine(&e.encode(a).unwrap(), &e.encode(b).unwrap()), 0.0);
    }

    #[test]
    fn descriptors_encode_in_node_order() {
        let t = BrainTaxonomy::default_10_20();
        let raw = encode_descriptors(&t, &FallbackEncoder, true).unwrap();
        assert_eq!(raw.dim(), (25, FALLBACK_DIM));
        let again = encode_descriptors(&t, &FallbackEncoder, true).unwrap();
        assert_eq!(raw, again);
        let cz = FallbackEncoder.encode(t.descriptor("CZ").unwrap()).unwrap();
        assert_eq!(raw.row(17).to_vec(), cz);
        let occ = FallbackEncoder.encode(t.descriptor("occipital").unwrap()).unwrap();
        assert_eq!(raw.row(24).to_vec(), occ);
        for i in 0..25 {
            for j in 0..25 {
                let c = raw.row(i).dot(&raw.row(j));
                assert!((-1e-12..=1.0 + 1e-12).contains(&c));
            }
        }
    }

    struct Broken;
    impl TextEncoder for Broken {
        fn dim(&self) -> usize {
            4
        }
        fn encode(&self, text: &str) -> std::result::Result<Vec<f64>, String> {
            if text.contains("visual") {
                Err("boom".into())
            } else {
                Ok(vec![1.0; 4])
            }
        }
    }

    #[test]
    fn encoder_failure_names_node() {
        let t = BrainTaxonomy::default_10_20();
        let err = encode_descriptors(&t, &Broken, true).unwrap_err();
        assert!(matches!(err, Error::Encoder { ref node, .. } if node == "O1"), "{err}");
    }

    #[test]
    fn registry_resolution() {
        let mut reg = EncoderRegistry::default();
        assert_eq!(reg.resolve("fallback").unwrap().dim(), FALLBACK_DIM);
        assert!(reg.resolve("external:mpnet").is_err());
        assert!(reg.resolve("mpnet").is_err());
        reg.register("mpnet", Box::new(Broken));
        assert_eq!(reg.resolve("external:mpnet").unwrap().dim(), 4);
    }
}
