use std::collections::BTreeMap;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DEFAULT_TAXONOMY: &str = include_str!("../../data/taxonomy_10_20.json");

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ElectrodeSpec {
    name: String,
    xyz: [f64; 3],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TaxonomyFile {
    electrodes: Vec<ElectrodeSpec>,
    regions: Vec<String>,
    region_of: BTreeMap<String, String>,
    descriptors: BTreeMap<String, String>,
}

/// Electrode layout, region partition and per-node descriptor texts.
///
/// Canonical node index: electrodes `0..N` in layout order, then one
/// meta-node per region in region order.
#[derive(Debug, Clone, PartialEq)]
pub struct BrainTaxonomy {
    electrode_names: Vec<String>,
    coords: Array2<f64>,
    regions: Vec<String>,
    region_of: Vec<usize>,
    members: Vec<Vec<usize>>,
    descriptors: BTreeMap<String, String>,
}

impl BrainTaxonomy {
    /// The shipped 19-electrode 10-20 layout with six regions.
    pub fn default_10_20() -> Self {
        Self::from_json(DEFAULT_TAXONOMY).expect("bundled taxonomy is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        for key in ["electrodes", "regions", "region_of", "descriptors"] {
            if value.get(key).is_none() {
                return Err(Error::Schema(format!("missing key `{key}`")));
            }
        }
        let file: TaxonomyFile = serde_json::from_value(value).map_err(|e| Error::Schema(e.to_string()))?;
        Self::from_file(file)
    }

    fn from_file(file: TaxonomyFile) -> Result<Self> {
        if file.electrodes.is_empty() {
            return Err(Error::Schema("no electrodes".into()));
        }
        if file.regions.is_empty() {
            return Err(Error::Schema("no regions".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for name in file.electrodes.iter().map(|e| &e.name).chain(&file.regions) {
            if !seen.insert(name.as_str()) {
                return Err(Error::Schema(format!("duplicate node name `{name}`")));
            }
        }
        let mut region_of = Vec::with_capacity(file.electrodes.len());
        let mut members = vec![Vec::new(); file.regions.len()];
        for (i, e) in file.electrodes.iter().enumerate() {
            let region = file
                .region_of
                .get(&e.name)
                .ok_or_else(|| Error::Schema(format!("region_of missing electrode `{}`", e.name)))?;
            let r =
                file.regions.iter().position(|x| x == region).ok_or_else(|| {
                    Error::Schema(format!("electrode `{}` mapped to unknown region `{region}`", e.name))
                })?;
            region_of.push(r);
            members[r].push(i);
        }
        for (r, m) in members.iter().enumerate() {
            if m.is_empty() {
                return Err(Error::Schema(format!("region `{}` has no electrodes", file.regions[r])));
            }
        }
        for name in file.electrodes.iter().map(|e| &e.name).chain(&file.regions) {
            match file.descriptors.get(name) {
                Some(text) if !text.trim().is_empty() => {}
                _ => return Err(Error::Schema(format!("missing descriptor for `{name}`"))),
            }
        }
        let mut coords = Array2::zeros((file.electrodes.len(), 3));
        for (i, e) in file.electrodes.iter().enumerate() {
            let norm = e.xyz.iter().map(|v| v * v).sum::<f64>().sqrt();
            if (norm - 1.0).abs() > 1e-6 {
                return Err(Error::Schema(format!(
                    "electrode `{}` is not on the unit sphere (norm {norm})",
                    e.name
                )));
            }
            for k in 0..3 {
                coords[[i, k]] = e.xyz[k];
            }
        }
        Ok(BrainTaxonomy {
            electrode_names: file.electrodes.into_iter().map(|e| e.name).collect(),
            coords,
            regions: file.regions,
            region_of,
            members,
            descriptors: file.descriptors,
        })
    }

    pub fn to_json(&self) -> String {
        let file = TaxonomyFile {
            electrodes: self
                .electrode_names
                .iter()
                .enumerate()
                .map(|(i, name)| ElectrodeSpec {
                    name: name.clone(),
                    xyz: [self.coords[[i, 0]], self.coords[[i, 1]], self.coords[[i, 2]]],
                })
                .collect(),
            regions: self.regions.clone(),
            region_of: self
                .electrode_names
                .iter()
                .zip(&self.region_of)
                .map(|(n, &r)| (n.clone(), self.regions[r].clone()))
                .collect(),
            descriptors: self.descriptors.clone(),
        };
        serde_json::to_string_pretty(&file).expect("taxonomy serializes")
    }

    pub fn num_electrodes(&self) -> usize {
        self.electrode_names.len()
    }

    pub fn num_regions(&self) -> usize {
        self.regions.len()
    }

    pub fn electrode_names(&self) -> &[String] {
        &self.electrode_names
    }

    pub fn regions(&self) -> &[String] {
        &self.regions
    }

    /// Unit-sphere electrode positions, N x 3.
    pub fn coords(&self) -> &Array2<f64> {
        &self.coords
    }

    pub fn region_of(&self, electrode: usize) -> usize {
        self.region_of[electrode]
    }

    /// Electrode indices belonging to region `r`, in layout order.
    pub fn members(&self, r: usize) -> &[usize] {
        &self.members[r]
    }

    pub fn descriptor(&self, node: &str) -> Option<&str> {
        self.descriptors.get(node).map(String::as_str)
    }

    pub fn layout(&self, with_meta: bool) -> NodeLayout {
        NodeLayout {
            num_electrodes: self.num_electrodes(),
            num_meta: if with_meta { self.num_regions() } else { 0 },
        }
    }

    /// Node names in canonical index order.
    pub fn node_names(&self, with_meta: bool) -> Vec<String> {
        let mut names = self.electrode_names.clone();
        if with_meta {
            names.extend(self.regions.iter().cloned());
        }
        names
    }
}

impl Default for BrainTaxonomy {
    fn default() -> Self {
        Self::default_10_20()
    }
}

/// Number of electrode rows and meta-node rows in every node-indexed matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeLayout {
    pub num_electrodes: usize,
    pub num_meta: usize,
}

impl NodeLayout {
    pub fn num_nodes(&self) -> usize {
        self.num_electrodes + self.num_meta
    }

    pub fn has_meta(&self) -> bool {
        self.num_meta > 0
    }
}

/// Three electrodes in two regions (`a`, `b` in `left`; `c` in `right`),
/// small enough for exhaustive gradient checks.
pub fn toy_taxonomy() -> BrainTaxonomy {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let text = serde_json::json!({
        "electrodes": [
            {"name": "a", "xyz": [1.0, 0.0, 0.0]},
            {"name": "b", "xyz": [s, s, 0.0]},
            {"name": "c", "xyz": [0.0, 0.0, 1.0]},
        ],
        "regions": ["left", "right"],
        "region_of": {"a": "left", "b": "left", "c": "right"},
        "descriptors": {
            "a": "motor cortex hand movement",
            "b": "auditory cortex hearing speech",
            "c": "visual cortex sight colour",
            "left": "left hemisphere language movement",
            "right": "right hemisphere spatial vision",
        },
    });
    BrainTaxonomy::from_json(&text.to_string()).expect("toy taxonomy is valid")
}

pub fn load_taxonomy(path: &Path) -> Result<BrainTaxonomy> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    BrainTaxonomy::from_json(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_json() -> serde_json::Value {
        serde_json::from_str(DEFAULT_TAXONOMY).unwrap()
    }

    #[test]
    fn default_layout_counts() {
        let t = BrainTaxonomy::default_10_20();
        assert_eq!(t.num_electrodes(), 19);
        assert_eq!(t.num_regions(), 6);
        assert_eq!(t.node_names(true).len(), 25);
        for name in t.node_names(true) {
            assert!(!t.descriptor(&name).unwrap().is_empty());
        }
        for row in t.coords().rows() {
            assert!((row.dot(&row).sqrt() - 1.0).abs() < 1e-6);
        }
        for r in 0..6 {
            assert!(!t.members(r).is_empty());
        }
    }

    #[test]
    fn missing_descriptor_is_schema_error() {
        let mut v = default_json();
        v["descriptors"].as_object_mut().unwrap().remove("CZ");
        let err = BrainTaxonomy::from_json(&v.to_string()).unwrap_err();
        assert!(matches!(&err, Error::Schema(m) if m.contains("CZ")), "{err}");
    }

    #[test]
    fn unknown_region_is_schema_error() {
        let mut v = default_json();
        v["region_of"]["O1"] = "cerebellum".into();
        let err = BrainTaxonomy::from_json(&v.to_string()).unwrap_err();
        assert!(matches!(&err, Error::Schema(m) if m.contains("cerebellum")), "{err}");
    }

    #[test]
    fn missing_top_level_key_is_named() {
        let mut v = default_json();
        v.as_object_mut().unwrap().remove("regions");
        let err = BrainTaxonomy::from_json(&v.to_string()).unwrap_err();
        assert!(matches!(&err, Error::Schema(m) if m.contains("regions")));
    }

    #[test]
    fn json_round_trip() {
        let t = BrainTaxonomy::default_10_20();
        assert_eq!(BrainTaxonomy::from_json(&t.to_json()).unwrap(), t);
    }
}
