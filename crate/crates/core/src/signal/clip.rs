use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array2, Array3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CLIP_MAGIC: &[u8; 4] = b"NGC1";

const KIND_RAW: u8 = 0;
const KIND_FEATURE: u8 = 1;

/// Clip label. Detection uses `label != NonSeizure`; classification uses the
/// four seizure groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "non_seizure")]
    NonSeizure,
    CF,
    GN,
    AB,
    CT,
}

impl Label {
    pub const ALL: [Label; 5] = [Label::NonSeizure, Label::CF, Label::GN, Label::AB, Label::CT];
    pub const SEIZURE_TYPES: [Label; 4] = [Label::CF, Label::GN, Label::AB, Label::CT];

    /// Byte code used in clip file headers.
    pub fn code(self) -> u8 {
        match self {
            Label::NonSeizure => 0,
            Label::CF => 1,
            Label::GN => 2,
            Label::AB => 3,
            Label::CT => 4,
        }
    }

    pub fn from_code(code: u8) -> Option<Label> {
        Label::ALL.get(code as usize).copied()
    }

    pub fn is_seizure(self) -> bool {
        self != Label::NonSeizure
    }

    /// Class index for the 4-way seizure-type task.
    pub fn seizure_class(self) -> Option<usize> {
        match self {
            Label::NonSeizure => None,
            other => Some(other.code() as usize - 1),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Label::NonSeizure => "non_seizure",
            Label::CF => "CF",
            Label::GN => "GN",
            Label::AB => "AB",
            Label::CT => "CT",
        }
    }

    pub fn parse(s: &str) -> Option<Label> {
        Label::ALL.into_iter().find(|l| l.name().eq_ignore_ascii_case(s))
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// One 60 s window of N-channel EEG in microvolts.
#[derive(Debug, Clone, PartialEq)]
pub struct RawClip {
    pub clip_id: String,
    /// N x (sample_rate_hz * 60)
    pub channels: Array2<f32>,
    pub label: Label,
    pub patient_id: String,
    pub sample_rate_hz: f64,
}

/// Per-second log-amplitude spectra of a clip, shape N x 60 x F.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureClip {
    pub clip_id: String,
    pub features: Array3<f32>,
    pub label: Label,
}

/// Either payload kind read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub enum ClipFile {
    Raw(RawClip),
    Feature(FeatureClip),
}

impl ClipFile {
    pub fn clip_id(&self) -> &str {
        match self {
            ClipFile::Raw(c) => &c.clip_id,
            ClipFile::Feature(c) => &c.clip_id,
        }
    }
}

// Header: magic "NGC1" | u8 kind | u32 id_len | id bytes | u32 N | u32 T | u32 F
// | u8 label code, all little-endian, followed by N*T*F f32 values row-major.
fn write_header(w: &mut impl Write, kind: u8, clip_id: &str, dims: [usize; 3], label: Label) -> std::io::Result<()> {
    w.write_all(CLIP_MAGIC)?;
    w.write_all(&[kind])?;
    w.write_all(&(clip_id.len() as u32).to_le_bytes())?;
    w.write_all(clip_id.as_bytes())?;
    for d in dims {
        w.write_all(&(d as u32).to_le_bytes())?;
    }
    w.write_all(&[label.code()])
}

fn write_payload<'a>(w: &mut impl Write, values: impl Iterator<Item = &'a f32>) -> std::io::Result<()> {
    for v in values {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_raw_clip(path: &Path, clip: &RawClip) -> Result<()> {
    let (n, t) = clip.channels.dim();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_header(&mut w, KIND_RAW, &clip.clip_id, [n, t, 1], clip.label)
        .and_then(|_| write_payload(&mut w, clip.channels.iter()))
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn write_feature_clip(path: &Path, clip: &FeatureClip) -> Result<()> {
    let (n, t, f) = clip.features.dim();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_header(&mut w, KIND_FEATURE, &clip.clip_id, [n, t, f], clip.label)
        .and_then(|_| write_payload(&mut w, clip.features.iter()))
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

/// Reads a clip file of either kind. Raw clips come back with an empty
/// `patient_id` (the manifest owns it) and a 200 Hz rate derived from T.
pub fn read_clip_file(path: &Path) -> Result<ClipFile> {
    let fail = |reason: &str| Error::ClipFormat {
        path: path.to_path_buf(),
        reason: reason.to_string(),
    };
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = BufReader::new(file);
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes).map_err(|e| Error::io(path, e))?;

    let mut cursor = Cursor { bytes: &bytes, pos: 0 };
    if cursor.take(4).ok_or_else(|| fail("truncated header"))? != CLIP_MAGIC {
        return Err(fail("bad magic"));
    }
    let kind = cursor.u8().ok_or_else(|| fail("truncated header"))?;
    let id_len = cursor.u32().ok_or_else(|| fail("truncated header"))? as usize;
    let id = cursor.take(id_len).ok_or_else(|| fail("truncated clip id"))?;
    let clip_id = String::from_utf8(id.to_vec()).map_err(|_| fail("clip id is not UTF-8"))?;
    let mut dims = [0usize; 3];
    for d in dims.iter_mut() {
        *d = cursor.u32().ok_or_else(|| fail("truncated header"))? as usize;
    }
    let label = cursor
        .u8()
        .and_then(Label::from_code)
        .ok_or_else(|| fail("bad label code"))?;
    let count = dims[0] * dims[1] * dims[2];
    let payload = cursor.take(count * 4).ok_or_else(|| fail("truncated payload"))?;
    if cursor.pos != bytes.len() {
        return Err(fail("trailing bytes after payload"));
    }
    let values: Vec<f32> = payload
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
        .collect();

    match kind {
        KIND_RAW => {
            if dims[2] != 1 {
                return Err(fail("raw payload must have F = 1"));
            }
            let channels = Array2::from_shape_vec((dims[0], dims[1]), values).map_err(|_| fail("payload shape"))?;
            Ok(ClipFile::Raw(RawClip {
                clip_id,
                sample_rate_hz: dims[1] as f64 / super::CLIP_SECONDS as f64,
                channels,
                label,
                patient_id: String::new(),
            }))
        }
        KIND_FEATURE => {
            let features =
                Array3::from_shape_vec((dims[0], dims[1], dims[2]), values).map_err(|_| fail("payload shape"))?;
            Ok(ClipFile::Feature(FeatureClip {
                clip_id,
                features,
                label,
            }))
        }
        _ => Err(fail("unknown payload kind")),
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let out = self.bytes.get(self.pos..self.pos + n)?;
        self.pos += n;
        Some(out)
    }

    fn u8(&mut self) -> Option<u8> {
        self.take(1).map(|b| b[0])
    }

    fn u32(&mut self) -> Option<u32> {
        self.take(4).map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}
