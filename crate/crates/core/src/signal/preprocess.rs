use std::cell::RefCell;
use std::sync::Arc;

use ndarray::{Array2, Array3, ArrayView1};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::clip::{FeatureClip, Label, RawClip};
use crate::error::{Error, Result};

pub const SAMPLE_RATE_HZ: f64 = 200.0;
pub const CLIP_SECONDS: usize = 60;
/// One second at the working rate.
pub const SEGMENT_LEN: usize = 200;
/// Non-negative frequency bins of a 200-sample segment.
pub const FREQ_BINS: usize = SEGMENT_LEN / 2 + 1;
pub const LOG_EPSILON: f64 = 1e-8;

/// Linear-interpolation resampler. Output sample k sits at time `k / dst_hz`;
/// positions past the last input sample hold the last value.
pub fn resample(signal: &[f64], src_hz: f64, dst_hz: f64) -> Result<Vec<f64>> {
    if signal.is_empty() {
        return Err(Error::invalid("cannot resample an empty signal"));
    }
    if !(src_hz > 0.0 && dst_hz > 0.0) || !src_hz.is_finite() || !dst_hz.is_finite() {
        return Err(Error::invalid(format!(
            "sample rates must be positive, got {src_hz} -> {dst_hz}"
        )));
    }
    let out_len = (signal.len() as f64 * dst_hz / src_hz).round() as usize;
    let last = signal.len() - 1;
    let step = src_hz / dst_hz;
    Ok((0..out_len)
        .map(|k| {
            let pos = k as f64 * step;
            let i = pos.floor() as usize;
            if i >= last {
                return signal[last];
            }
            let frac = pos - i as f64;
            signal[i] + (signal[i + 1] - signal[i]) * frac
        })
        .collect())
}

/// A continuous multichannel recording at [`SAMPLE_RATE_HZ`].
#[derive(Debug, Clone)]
pub struct Recording {
    pub recording_id: String,
    pub patient_id: String,
    /// N x samples, microvolts.
    pub channels: Array2<f32>,
    pub sample_rate_hz: f64,
}

/// Seizure annotation in seconds from recording start, `[start_s, end_s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Annotation {
    pub start_s: f64,
    pub end_s: f64,
    pub label: Label,
}

impl Annotation {
    pub fn new(start_s: f64, end_s: f64, label: Label) -> Self {
        Annotation { start_s, end_s, label }
    }

    fn intersects(&self, w0: f64, w1: f64) -> bool {
        self.start_s < w1 && self.end_s > w0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowMode {
    /// Every window is emitted; labelled by its earliest intersecting seizure.
    Detection,
    /// Only windows containing exactly one seizure type (after truncation at
    /// the onset of a second type) are emitted.
    Classification,
}

/// Cuts a recording into non-overlapping 60 s clips and labels them.
/// Clip ids follow `<recording_id>-w<index>` with the window index in the
/// recording, so consecutive windows can be paired for forecasting.
pub fn window_and_label(recording: &Recording, annotations: &[Annotation], mode: WindowMode) -> Result<Vec<RawClip>> {
    if recording.sample_rate_hz != SAMPLE_RATE_HZ {
        return Err(Error::invalid(format!(
            "recording must be resampled to {SAMPLE_RATE_HZ} Hz first, got {}",
            recording.sample_rate_hz
        )));
    }
    for a in annotations {
        if !(a.end_s >= a.start_s) || !a.start_s.is_finite() || !a.end_s.is_finite() {
            return Err(Error::invalid(format!(
                "malformed annotation ({}, {}, {})",
                a.start_s, a.end_s, a.label
            )));
        }
        if !a.label.is_seizure() {
            return Err(Error::invalid("annotations must carry a seizure type"));
        }
    }
    for (i, a) in annotations.iter().enumerate() {
        for b in &annotations[i + 1..] {
            if a.label == b.label && a.start_s < b.end_s && b.start_s < a.end_s {
                return Err(Error::invalid(format!(
                    "overlapping {} annotations ({}, {}) and ({}, {})",
                    a.label, a.start_s, a.end_s, b.start_s, b.end_s
                )));
            }
        }
    }

    let window_len = SEGMENT_LEN * CLIP_SECONDS;
    let n_windows = recording.channels.ncols() / window_len;
    let mut clips = Vec::new();
    for w in 0..n_windows {
        let w0 = (w * CLIP_SECONDS) as f64;
        let w1 = w0 + CLIP_SECONDS as f64;
        let mut hits: Vec<&Annotation> = annotations.iter().filter(|a| a.intersects(w0, w1)).collect();
        hits.sort_by(|a, b| a.start_s.total_cmp(&b.start_s).then(a.label.cmp(&b.label)));

        let mut channels = recording
            .channels
            .slice(ndarray::s![.., w * window_len..(w + 1) * window_len])
            .to_owned();
        let label = match (mode, hits.first()) {
            (WindowMode::Detection, None) => Label::NonSeizure,
            (WindowMode::Detection, Some(first)) => first.label,
            (WindowMode::Classification, None) => continue,
            (WindowMode::Classification, Some(first)) => {
                let first = **first;
                let cut = hits
                    .iter()
                    .filter(|a| a.label != first.label)
                    .map(|a| a.start_s)
                    .fold(f64::INFINITY, f64::min);
                if cut.is_finite() {
                    if cut <= first.start_s.max(w0) {
                        // two types start together; no single-type prefix exists
                        continue;
                    }
                    let keep = (((cut - w0) * SAMPLE_RATE_HZ).round() as usize).min(window_len);
                    channels.slice_mut(ndarray::s![.., keep..]).fill(0.0);
                }
                first.label
            }
        };
        clips.push(RawClip {
            clip_id: super::window_id(&recording.recording_id, w),
            channels,
            label,
            patient_id: recording.patient_id.clone(),
            sample_rate_hz: SAMPLE_RATE_HZ,
        });
    }
    Ok(clips)
}

thread_local! {
    static PLAN: RefCell<Option<Arc<dyn Fft<f64>>>> = const { RefCell::new(None) };
}

fn with_plan<R>(f: impl FnOnce(&Arc<dyn Fft<f64>>) -> R) -> R {
    PLAN.with(|cell| {
        let mut slot = cell.borrow_mut();
        let plan = slot.get_or_insert_with(|| FftPlanner::new().plan_fft_forward(SEGMENT_LEN));
        f(plan)
    })
}

fn check_segment(segment: &[f64]) -> Result<()> {
    if segment.len() != SEGMENT_LEN {
        return Err(Error::invalid(format!(
            "segment must have {SEGMENT_LEN} samples, got {}",
            segment.len()
        )));
    }
    if segment.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("segment contains non-finite samples"));
    }
    Ok(())
}

/// Full two-sided DFT magnitude |X[k]| for k = 0..200.
pub fn amplitude_spectrum(segment: &[f64]) -> Result<Vec<f64>> {
    check_segment(segment)?;
    let mut buf: Vec<Complex<f64>> = segment.iter().map(|&x| Complex::new(x, 0.0)).collect();
    with_plan(|plan| plan.process(&mut buf));
    Ok(buf.iter().map(|c| c.norm()).collect())
}

/// `ln(|DFT(segment)[k]| + 1e-8)` for the 101 non-negative frequency bins.
pub fn fft_log_amplitude(segment: &[f64]) -> Result<Vec<f64>> {
    let mut amp = amplitude_spectrum(segment)?;
    amp.truncate(FREQ_BINS);
    amp.iter_mut().for_each(|a| *a = (*a + LOG_EPSILON).ln());
    Ok(amp)
}

fn log_amplitude_row(channel: ArrayView1<f32>, out: &mut Array2<f32>, buf: &mut Vec<Complex<f64>>) {
    with_plan(|plan| {
        for t in 0..CLIP_SECONDS {
            buf.clear();
            buf.extend(
                channel
                    .slice(ndarray::s![t * SEGMENT_LEN..(t + 1) * SEGMENT_LEN])
                    .iter()
                    .map(|&x| Complex::new(x as f64, 0.0)),
            );
            plan.process(buf);
            for k in 0..FREQ_BINS {
                out[[t, k]] = (buf[k].norm() + LOG_EPSILON).ln() as f32;
            }
        }
    });
}

/// Converts a raw clip to its N x 60 x 101 log-amplitude representation.
pub fn clip_to_features(clip: &RawClip) -> Result<FeatureClip> {
    if clip.sample_rate_hz != SAMPLE_RATE_HZ {
        return Err(Error::invalid(format!(
            "clip {} is at {} Hz, expected {SAMPLE_RATE_HZ}",
            clip.clip_id, clip.sample_rate_hz
        )));
    }
    let (n, len) = clip.channels.dim();
    if len != SEGMENT_LEN * CLIP_SECONDS {
        return Err(Error::invalid(format!(
            "clip {} has {len} samples per channel, expected {}",
            clip.clip_id,
            SEGMENT_LEN * CLIP_SECONDS
        )));
    }
    if clip.channels.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("clip {} has non-finite samples", clip.clip_id)));
    }
    let mut features = Array3::<f32>::zeros((n, CLIP_SECONDS, FREQ_BINS));
    let mut buf = Vec::with_capacity(SEGMENT_LEN);
    let mut frame = Array2::<f32>::zeros((CLIP_SECONDS, FREQ_BINS));
    for (c, channel) in clip.channels.outer_iter().enumerate() {
        log_amplitude_row(channel, &mut frame, &mut buf);
        features.index_axis_mut(ndarray::Axis(0), c).assign(&frame);
    }
    Ok(FeatureClip {
        clip_id: clip.clip_id.clone(),
        features,
        label: clip.label,
    })
}
