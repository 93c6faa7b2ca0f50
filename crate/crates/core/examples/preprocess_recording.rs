//! Resample a recording, cut it into labeled 60 s windows and compute the
//! per-second log-amplitude spectra.

use std::f64::consts::PI;

use ndarray::Array2;
use neurognn::signal::{
    clip_to_features, resample, window_and_label, Annotation, Label, Recording, WindowMode, SAMPLE_RATE_HZ,
};

fn main() -> neurognn::Result<()> {
    // two channels, 150 s at 250 Hz: a 6 Hz rhythm on channel 0 from 70 s to 100 s
    let src_hz = 250.0;
    let n = (150.0 * src_hz) as usize;
    let raw: Vec<Vec<f64>> = (0..2)
        .map(|c| {
            (0..n)
                .map(|i| {
                    let t = i as f64 / src_hz;
                    let burst = if c == 0 && (70.0..100.0).contains(&t) {
                        20.0 * (2.0 * PI * 6.0 * t).sin()
                    } else {
                        0.0
                    };
                    5.0 * (2.0 * PI * 1.5 * t).sin() + burst
                })
                .collect()
        })
        .collect();
    let resampled: Vec<Vec<f64>> = raw
        .iter()
        .map(|ch| resample(ch, src_hz, SAMPLE_RATE_HZ))
        .collect::<Result<_, _>>()?;
    let len = resampled[0].len();
    let channels = Array2::from_shape_fn((2, len), |(c, i)| resampled[c][i] as f32);
    let recording = Recording {
        recording_id: "demo".into(),
        patient_id: "P0".into(),
        channels,
        sample_rate_hz: SAMPLE_RATE_HZ,
    };
    let clips = window_and_label(
        &recording,
        &[Annotation::new(70.0, 100.0, Label::CF)],
        WindowMode::Detection,
    )?;
    for clip in &clips {
        let features = clip_to_features(clip)?;
        // strongest non-DC bin of channel 0 at second 20 of the window
        let frame = features.features.slice(ndarray::s![0, 20, 1..]);
        let peak = frame
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(k, _)| k + 1)
            .unwrap();
        println!(
            "{} {:<12} features {:?} peak bin {peak} Hz",
            clip.clip_id,
            clip.label.name(),
            features.features.dim()
        );
    }
    Ok(())
}
