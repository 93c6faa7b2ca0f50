use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array1, Array2, Axis};

use crate::error::{Error, Result};
use crate::signal::Label;

const MAX_ITERS: usize = 20_000;
const TOL: f64 = 1e-15;

/// 2D principal-component view of a set of embeddings.
#[derive(Debug, Clone)]
pub struct Projection {
    /// M x 2 scores.
    pub coords: Array2<f64>,
    /// 2 x Z principal directions (unit rows; zero when rank deficient).
    pub components: Array2<f64>,
    /// Variance captured by each axis.
    pub variances: [f64; 2],
}

fn power_iteration(cov: &Array2<f64>) -> (Array1<f64>, f64) {
    let z = cov.nrows();
    // deterministic, generic start vector
    let mut v = Array1::from_shape_fn(z, |j| 1.0 + 0.1 * (j as f64 + 1.0).sin());
    v /= v.dot(&v).sqrt();
    let mut lambda = 0.0;
    for _ in 0..MAX_ITERS {
        let w = cov.dot(&v);
        let norm = w.dot(&w).sqrt();
        if norm == 0.0 {
            return (v, 0.0);
        }
        let next = w / norm;
        let delta = (&next - &v).mapv(f64::abs).sum();
        v = next;
        lambda = norm;
        if delta < TOL * z as f64 {
            break;
        }
    }
    // canonical sign: largest-magnitude entry positive
    let lead = v
        .iter()
        .copied()
        .fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
    if lead < 0.0 {
        v.mapv_inplace(|x| -x);
    }
    (v, lambda)
}

/// Mean-centres the rows and projects them onto the two leading principal
/// directions found by power iteration with deflation.
pub fn project_2d(embeddings: &Array2<f64>) -> Result<Projection> {
    let (m, z) = embeddings.dim();
    if m < 2 {
        return Err(Error::invalid(format!("projection needs at least 2 points, got {m}")));
    }
    let mean = embeddings.mean_axis(Axis(0)).expect("non-empty");
    let x = embeddings - &mean;
    let mut cov = x.t().dot(&x) / m as f64;
    let scale = cov.diag().iter().copied().fold(0.0, f64::max);
    let mut components = Array2::zeros((2, z));
    let mut variances = [0.0; 2];
    for axis in 0..2 {
        let (v, lambda) = power_iteration(&cov);
        if lambda <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
            log::warn!(
                "embeddings have fewer than 2 non-zero singular values; axis {} padded with zeros",
                axis + 1
            );
            break;
        }
        components.row_mut(axis).assign(&v);
        variances[axis] = lambda;
        let outer = v.view().insert_axis(Axis(1)).dot(&v.view().insert_axis(Axis(0)));
        cov.scaled_add(-lambda, &outer);
    }
    Ok(Projection {
        coords: x.dot(&components.t()),
        components,
        variances,
    })
}

fn colour(label: Label) -> &'static str {
    match label {
        Label::NonSeizure => "#7f7f7f",
        Label::CF => "#1f77b4",
        Label::GN => "#ff7f0e",
        Label::AB => "#2ca02c",
        Label::CT => "#d62728",
    }
}

/// Scatter plot of `coords` coloured by ground-truth label.
pub fn scatter_svg(coords: &Array2<f64>, labels: &[Label], title: &str) -> String {
    let (w, h, pad) = (640.0, 480.0, 40.0);
    let range = |col: usize| {
        let c = coords.column(col);
        let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, if hi > lo { hi - lo } else { 1.0 })
    };
    let ((x0, xs), (y0, ys)) = (range(0), range(1));
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
        w / 2.0,
        escape(title)
    );
    for (row, &label) in coords.rows().into_iter().zip(labels) {
        let px = pad + (row[0] - x0) / xs * (w - 2.0 * pad);
        let py = h - pad - (row[1] - y0) / ys * (h - 2.0 * pad);
        let _ = writeln!(
            svg,
            r#"<circle cx="{px:.2}" cy="{py:.2}" r="4" fill="{}" fill-opacity="0.8"/>"#,
            colour(label)
        );
    }
    let mut seen: Vec<Label> = labels.to_vec();
    seen.sort();
    seen.dedup();
    for (i, label) in seen.iter().enumerate() {
        let y = 44.0 + i as f64 * 18.0;
        let _ = writeln!(
            svg,
            r#"<circle cx="{}" cy="{y}" r="5" fill="{}"/>"#,
            w - 110.0,
            colour(*label)
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="12">{}</text>"#,
            w - 98.0,
            y + 4.0,
            label.name()
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn write_scatter_svg(path: &Path, coords: &Array2<f64>, labels: &[Label], title: &str) -> Result<()> {
    std::fs::write(path, scatter_svg(coords, labels, title)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_aligned_data_is_recovered() {
        let pts = [
            3.0, 0.0, -3.0, 0.0, 0.0, 1.0, 0.0, -1.0, 6.0, 0.0, -6.0, 0.0, 0.0, 0.5, 0.0, -0.5, 1.0, 0.0, -1.0, 0.0,
        ];
        let x = Array2::from_shape_vec((10, 2), pts.to_vec()).unwrap();
        let p = project_2d(&x).unwrap();
        let centred = &x - &x.mean_axis(Axis(0)).unwrap();
        for axis in 0..2 {
            let same = (0..10).all(|i| (p.coords[[i, axis]] - centred[[i, axis]]).abs() < 1e-9);
            let flipped = (0..10).all(|i| (p.coords[[i, axis]] + centred[[i, axis]]).abs() < 1e-9);
            assert!(same || flipped);
        }
        assert!(p.variances[0] >= p.variances[1]);
    }

    #[test]
    fn rank_one_pads_second_axis() {
        let x = Array2::from_shape_fn((5, 3), |(i, j)| i as f64 * (j + 1) as f64);
        let p = project_2d(&x).unwrap();
        assert!(p.coords.column(1).iter().all(|&v| v == 0.0));
        assert!(project_2d(&Array2::zeros((1, 3))).is_err());
    }

    #[test]
    fn svg_has_one_marker_per_point() {
        let coords = Array2::from_shape_fn((3, 2), |(i, j)| (i + j) as f64);
        let svg = scatter_svg(&coords, &[Label::CF, Label::GN, Label::CF], "t");
        assert_eq!(svg.matches(r#"r="4""#).count(), 3);
    }
}
