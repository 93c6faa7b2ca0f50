use ndarray::{Array2, ArrayView1, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const RESTARTS: usize = 10;
const MAX_ITERS: usize = 300;
const ATTEMPTS: u64 = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeans {
    pub assignments: Vec<usize>,
    pub centroids: Array2<f64>,
    pub inertia: f64,
}

fn sq_dist(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).powi(2)).sum()
}

fn seed_centroids(points: &Array2<f64>, k: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let m = points.nrows();
    let mut centroids = Array2::zeros((k, points.ncols()));
    centroids.row_mut(0).assign(&points.row(rng.random_range(0..m)));
    let mut d2: Vec<f64> = points
        .rows()
        .into_iter()
        .map(|p| sq_dist(p, centroids.row(0)))
        .collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut r = rng.random::<f64>() * total;
            let mut idx = m - 1;
            for (i, &d) in d2.iter().enumerate() {
                if r < d {
                    idx = i;
                    break;
                }
                r -= d;
            }
            idx
        } else {
            rng.random_range(0..m)
        };
        centroids.row_mut(c).assign(&points.row(pick));
        for (i, p) in points.rows().into_iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(p, centroids.row(c)));
        }
    }
    centroids
}

/// Lloyd iterations from k-means++ seeding; `None` if a cluster ends empty.
fn lloyd(points: &Array2<f64>, k: usize, rng: &mut ChaCha8Rng) -> Option<KMeans> {
    let mut centroids = seed_centroids(points, k, rng);
    let mut assignments = vec![usize::MAX; points.nrows()];
    for _ in 0..MAX_ITERS {
        let mut changed = false;
        for (i, p) in points.rows().into_iter().enumerate() {
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for c in 0..k {
                let d = sq_dist(p, centroids.row(c));
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            if assignments[i] != best {
                assignments[i] = best;
                changed = true;
            }
        }
        let mut sums = Array2::<f64>::zeros(centroids.raw_dim());
        let mut counts = vec![0usize; k];
        for (i, p) in points.rows().into_iter().enumerate() {
            let mut row = sums.row_mut(assignments[i]);
            row += &p;
            counts[assignments[i]] += 1;
        }
        if counts.contains(&0) {
            return None;
        }
        for (c, mut row) in sums.axis_iter_mut(Axis(0)).enumerate() {
            row /= counts[c] as f64;
        }
        centroids = sums;
        if !changed {
            break;
        }
    }
    let inertia = points
        .rows()
        .into_iter()
        .zip(&assignments)
        .map(|(p, &a)| sq_dist(p, centroids.row(a)))
        .sum();
    Some(KMeans {
        assignments,
        centroids,
        inertia,
    })
}

/// Best of [`RESTARTS`] seeded k-means++ runs by inertia. A run that ends
/// with an empty cluster is retried from a new seed derivation.
pub fn kmeans(points: &Array2<f64>, k: usize, seed: u64) -> Result<KMeans> {
    if k == 0 || points.nrows() < k {
        return Err(Error::Clustering(format!(
            "need at least k = {k} > 0 points, got {}",
            points.nrows()
        )));
    }
    let mut best: Option<KMeans> = None;
    for restart in 0..RESTARTS as u64 {
        let mut found = None;
        for attempt in 0..ATTEMPTS {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(restart * ATTEMPTS + attempt);
            if let Some(run) = lloyd(points, k, &mut rng) {
                found = Some(run);
                break;
            }
        }
        let run = found.ok_or_else(|| Error::Clustering(format!("empty cluster after {ATTEMPTS} attempts")))?;
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Purity of a clustering. Unweighted: mean over clusters of the largest
/// class share. Weighted: fraction of points in their cluster's majority
/// class.
pub fn purity_of(assignments: &[usize], labels: &[usize], weighted: bool) -> f64 {
    let k = assignments.iter().max().map_or(0, |m| m + 1);
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut counts = vec![vec![0usize; classes]; k];
    for (&a, &l) in assignments.iter().zip(labels) {
        counts[a][l] += 1;
    }
    let nonempty: Vec<&Vec<usize>> = counts.iter().filter(|c| c.iter().sum::<usize>() > 0).collect();
    if weighted {
        nonempty.iter().map(|c| *c.iter().max().unwrap()).sum::<usize>() as f64 / labels.len() as f64
    } else {
        nonempty
            .iter()
            .map(|c| *c.iter().max().unwrap() as f64 / c.iter().sum::<usize>() as f64)
            .sum::<f64>()
            / nonempty.len() as f64
    }
}

/// k-means on the embeddings, then [`purity_of`] against `labels`.
pub fn clustering_purity(
    embeddings: &Array2<f64>,
    labels: &[usize],
    k: usize,
    seed: u64,
    weighted: bool,
) -> Result<f64> {
    if labels.len() != embeddings.nrows() {
        return Err(Error::invalid(format!(
            "{} labels for {} embeddings",
            labels.len(),
            embeddings.nrows()
        )));
    }
    let km = kmeans(embeddings, k, seed)?;
    Ok(purity_of(&km.assignments, labels, weighted))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs() -> (Array2<f64>, Vec<usize>) {
        let centers = [(0.0, 0.0), (10.0, 0.0), (0.0, 10.0), (10.0, 10.0)];
        let mut pts = Vec::new();
        let mut labels = Vec::new();
        for (c, &(x, y)) in centers.iter().enumerate() {
            for j in 0..5 {
                let o = j as f64 * 0.1;
                pts.extend([x + o, y - o]);
                labels.push(c);
            }
        }
        (Array2::from_shape_vec((20, 2), pts).unwrap(), labels)
    }

    #[test]
    fn separated_blobs_are_pure() {
        let (x, labels) = blobs();
        assert_eq!(clustering_purity(&x, &labels, 4, 3, false).unwrap(), 1.0);
    }

    #[test]
    fn single_cluster_is_majority_share() {
        let (x, mut labels) = blobs();
        labels[0] = 1;
        let p = clustering_purity(&x, &labels, 1, 0, false).unwrap();
        assert!((p - 6.0 / 20.0).abs() < 1e-12);
    }

    #[test]
    fn relabeling_clusters_keeps_purity() {
        let labels = [0, 0, 1, 1, 2, 0];
        let a = [0, 0, 1, 1, 2, 2];
        let b = [2, 2, 0, 0, 1, 1];
        assert_eq!(purity_of(&a, &labels, false), purity_of(&b, &labels, false));
        assert!((purity_of(&a, &labels, true) - 5.0 / 6.0).abs() < 1e-12);
        assert!((purity_of(&a, &labels, false) - (1.0 + 1.0 + 0.5) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn too_few_points_errors() {
        assert!(kmeans(&Array2::zeros((3, 2)), 4, 0).is_err());
    }

    #[test]
    fn seeded_runs_agree() {
        let (x, _) = blobs();
        assert_eq!(kmeans(&x, 3, 9).unwrap(), kmeans(&x, 3, 9).unwrap());
    }
}
