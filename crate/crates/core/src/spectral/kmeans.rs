//! Seeded Lloyd k-means with k-means++ initialization and restarts.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{AgcError, Result};
use crate::features::FeatureMatrix;
use crate::partition::ClusterPartition;
use crate::seed::{derive_seed, rng_from_seed};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub restarts: usize,
    pub max_iter: usize,
    /// Stop once the relative inertia decrease falls to or below this.
    pub tol: f64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        KMeansConfig {
            restarts: 10,
            max_iter: 300,
            tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct KMeansFit {
    pub partition: ClusterPartition,
    /// Centroids the final assignment was made against.
    pub centroids: FeatureMatrix,
    /// Within-cluster sum of squared distances of the final assignment.
    pub inertia: f64,
    /// Inertia after every assignment step of the winning restart.
    pub inertia_history: Vec<f64>,
    /// Index of the winning restart.
    pub restart: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Clusters the rows of `points` into `m` groups.
///
/// Runs `cfg.restarts` independently seeded restarts (seed `r` derived from
/// `seed`) and keeps the lowest inertia, earliest restart first on ties, so
/// the result depends only on the inputs and not on scheduling.
pub fn kmeans(
    points: &FeatureMatrix,
    m: usize,
    seed: u64,
    cfg: &KMeansConfig,
) -> Result<KMeansFit> {
    if m < 1 {
        return Err(AgcError::validation("k-means needs at least one cluster"));
    }
    if m > points.nrows() {
        return Err(AgcError::validation(format!(
            "cannot form {m} clusters from {} points",
            points.nrows()
        )));
    }
    if cfg.restarts < 1 || cfg.max_iter < 1 {
        return Err(AgcError::validation(
            "k-means restarts and max_iter must be positive",
        ));
    }
    let runs: Vec<KMeansFit> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_from_seed(derive_seed(seed, r as u64));
            let mut fit = lloyd(points, m, &mut rng, cfg);
            fit.restart = r;
            fit
        })
        .collect();
    let mut best: Option<KMeansFit> = None;
    for run in runs {
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.unwrap())
}

fn plus_plus_init(points: &FeatureMatrix, m: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.nrows();
    let first = rng.random_range(0..n);
    let mut centers = vec![points.row(first).to_vec()];
    let mut nearest: Vec<f64> = points.rows().map(|p| sq_dist(p, &centers[0])).collect();
    while centers.len() < m {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = None;
            for (i, &d) in nearest.iter().enumerate() {
                acc += d;
                if d > 0.0 && acc > target {
                    chosen = Some(i);
                    break;
                }
            }
            chosen.unwrap_or_else(|| nearest.iter().rposition(|&d| d > 0.0).unwrap())
        } else {
            rng.random_range(0..n)
        };
        let c = points.row(pick).to_vec();
        for (d, p) in nearest.iter_mut().zip(points.rows()) {
            *d = d.min(sq_dist(p, &c));
        }
        centers.push(c);
    }
    centers
}

/// Nearest-centroid labels (lowest index on ties), their squared
/// distances, and the total.
fn assign(points: &FeatureMatrix, centers: &[Vec<f64>]) -> (Vec<usize>, Vec<f64>, f64) {
    let mut labels = Vec::with_capacity(points.nrows());
    let mut dists = Vec::with_capacity(points.nrows());
    for p in points.rows() {
        let mut best = (0, f64::INFINITY);
        for (c, center) in centers.iter().enumerate() {
            let d = sq_dist(p, center);
            if d < best.1 {
                best = (c, d);
            }
        }
        labels.push(best.0);
        dists.push(best.1);
    }
    let inertia = dists.iter().sum();
    (labels, dists, inertia)
}

fn update(points: &FeatureMatrix, labels: &[usize], m: usize) -> (Vec<Vec<f64>>, Vec<usize>) {
    let d = points.ncols();
    let mut sums = vec![vec![0.0; d]; m];
    let mut counts = vec![0usize; m];
    for (p, &l) in points.rows().zip(labels) {
        counts[l] += 1;
        for (s, v) in sums[l].iter_mut().zip(p) {
            *s += v;
        }
    }
    for (s, &c) in sums.iter_mut().zip(&counts) {
        if c > 0 {
            s.iter_mut().for_each(|v| *v /= c as f64);
        }
    }
    (sums, counts)
}

fn lloyd(points: &FeatureMatrix, m: usize, rng: &mut ChaCha8Rng, cfg: &KMeansConfig) -> KMeansFit {
    let mut centers = plus_plus_init(points, m, rng);
    let mut history = Vec::new();
    let (mut labels, _, mut inertia) = assign(points, &centers);
    history.push(inertia);

    for _ in 1..cfg.max_iter {
        let (mut next, counts) = update(points, &labels, m);
        if counts.contains(&0) {
            // Empty clusters move to the points worst served by their own
            // centroid; a point is used at most once.
            let mut own: Vec<(usize, f64)> = points
                .rows()
                .zip(&labels)
                .map(|(p, &l)| sq_dist(p, &next[l]))
                .enumerate()
                .collect();
            for c in (0..m).filter(|&c| counts[c] == 0) {
                let far = own.iter().filter(|&&(_, d)| d > 0.0).fold(
                    None::<(usize, f64)>,
                    |acc, &(i, d)| match acc {
                        Some((_, bd)) if bd >= d => acc,
                        _ => Some((i, d)),
                    },
                );
                if let Some((i, _)) = far {
                    next[c] = points.row(i).to_vec();
                    own[i].1 = 0.0;
                } else {
                    next[c] = centers[c].clone();
                }
            }
        }
        let (new_labels, _, new_inertia) = assign(points, &next);
        history.push(new_inertia);
        let unchanged = new_labels == labels;
        let improvement = inertia - new_inertia;
        centers = next;
        labels = new_labels;
        let prev = inertia;
        inertia = new_inertia;
        if unchanged || improvement <= cfg.tol * prev {
            break;
        }
    }

    let d = points.ncols();
    let flat: Vec<f64> = centers.iter().flatten().copied().collect();
    KMeansFit {
        partition: ClusterPartition::new(labels, m).expect("labels below m"),
        centroids: FeatureMatrix::new(m, d, flat).expect("finite centroids"),
        inertia,
        inertia_history: history,
        restart: 0,
    }
}
