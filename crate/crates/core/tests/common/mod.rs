//! Independent reference implementations used as test oracles. Everything
//! here is written the slow, obvious way and shares no code with the crate
//! beyond its data types.
#![allow(dead_code)]

use std::collections::HashMap;

use agc::{ClusterPartition, FeatureMatrix, Matching, SparseGraph};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Erdos-Renyi graph with random positive weights and the occasional
/// self-loop. Isolated nodes are common for small `p`.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> SparseGraph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i..n {
            let prob = if i == j { p / 4.0 } else { p };
            if rng.random::<f64>() < prob {
                edges.push((i, j, rng.random_range(0.1..2.0)));
            }
        }
    }
    SparseGraph::from_edges(n, &edges).unwrap()
}

/// Random graph that contains a spanning path, so it is connected.
pub fn connected_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> SparseGraph {
    let mut edges: Vec<_> = (1..n).map(|i| (i - 1, i, 1.0)).collect();
    for i in 0..n {
        for j in i + 2..n {
            if rng.random::<f64>() < p {
                edges.push((i, j, 1.0));
            }
        }
    }
    SparseGraph::from_edges(n, &edges).unwrap()
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize, d: usize) -> FeatureMatrix {
    let data = (0..n * d).map(|_| rng.random_range(-1.0..1.0)).collect();
    FeatureMatrix::new(n, d, data).unwrap()
}

pub fn dense_adjacency(g: &SparseGraph) -> DMatrix<f64> {
    let n = g.n();
    let mut a = DMatrix::zeros(n, n);
    for (u, v, w) in g.edges() {
        a[(u, v)] = w;
        a[(v, u)] = w;
    }
    a
}

/// `D^-1/2 A D^-1/2` with zero rows and columns for isolated nodes.
pub fn dense_propagation(g: &SparseGraph) -> DMatrix<f64> {
    let a = dense_adjacency(g);
    let n = g.n();
    let deg: Vec<f64> = (0..n).map(|i| a.row(i).sum()).collect();
    DMatrix::from_fn(n, n, |i, j| {
        if deg[i] > 0.0 && deg[j] > 0.0 {
            a[(i, j)] / (deg[i] * deg[j]).sqrt()
        } else {
            0.0
        }
    })
}

pub fn dense_laplacian(g: &SparseGraph) -> DMatrix<f64> {
    DMatrix::identity(g.n(), g.n()) - dense_propagation(g)
}

pub fn to_dense(x: &FeatureMatrix) -> DMatrix<f64> {
    DMatrix::from_row_slice(x.nrows(), x.ncols(), x.as_slice())
}

/// `U diag((1 - lambda/2)^k) U^T X` from a full eigendecomposition.
pub fn spectral_filter(g: &SparseGraph, x: &FeatureMatrix, k: usize) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(dense_laplacian(g));
    let gains = eig.eigenvalues.map(|l| (1.0 - l / 2.0).powi(k as i32));
    let u = &eig.eigenvectors;
    u * DMatrix::from_diagonal(&gains) * u.transpose() * to_dense(x)
}

pub fn rel_frobenius(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let scale = b.norm().max(f64::MIN_POSITIVE);
    (a - b).norm() / scale
}

/// Labels in `0..m`, possibly leaving some ids unused.
pub fn random_labels(rng: &mut ChaCha8Rng, n: usize, m: usize) -> ClusterPartition {
    let labels = (0..n).map(|_| rng.random_range(0..m)).collect();
    ClusterPartition::new(labels, m).unwrap()
}

fn permutations(items: Vec<usize>) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.clone();
        let head = rest.remove(i);
        for mut tail in permutations(rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

/// Best accuracy over every injective relabeling of predicted ids.
pub fn brute_accuracy(pred: &ClusterPartition, truth: &ClusterPartition) -> f64 {
    let size = pred.num_clusters().max(truth.num_clusters());
    let mut best = 0usize;
    for perm in permutations((0..size).collect()) {
        let hits = pred
            .labels()
            .iter()
            .zip(truth.labels())
            .filter(|&(&p, &t)| perm[p] == t)
            .count();
        best = best.max(hits);
    }
    best as f64 / pred.len() as f64
}

fn entropy_of(labels: &[usize]) -> f64 {
    let n = labels.len() as f64;
    let mut counts: HashMap<usize, usize> = HashMap::new();
    for &l in labels {
        *counts.entry(l).or_default() += 1;
    }
    counts
        .values()
        .map(|&c| c as f64 / n)
        .map(|p| -p * p.ln())
        .sum()
}

/// Geometric-mean NMI from a hash-map joint count.
pub fn oracle_nmi(pred: &ClusterPartition, truth: &ClusterPartition) -> f64 {
    let (a, b) = (pred.labels(), truth.labels());
    let n = a.len() as f64;
    let (ha, hb) = (entropy_of(a), entropy_of(b));
    if ha == 0.0 && hb == 0.0 {
        return 1.0;
    }
    if ha == 0.0 || hb == 0.0 {
        return 0.0;
    }
    let mut joint: HashMap<(usize, usize), f64> = HashMap::new();
    let mut ca: HashMap<usize, f64> = HashMap::new();
    let mut cb: HashMap<usize, f64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1.0;
        *ca.entry(x).or_default() += 1.0;
        *cb.entry(y).or_default() += 1.0;
    }
    let mi: f64 = joint
        .iter()
        .map(|(&(x, y), &c)| (c / n) * ((c / n) / ((ca[&x] / n) * (cb[&y] / n))).ln())
        .sum();
    mi / (ha * hb).sqrt()
}

/// Per-class F1 under the given matching, counted node by node.
pub fn oracle_f1(pred: &ClusterPartition, truth: &ClusterPartition, matching: &Matching) -> f64 {
    let (a, b) = (pred.labels(), truth.labels());
    let mut total = 0.0;
    let mut classes = 0;
    for t in 0..truth.num_clusters() {
        let support = b.iter().filter(|&&y| y == t).count();
        if support == 0 {
            continue;
        }
        classes += 1;
        let Some(p) = matching.pred_to_truth.iter().position(|&x| x == t) else {
            continue;
        };
        let predicted = a.iter().filter(|&&x| x == p).count();
        let tp = a.iter().zip(b).filter(|&(&x, &y)| x == p && y == t).count();
        if tp > 0 {
            let precision = tp as f64 / predicted as f64;
            let recall = tp as f64 / support as f64;
            total += 2.0 * precision * recall / (precision + recall);
        }
    }
    total / classes as f64
}

/// Double loop over ordered pairs `i != j` in each non-singleton cluster.
pub fn oracle_intra(x: &FeatureMatrix, part: &ClusterPartition) -> Option<f64> {
    let mut sum = 0.0;
    let mut clusters = 0;
    for c in 0..part.num_clusters() {
        let members: Vec<usize> = (0..part.len()).filter(|&i| part.labels()[i] == c).collect();
        if members.len() < 2 {
            continue;
        }
        let mut s = 0.0;
        for &i in &members {
            for &j in &members {
                if i != j {
                    let d2: f64 = x
                        .row(i)
                        .iter()
                        .zip(x.row(j))
                        .map(|(a, b)| (a - b).powi(2))
                        .sum();
                    s += d2.sqrt();
                }
            }
        }
        let size = members.len() as f64;
        sum += s / (size * (size - 1.0));
        clusters += 1;
    }
    (clusters > 0).then(|| sum / clusters as f64)
}

/// Gaussian blobs of `per` points around the given centers.
pub fn blobs(
    rng: &mut ChaCha8Rng,
    centers: &[Vec<f64>],
    per: usize,
    sigma: f64,
) -> (FeatureMatrix, ClusterPartition) {
    use rand_distr::{Distribution, StandardNormal};
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (c, center) in centers.iter().enumerate() {
        for _ in 0..per {
            rows.push(
                center
                    .iter()
                    .map(|&v| {
                        let z: f64 = StandardNormal.sample(rng);
                        v + sigma * z
                    })
                    .collect::<Vec<_>>(),
            );
            labels.push(c);
        }
    }
    (
        FeatureMatrix::from_rows(&rows).unwrap(),
        ClusterPartition::new(labels, centers.len()).unwrap(),
    )
}
