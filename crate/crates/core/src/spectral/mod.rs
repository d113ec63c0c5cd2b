//! Spectral clustering of (filtered) node features: linear-kernel
//! similarity, top-`m` eigenvectors, then k-means on the eigenvector rows.

mod eigen;
mod kernel;
mod kmeans;

use serde::{Deserialize, Serialize};

pub use eigen::{top_eigenvectors, EigenSolver, SpectralEmbedding};
pub use kernel::{linear_kernel, SimilarityMatrix, SymmetricOperator};
pub use kmeans::{kmeans, KMeansConfig, KMeansFit};

use crate::error::Result;
use crate::features::FeatureMatrix;
use crate::partition::ClusterPartition;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct SpectralConfig {
    pub kmeans: KMeansConfig,
    pub eigen: EigenSolver,
    /// Scale embedding rows to unit length before k-means (off by default).
    pub normalize_rows: bool,
    /// Multiply each eigenvector by its eigenvalue before k-means (off by default).
    pub scale_by_eigenvalues: bool,
}

/// Spectral clustering of an arbitrary symmetric similarity operator.
pub fn cluster_similarity<W: SymmetricOperator + ?Sized>(
    w: &W,
    m: usize,
    seed: u64,
    cfg: &SpectralConfig,
) -> Result<ClusterPartition> {
    let embedding = top_eigenvectors(w, m, cfg.eigen)?;
    let mut points = if cfg.scale_by_eigenvalues {
        embedding.eigenvalue_scaled()
    } else {
        embedding.vectors().clone()
    };
    if cfg.normalize_rows {
        points = eigen::normalize_rows(&points);
    }
    Ok(kmeans(&points, m, seed, &cfg.kmeans)?.partition)
}

/// `linear_kernel -> top_eigenvectors -> kmeans`.
pub fn spectral_cluster(
    xbar: &FeatureMatrix,
    m: usize,
    seed: u64,
    cfg: &SpectralConfig,
) -> Result<ClusterPartition> {
    let w = linear_kernel(xbar)?;
    cluster_similarity(&w, m, seed, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_constant_features_split_exactly() {
        let blocks = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
        let rows: Vec<[f64; 3]> = (0..15).map(|i| blocks[i / 5]).collect();
        let x = FeatureMatrix::from_rows(&rows).unwrap();
        let p = spectral_cluster(&x, 3, 1, &SpectralConfig::default()).unwrap();
        let l = p.labels();
        for b in 0..3 {
            assert!(l[b * 5..b * 5 + 5].iter().all(|&v| v == l[b * 5]));
        }
        assert_ne!(l[0], l[5]);
        assert_ne!(l[5], l[10]);
        assert_ne!(l[0], l[10]);
    }

    #[test]
    fn flags_change_the_points_but_not_validity() {
        let rows: Vec<Vec<f64>> = (0..12)
            .map(|i| vec![(i % 3) as f64 + 0.1 * i as f64, (i % 2) as f64])
            .collect();
        let x = FeatureMatrix::from_rows(&rows).unwrap();
        for (normalize_rows, scale_by_eigenvalues) in
            [(false, false), (true, false), (false, true), (true, true)]
        {
            let cfg = SpectralConfig {
                normalize_rows,
                scale_by_eigenvalues,
                ..Default::default()
            };
            let p = spectral_cluster(&x, 2, 5, &cfg).unwrap();
            assert_eq!(p.len(), 12);
        }
    }
}
