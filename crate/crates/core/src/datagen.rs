//! Planted-partition attributed graphs: a stochastic block model for the
//! edges and Gaussian blobs around equidistant block centers for the
//! features.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{AgcError, Result};
use crate::features::FeatureMatrix;
use crate::graph::SparseGraph;
use crate::partition::ClusterPartition;
use crate::seed::rng_from_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SbmSpec {
    pub n: usize,
    /// Number of blocks. Blocks have `n / m` nodes; the last one takes the
    /// remainder.
    pub m: usize,
    pub p_in: f64,
    pub p_out: f64,
    /// Feature dimension, at least `m`.
    pub d: usize,
    /// Distance between any two block centers.
    pub mu_sep: f64,
    /// Standard deviation of the per-coordinate Gaussian feature noise.
    pub sigma: f64,
    pub seed: u64,
}

impl Default for SbmSpec {
    fn default() -> Self {
        SbmSpec {
            n: 300,
            m: 3,
            p_in: 0.1,
            p_out: 0.01,
            d: 8,
            mu_sep: 1.0,
            sigma: 0.6,
            seed: 0,
        }
    }
}

impl SbmSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, p) in [("p_in", self.p_in), ("p_out", self.p_out)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(AgcError::validation(format!(
                    "{name} = {p} is not a probability"
                )));
            }
        }
        if self.m == 0 || self.n < self.m {
            return Err(AgcError::validation(format!(
                "need 1 <= m <= n, got m = {} and n = {}",
                self.m, self.n
            )));
        }
        if self.d < self.m {
            return Err(AgcError::validation(format!(
                "feature dimension {} cannot hold {} equidistant centers",
                self.d, self.m
            )));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(AgcError::validation("sigma must be finite and nonnegative"));
        }
        if !(self.mu_sep.is_finite() && self.mu_sep >= 0.0) {
            return Err(AgcError::validation(
                "mu_sep must be finite and nonnegative",
            ));
        }
        Ok(())
    }

    pub fn block_of(&self, node: usize) -> usize {
        (node / (self.n / self.m)).min(self.m - 1)
    }

    /// Block center `b`: the scaled unit vector `e_b * mu_sep / sqrt(2)`, so
    /// every pair of centers is exactly `mu_sep` apart.
    pub fn center(&self, block: usize) -> Vec<f64> {
        let mut c = vec![0.0; self.d];
        c[block] = self.mu_sep / std::f64::consts::SQRT_2;
        c
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SbmInstance {
    pub graph: SparseGraph,
    pub features: FeatureMatrix,
    pub labels: ClusterPartition,
}

/// Samples an instance from a single `ChaCha8Rng` stream: one uniform draw
/// per node pair `(i, j), i < j` in row-major order, then `n * d` standard
/// normal draws for the features.
pub fn gen_sbm(spec: &SbmSpec) -> Result<SbmInstance> {
    spec.validate()?;
    let mut rng = rng_from_seed(spec.seed);
    let blocks: Vec<usize> = (0..spec.n).map(|i| spec.block_of(i)).collect();

    let mut edges = Vec::new();
    for i in 0..spec.n {
        for j in i + 1..spec.n {
            let p = if blocks[i] == blocks[j] {
                spec.p_in
            } else {
                spec.p_out
            };
            let u: f64 = rng.random();
            if u < p {
                edges.push((i, j, 1.0));
            }
        }
    }
    let graph = SparseGraph::from_edges(spec.n, &edges)?;

    let centers: Vec<Vec<f64>> = (0..spec.m).map(|b| spec.center(b)).collect();
    let mut data = Vec::with_capacity(spec.n * spec.d);
    for &b in &blocks {
        for c in &centers[b] {
            let z: f64 = rng.sample(StandardNormal);
            data.push(c + spec.sigma * z);
        }
    }
    let features = FeatureMatrix::new(spec.n, spec.d, data)?;
    let labels = ClusterPartition::new(blocks, spec.m)?;
    Ok(SbmInstance {
        graph,
        features,
        labels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_limit_gives_disjoint_cliques() {
        let spec = SbmSpec {
            n: 10,
            m: 2,
            p_in: 1.0,
            p_out: 0.0,
            d: 2,
            ..Default::default()
        };
        let inst = gen_sbm(&spec).unwrap();
        assert_eq!(inst.graph.num_edges(), 2 * 10);
        for (u, v, _) in inst.graph.edges() {
            assert_eq!(spec.block_of(u), spec.block_of(v));
        }
        assert!(inst
            .graph
            .degree_vector()
            .as_slice()
            .iter()
            .all(|&d| d == 4.0));
    }

    #[test]
    fn remainder_goes_to_last_block() {
        let spec = SbmSpec {
            n: 11,
            m: 3,
            ..Default::default()
        };
        let inst = gen_sbm(&spec).unwrap();
        assert_eq!(inst.labels.sizes(), vec![3, 3, 5]);
    }

    #[test]
    fn centers_are_equidistant() {
        let spec = SbmSpec {
            mu_sep: 2.5,
            ..Default::default()
        };
        for a in 0..spec.m {
            for b in a + 1..spec.m {
                let d: f64 = spec
                    .center(a)
                    .iter()
                    .zip(spec.center(b))
                    .map(|(x, y)| (x - y) * (x - y))
                    .sum::<f64>()
                    .sqrt();
                assert!((d - 2.5).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn same_seed_same_instance() {
        let spec = SbmSpec {
            n: 60,
            seed: 42,
            ..Default::default()
        };
        let a = gen_sbm(&spec).unwrap();
        let b = gen_sbm(&spec).unwrap();
        assert_eq!(a, b);
        let c = gen_sbm(&SbmSpec { seed: 43, ..spec }).unwrap();
        assert_ne!(a.graph, c.graph);
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(gen_sbm(&SbmSpec {
            p_in: 1.5,
            ..Default::default()
        })
        .is_err());
        assert!(gen_sbm(&SbmSpec {
            p_out: -0.1,
            ..Default::default()
        })
        .is_err());
        assert!(gen_sbm(&SbmSpec {
            d: 2,
            ..Default::default()
        })
        .is_err());
        assert!(gen_sbm(&SbmSpec {
            n: 2,
            ..Default::default()
        })
        .is_err());
    }
}
