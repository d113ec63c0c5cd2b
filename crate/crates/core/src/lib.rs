//! Adaptive graph convolution (AGC) for attributed graph clustering.
//!
//! Node features are smoothed with a k-order low-pass graph filter, the
//! smoothed features are grouped by spectral clustering, and the filter
//! order is chosen automatically as the first local minimum of the
//! intra-cluster distance.
//!
//! ```
//! use agc::{gen_sbm, run_agc, AgcConfig, SbmSpec};
//!
//! let inst = gen_sbm(&SbmSpec { n: 90, ..Default::default() }).unwrap();
//! let mut cfg = AgcConfig::new(3);
//! cfg.max_iter = 10;
//! let result = run_agc(&inst.graph, &inst.features, &cfg).unwrap();
//! assert_eq!(result.partition.len(), 90);
//! assert!(result.k >= 1);
//! ```

pub mod cli;
pub mod convolve;
pub mod datagen;
pub mod driver;
pub mod error;
pub mod features;
pub mod graph;
mod hungarian;
pub mod io;
pub mod metrics;
pub mod partition;
pub mod seed;
pub mod spectral;

pub use convolve::{
    convolve_k, frequency_response, smoothness, smoothness_edge_sum, FilterOrder,
    FrequencyResponse, IncrementalFilter,
};
pub use datagen::{gen_sbm, SbmInstance, SbmSpec};
pub use driver::{
    run_agc, sweep_k, AgcConfig, AgcResult, AgcTrace, IterationRecord, StopReason, SweepRow,
};
pub use error::{AgcError, Result};
pub use features::FeatureMatrix;
pub use graph::{load_edge_list, DegreeVector, PropagationOperator, SparseGraph};
pub use metrics::{
    accuracy, intra_distance, macro_f1, nmi, Matching, MetricsReport, NmiNormalization,
};
pub use partition::ClusterPartition;
pub use spectral::{
    kmeans, linear_kernel, spectral_cluster, top_eigenvectors, EigenSolver, KMeansConfig,
    SimilarityMatrix, SpectralConfig, SpectralEmbedding,
};
