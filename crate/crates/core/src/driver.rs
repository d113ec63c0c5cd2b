//! Adaptive filter-order selection.
//!
//! Starting from order 1, each iteration applies one more low-pass step to
//! the features, clusters them, and measures the intra-cluster distance.
//! The loop stops at the first order whose distance is larger than the
//! previous one and returns the previous partition.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::convolve::IncrementalFilter;
use crate::error::{AgcError, Result};
use crate::features::FeatureMatrix;
use crate::graph::{PropagationOperator, SparseGraph};
use crate::metrics::{self, MetricsReport, NmiNormalization};
use crate::partition::ClusterPartition;
use crate::seed::derive_seed;
use crate::spectral::{spectral_cluster, SpectralConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgcConfig {
    /// Number of clusters.
    pub m: usize,
    pub max_iter: usize,
    pub seed: u64,
    pub spectral: SpectralConfig,
    pub nmi: NmiNormalization,
    /// Keep the filtered features of the selected order in the result.
    pub keep_features: bool,
}

impl AgcConfig {
    pub fn new(m: usize) -> Self {
        AgcConfig {
            m,
            max_iter: 60,
            seed: 0,
            spectral: SpectralConfig::default(),
            nmi: NmiNormalization::default(),
            keep_features: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(AgcError::validation("cluster count must be at least 2"));
        }
        if self.max_iter < 1 {
            return Err(AgcError::validation("max_iter must be at least 1"));
        }
        Ok(())
    }
}

/// k-means seed used at filter order `t`; independent of `max_iter`.
pub fn iteration_seed(master: u64, t: usize) -> u64 {
    derive_seed(master, t as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub t: usize,
    /// Filter order used at this iteration (always equal to `t`).
    pub k: usize,
    pub intra: f64,
    /// `intra_t - intra_{t-1}`; absent at `t = 1` where the previous value is
    /// the `+inf` sentinel.
    pub d_intra: Option<f64>,
    pub partition_digest: String,
    pub kmeans_seed: u64,
    /// Singleton clusters left out of the intra-cluster average.
    pub excluded_singletons: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    LocalMinimum,
    MaxIter,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AgcTrace {
    pub records: Vec<IterationRecord>,
    pub selected_k: Option<usize>,
    pub stop_reason: Option<StopReason>,
}

impl AgcTrace {
    /// One JSON object per iteration, followed by a summary line carrying
    /// `selected_k` and `stop_reason`.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut out, r)?;
            out.write_all(b"\n")?;
        }
        let summary = serde_json::json!({
            "selected_k": self.selected_k,
            "stop_reason": self.stop_reason,
        });
        serde_json::to_writer(&mut out, &summary)?;
        out.write_all(b"\n")?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgcResult {
    pub partition: ClusterPartition,
    pub k: usize,
    pub intra: f64,
    pub trace: AgcTrace,
    /// Filtered features at order `k`, when requested.
    pub features: Option<FeatureMatrix>,
}

impl AgcResult {
    pub fn stop_reason(&self) -> StopReason {
        self.trace
            .stop_reason
            .expect("completed runs record a stop reason")
    }
}

fn check_inputs(g: &SparseGraph, x: &FeatureMatrix) -> Result<()> {
    if x.nrows() != g.n() {
        return Err(AgcError::validation(format!(
            "feature matrix has {} rows but the graph has {} nodes",
            x.nrows(),
            g.n()
        )));
    }
    if x.as_slice().iter().all(|&v| v == 0.0) {
        return Err(AgcError::validation("feature matrix is entirely zero"));
    }
    Ok(())
}

/// Runs adaptive graph convolution clustering.
///
/// Order `t` features are obtained from order `t - 1` by one more
/// propagation step. The partition returned on a local-minimum stop is the
/// cached partition of order `t - 1`. If `max_iter` orders pass without an
/// increase the partition of order `max_iter` is returned.
///
/// Per-iteration cost is `O(n^2 d + N d)`: kernel, eigensolve and
/// intra-cluster distance are quadratic in `n`, propagation is linear in the
/// number of stored edges `N`.
pub fn run_agc(g: &SparseGraph, x: &FeatureMatrix, cfg: &AgcConfig) -> Result<AgcResult> {
    cfg.validate()?;
    check_inputs(g, x)?;
    let op = PropagationOperator::new(g);
    let mut filter = IncrementalFilter::new(&op, x.clone())?;
    let mut trace = AgcTrace::default();

    let mut prev_intra = f64::INFINITY;
    let mut prev: Option<(ClusterPartition, Option<FeatureMatrix>)> = None;

    for t in 1..=cfg.max_iter {
        let xbar = filter.advance();
        let seed = iteration_seed(cfg.seed, t);
        let partition = spectral_cluster(xbar, cfg.m, seed, &cfg.spectral)?;
        let intra = match metrics::intra_distance_detail(xbar, &partition) {
            Ok(d) => d,
            Err(AgcError::Domain(reason)) => {
                return Err(AgcError::Aborted {
                    t,
                    reason,
                    trace: Box::new(trace),
                })
            }
            Err(e) => return Err(e),
        };
        let d_intra = (t > 1).then_some(intra.value - prev_intra);
        trace.records.push(IterationRecord {
            t,
            k: t,
            intra: intra.value,
            d_intra,
            partition_digest: partition.digest(),
            kmeans_seed: seed,
            excluded_singletons: intra.excluded_singletons,
        });

        if d_intra.is_some_and(|d| d > 0.0) {
            let (partition, features) = prev.expect("an earlier order exists");
            trace.selected_k = Some(t - 1);
            trace.stop_reason = Some(StopReason::LocalMinimum);
            return Ok(AgcResult {
                partition,
                k: t - 1,
                intra: prev_intra,
                trace,
                features,
            });
        }
        if t == cfg.max_iter {
            trace.selected_k = Some(t);
            trace.stop_reason = Some(StopReason::MaxIter);
            let features = cfg.keep_features.then(|| xbar.clone());
            return Ok(AgcResult {
                partition,
                k: t,
                intra: intra.value,
                trace,
                features,
            });
        }
        let features = cfg.keep_features.then(|| xbar.clone());
        prev = Some((partition, features));
        prev_intra = intra.value;
    }
    unreachable!("max_iter >= 1 guarantees a return inside the loop")
}

/// One row of an order sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: usize,
    /// `intra_k - intra_{k-1}`; absent for `k = 1`.
    pub d_intra: Option<f64>,
    pub report: MetricsReport,
}

/// Clusters at every order `1..=k_max` with the same seeds as [`run_agc`]
/// and reports intra-cluster distance plus, when `truth` is given, the
/// external metrics.
pub fn sweep_k(
    g: &SparseGraph,
    x: &FeatureMatrix,
    k_max: usize,
    truth: Option<&ClusterPartition>,
    cfg: &AgcConfig,
) -> Result<Vec<SweepRow>> {
    if k_max < 1 {
        return Err(AgcError::validation("k_max must be at least 1"));
    }
    if cfg.m < 1 {
        return Err(AgcError::validation("cluster count must be positive"));
    }
    check_inputs(g, x)?;
    if let Some(t) = truth {
        if t.len() != g.n() {
            return Err(AgcError::validation(format!(
                "ground truth covers {} nodes but the graph has {}",
                t.len(),
                g.n()
            )));
        }
    }
    let op = PropagationOperator::new(g);
    let mut filter = IncrementalFilter::new(&op, x.clone())?;
    let mut rows = Vec::with_capacity(k_max);
    let mut prev_intra = f64::INFINITY;
    for k in 1..=k_max {
        let xbar = filter.advance();
        let partition = spectral_cluster(xbar, cfg.m, iteration_seed(cfg.seed, k), &cfg.spectral)?;
        let report = metrics::evaluate(&partition, truth, Some(xbar), cfg.nmi)?;
        let intra = report.intra.expect("features supplied");
        rows.push(SweepRow {
            k,
            d_intra: (k > 1).then_some(intra - prev_intra),
            report,
        });
        prev_intra = intra;
    }
    Ok(rows)
}

/// Tab-separated sweep table. External metric columns are written only if
/// every row has them. The `k = 1` difference is written as `-inf`.
pub fn write_sweep_tsv<W: Write>(rows: &[SweepRow], mut out: W) -> Result<()> {
    let external = !rows.is_empty() && rows.iter().all(|r| r.report.acc.is_some());
    if external {
        writeln!(out, "k\tintra\td_intra\tacc\tnmi\tf1")?;
    } else {
        writeln!(out, "k\tintra\td_intra")?;
    }
    for r in rows {
        let d = r
            .d_intra
            .map_or_else(|| "-inf".to_string(), |d| d.to_string());
        write!(
            out,
            "{}\t{}\t{}",
            r.k,
            r.report.intra.unwrap_or(f64::NAN),
            d
        )?;
        if external {
            write!(
                out,
                "\t{}\t{}\t{}",
                r.report.acc.unwrap(),
                r.report.nmi.unwrap(),
                r.report.macro_f1.unwrap()
            )?;
        }
        writeln!(out)?;
    }
    Ok(())
}
