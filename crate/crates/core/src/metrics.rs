//! Internal and external clustering criteria.
//!
//! [`intra_distance`] is the mean within-cluster pairwise distance that
//! drives filter-order selection. [`accuracy`], [`nmi`] and [`macro_f1`]
//! compare a predicted partition with ground truth.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{AgcError, Result};
use crate::features::FeatureMatrix;
use crate::hungarian;
use crate::partition::ClusterPartition;

/// Mean within-cluster distance plus the number of singleton clusters that
/// were left out of the average.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntraDistance {
    pub value: f64,
    pub excluded_singletons: usize,
}

/// Average over clusters of the mean Euclidean distance between distinct
/// members.
///
/// Clusters with fewer than two members have no pairs and are excluded from
/// the average. If no cluster has two members the value is undefined.
pub fn intra_distance(xbar: &FeatureMatrix, part: &ClusterPartition) -> Result<f64> {
    intra_distance_detail(xbar, part).map(|d| d.value)
}

pub fn intra_distance_detail(
    xbar: &FeatureMatrix,
    part: &ClusterPartition,
) -> Result<IntraDistance> {
    if xbar.nrows() != part.len() {
        return Err(AgcError::validation(format!(
            "partition covers {} nodes but the feature matrix has {} rows",
            part.len(),
            xbar.nrows()
        )));
    }
    let members = part.members();
    let excluded_singletons = members.iter().filter(|c| c.len() == 1).count();
    let mut total = 0.0;
    let mut counted = 0usize;
    for cluster in members.iter().filter(|c| c.len() >= 2) {
        let s = cluster.len();
        let partial: Vec<f64> = (0..s)
            .into_par_iter()
            .map(|a| {
                let xa = xbar.row(cluster[a]);
                cluster[a + 1..]
                    .iter()
                    .map(|&j| euclidean(xa, xbar.row(j)))
                    .sum::<f64>()
            })
            .collect();
        let pair_sum: f64 = partial.iter().sum();
        total += 2.0 * pair_sum / (s * (s - 1)) as f64;
        counted += 1;
    }
    if counted == 0 {
        return Err(AgcError::domain(
            "intra-cluster distance is undefined when every cluster has fewer than two members",
        ));
    }
    Ok(IntraDistance {
        value: total / counted as f64,
        excluded_singletons,
    })
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Joint label counts `table[pred][truth]`.
pub fn contingency(pred: &ClusterPartition, truth: &ClusterPartition) -> Result<Vec<Vec<usize>>> {
    if pred.len() != truth.len() {
        return Err(AgcError::validation(format!(
            "predicted labels cover {} nodes, ground truth covers {}",
            pred.len(),
            truth.len()
        )));
    }
    if pred.is_empty() {
        return Err(AgcError::validation("cannot compare empty partitions"));
    }
    let mut table = vec![vec![0usize; truth.num_clusters()]; pred.num_clusters()];
    for (&p, &t) in pred.labels().iter().zip(truth.labels()) {
        table[p][t] += 1;
    }
    Ok(table)
}

/// Bijection between predicted and true cluster ids.
///
/// `pred_to_truth[p]` is the true id matched with predicted cluster `p`.
/// When there are more predicted than true clusters the surplus are mapped
/// injectively to ids at or above the true cluster count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Matching {
    pub pred_to_truth: Vec<usize>,
}

impl Matching {
    /// Predicted id matched with true class `t`, if any.
    pub fn pred_for(&self, t: usize) -> Option<usize> {
        self.pred_to_truth.iter().position(|&x| x == t)
    }
}

/// Resolution of the per-pair F1 tie-breaker.
const F1_UNIT: f64 = (1u64 << 40) as f64;

/// Maximizes matched counts; among equally good matchings, maximizes the
/// summed F1 of matched pairs so the choice does not depend on label ids.
fn optimal_matching(table: &[Vec<usize>], m_true: usize) -> Matching {
    let m_pred = table.len();
    let size = m_pred.max(m_true);
    let pred_sizes: Vec<usize> = table.iter().map(|r| r.iter().sum()).collect();
    let true_sizes: Vec<usize> = (0..m_true)
        .map(|t| table.iter().map(|r| r[t]).sum())
        .collect();
    let max = table.iter().flatten().copied().max().unwrap_or(0) as i128;
    let f1_max = F1_UNIT as i128;
    let tier = f1_max * (size as i128 + 1);
    let cost: Vec<Vec<i128>> = (0..size)
        .map(|p| {
            (0..size)
                .map(|t| {
                    let (count, f1) = if p < m_pred && t < m_true && table[p][t] > 0 {
                        let c = table[p][t];
                        let f1 = 2.0 * c as f64 / (pred_sizes[p] + true_sizes[t]) as f64;
                        (c as i128, (f1 * F1_UNIT).round() as i128)
                    } else {
                        (0, 0)
                    };
                    (max - count) * tier + (f1_max - f1)
                })
                .collect()
        })
        .collect();
    let assignment = hungarian::solve(&cost);
    Matching {
        pred_to_truth: assignment[..m_pred].to_vec(),
    }
}

/// Fraction of nodes whose predicted cluster maps to their true class under
/// the best one-to-one matching of cluster ids.
pub fn accuracy(pred: &ClusterPartition, truth: &ClusterPartition) -> Result<(f64, Matching)> {
    let table = contingency(pred, truth)?;
    let matching = optimal_matching(&table, truth.num_clusters());
    let hits: usize = matching
        .pred_to_truth
        .iter()
        .enumerate()
        .filter(|&(_, &t)| t < truth.num_clusters())
        .map(|(p, &t)| table[p][t])
        .sum();
    Ok((hits as f64 / pred.len() as f64, matching))
}

/// Normalizer applied to mutual information.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NmiNormalization {
    Arithmetic,
    #[default]
    Geometric,
    Max,
}

fn entropy(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information with natural-log entropies.
///
/// If both partitions have zero entropy they are identical and the value is
/// 1; if only one does, the value is 0.
pub fn nmi(
    pred: &ClusterPartition,
    truth: &ClusterPartition,
    norm: NmiNormalization,
) -> Result<f64> {
    let table = contingency(pred, truth)?;
    let n = pred.len() as f64;
    let row: Vec<usize> = table.iter().map(|r| r.iter().sum()).collect();
    let col: Vec<usize> = (0..truth.num_clusters())
        .map(|t| table.iter().map(|r| r[t]).sum())
        .collect();
    let h_pred = entropy(row.iter().copied(), n);
    let h_true = entropy(col.iter().copied(), n);
    if h_pred == 0.0 && h_true == 0.0 {
        return Ok(1.0);
    }
    if h_pred == 0.0 || h_true == 0.0 {
        return Ok(0.0);
    }
    let mut mi = 0.0;
    for (p, r) in table.iter().enumerate() {
        for (t, &c) in r.iter().enumerate() {
            if c > 0 {
                let c = c as f64;
                mi += c / n * (n * c / (row[p] as f64 * col[t] as f64)).ln();
            }
        }
    }
    let denom = match norm {
        NmiNormalization::Arithmetic => 0.5 * (h_pred + h_true),
        NmiNormalization::Geometric => (h_pred * h_true).sqrt(),
        NmiNormalization::Max => h_pred.max(h_true),
    };
    Ok((mi / denom).clamp(0.0, 1.0))
}

/// Unweighted mean over true classes of the F1 score of the predicted
/// cluster matched to each class; a class with no match scores zero.
pub fn macro_f1(pred: &ClusterPartition, truth: &ClusterPartition) -> Result<f64> {
    let (_, matching) = accuracy(pred, truth)?;
    macro_f1_with_matching(pred, truth, &matching)
}

pub fn macro_f1_with_matching(
    pred: &ClusterPartition,
    truth: &ClusterPartition,
    matching: &Matching,
) -> Result<f64> {
    let table = contingency(pred, truth)?;
    let pred_sizes: Vec<usize> = table.iter().map(|r| r.iter().sum()).collect();
    let true_sizes = truth.sizes();
    let classes: Vec<usize> = (0..truth.num_clusters())
        .filter(|&t| true_sizes[t] > 0)
        .collect();
    let total: f64 = classes
        .iter()
        .map(|&t| {
            let Some(p) = matching.pred_for(t) else {
                return 0.0;
            };
            let tp = table[p][t] as f64;
            if tp == 0.0 {
                return 0.0;
            }
            let precision = tp / pred_sizes[p] as f64;
            let recall = tp / true_sizes[t] as f64;
            2.0 * precision * recall / (precision + recall)
        })
        .sum();
    Ok(total / classes.len() as f64)
}

/// Metrics for one partition. External scores are present only when ground
/// truth was supplied; `k_selected` only when produced by the AGC driver.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricsReport {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acc: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nmi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub macro_f1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub intra: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matching: Option<Matching>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_selected: Option<usize>,
}

/// Fills in whichever metrics the available inputs allow.
pub fn evaluate(
    pred: &ClusterPartition,
    truth: Option<&ClusterPartition>,
    xbar: Option<&FeatureMatrix>,
    norm: NmiNormalization,
) -> Result<MetricsReport> {
    let mut report = MetricsReport::default();
    if let Some(truth) = truth {
        let (acc, matching) = accuracy(pred, truth)?;
        report.acc = Some(acc);
        report.nmi = Some(nmi(pred, truth, norm)?);
        report.macro_f1 = Some(macro_f1_with_matching(pred, truth, &matching)?);
        report.matching = Some(matching);
    }
    if let Some(x) = xbar {
        report.intra = Some(intra_distance(x, pred)?);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn part(labels: &[usize]) -> ClusterPartition {
        let m = labels.iter().max().map_or(0, |&l| l + 1);
        ClusterPartition::new(labels.to_vec(), m).unwrap()
    }

    #[test]
    fn intra_of_identical_pair_is_zero() {
        let x = FeatureMatrix::from_rows(&[[1.0, 2.0], [1.0, 2.0]]).unwrap();
        assert_eq!(intra_distance(&x, &part(&[0, 0])).unwrap(), 0.0);
    }

    #[test]
    fn intra_hand_example() {
        let x =
            FeatureMatrix::from_rows(&[[0.0, 0.0], [3.0, 4.0], [1.0, 1.0], [1.0, 1.0]]).unwrap();
        let v = intra_distance(&x, &part(&[0, 0, 1, 1])).unwrap();
        assert!((v - 2.5).abs() < 1e-15);
    }

    #[test]
    fn intra_skips_singletons_and_rejects_all_singletons() {
        let x = FeatureMatrix::from_rows(&[[0.0], [2.0], [10.0]]).unwrap();
        let d = intra_distance_detail(&x, &part(&[0, 0, 1])).unwrap();
        assert_eq!(d.value, 2.0);
        assert_eq!(d.excluded_singletons, 1);
        assert!(matches!(
            intra_distance(&x, &part(&[0, 1, 2])),
            Err(AgcError::Domain(_))
        ));
    }

    #[test]
    fn identity_scores_one() {
        let t = part(&[0, 0, 1, 1, 2, 2, 2]);
        assert_eq!(accuracy(&t, &t).unwrap().0, 1.0);
        assert!((nmi(&t, &t, NmiNormalization::Geometric).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(macro_f1(&t, &t).unwrap(), 1.0);
    }

    #[test]
    fn renamed_labels_score_one() {
        let t = part(&[0, 0, 1, 1, 2, 2, 2]);
        let p = part(&[1, 1, 2, 2, 0, 0, 0]);
        let (acc, matching) = accuracy(&p, &t).unwrap();
        assert_eq!(acc, 1.0);
        assert_eq!(matching.pred_to_truth, vec![2, 0, 1]);
        assert_eq!(macro_f1(&p, &t).unwrap(), 1.0);
    }

    #[test]
    fn single_cluster_prediction() {
        let t = part(&[0, 0, 0, 1, 1, 1]);
        let p = ClusterPartition::new(vec![0; 6], 1).unwrap();
        assert_eq!(nmi(&p, &t, NmiNormalization::Geometric).unwrap(), 0.0);
        assert!((macro_f1(&p, &t).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(accuracy(&p, &t).unwrap().0, 0.5);
    }

    #[test]
    fn both_trivial_partitions_have_nmi_one() {
        let p = ClusterPartition::new(vec![0; 4], 1).unwrap();
        assert_eq!(nmi(&p, &p, NmiNormalization::Max).unwrap(), 1.0);
    }

    #[test]
    fn surplus_predicted_clusters_get_extension_ids() {
        let t = part(&[0, 0, 1, 1]);
        let p = part(&[0, 1, 2, 2]);
        let (acc, matching) = accuracy(&p, &t).unwrap();
        assert_eq!(acc, 0.75);
        let mut ids = matching.pred_to_truth.clone();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), 3);
        assert!(matching.pred_to_truth.iter().filter(|&&x| x >= 2).count() == 1);
    }

    #[test]
    fn length_mismatch_rejected() {
        let a = part(&[0, 1]);
        let b = part(&[0, 1, 1]);
        assert!(matches!(accuracy(&a, &b), Err(AgcError::Validation(_))));
        assert!(nmi(&a, &b, NmiNormalization::Geometric).is_err());
        assert!(macro_f1(&a, &b).is_err());
    }

    #[test]
    fn report_json_field_names() {
        let t = part(&[0, 0, 1, 1]);
        let x = FeatureMatrix::from_rows(&[[0.0], [1.0], [5.0], [6.0]]).unwrap();
        let mut r = evaluate(&t, Some(&t), Some(&x), NmiNormalization::Geometric).unwrap();
        r.k_selected = Some(3);
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(
            keys,
            ["acc", "intra", "k_selected", "macro_f1", "matching", "nmi"]
        );
        assert_eq!(v["matching"], serde_json::json!([0, 1]));

        let intra_only = evaluate(&t, None, Some(&x), NmiNormalization::Geometric).unwrap();
        let v = serde_json::to_value(&intra_only).unwrap();
        assert_eq!(v.as_object().unwrap().len(), 1);
    }
}
