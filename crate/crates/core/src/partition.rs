use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{AgcError, Result};

/// Assignment of `n` nodes to clusters `0..m`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterPartition {
    labels: Vec<usize>,
    m: usize,
}

impl ClusterPartition {
    pub fn new(labels: Vec<usize>, m: usize) -> Result<Self> {
        if let Some((i, &l)) = labels.iter().enumerate().find(|(_, &l)| l >= m) {
            return Err(AgcError::validation(format!(
                "label {l} of node {i} is not below cluster count {m}"
            )));
        }
        Ok(ClusterPartition { labels, m })
    }

    /// Compresses arbitrary integer labels to `0..m` in increasing order of
    /// the raw label value.
    pub fn from_raw_labels(raw: &[i64]) -> Self {
        let mut ids = BTreeMap::new();
        for &r in raw {
            ids.entry(r).or_insert(0usize);
        }
        for (next, id) in ids.values_mut().enumerate() {
            *id = next;
        }
        let labels = raw.iter().map(|r| ids[r]).collect();
        ClusterPartition {
            labels,
            m: ids.len(),
        }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_clusters(&self) -> usize {
        self.m
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.m];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Cluster ids with no members.
    pub fn empty_clusters(&self) -> Vec<usize> {
        self.sizes()
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == 0)
            .map(|(c, _)| c)
            .collect()
    }

    /// Member node ids per cluster, in increasing node order.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.m];
        for (i, &l) in self.labels.iter().enumerate() {
            out[l].push(i);
        }
        out
    }

    /// 64-bit FNV-1a digest of `m` and the label sequence, as 16 hex digits.
    pub fn digest(&self) -> String {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut h = OFFSET;
        let mut feed = |v: u64| {
            for b in v.to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(PRIME);
            }
        };
        feed(self.m as u64);
        for &l in &self.labels {
            feed(l as u64);
        }
        format!("{h:016x}")
    }

    /// Renames clusters in order of first appearance. Two partitions are the
    /// same up to renaming iff their canonical forms are equal.
    pub fn canonical(&self) -> ClusterPartition {
        let mut map = vec![usize::MAX; self.m];
        let mut next = 0;
        let labels = self
            .labels
            .iter()
            .map(|&l| {
                if map[l] == usize::MAX {
                    map[l] = next;
                    next += 1;
                }
                map[l]
            })
            .collect();
        ClusterPartition { labels, m: self.m }
    }
}
