//! Undirected weighted graphs in compressed sparse row form, their degree
//! vectors, and the normalized propagation operator `S = D^-1/2 A D^-1/2`.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::error::{AgcError, Result};
use crate::features::FeatureMatrix;

/// Symmetric sparse adjacency matrix with dense node ids `0..n`.
///
/// Rows are stored in CSR order with strictly increasing column indices, so
/// every traversal of a row visits neighbours in the same order.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseGraph {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    weights: Vec<f64>,
}

impl SparseGraph {
    /// Graph with `n` nodes and no edges.
    pub fn empty(n: usize) -> Self {
        SparseGraph {
            n,
            row_ptr: vec![0; n + 1],
            col_idx: Vec::new(),
            weights: Vec::new(),
        }
    }

    /// Builds a graph from weighted edge records.
    ///
    /// Records with the same orientation are coalesced by summing their
    /// weights. If a pair appears in both orientations the input is taken to
    /// already be symmetric for that pair and the larger of the two directed
    /// weights is used, so `0 1` followed by `1 0` is one unit edge.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut directed: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (idx, &(u, v, w)) in edges.iter().enumerate() {
            if u >= n || v >= n {
                return Err(AgcError::validation(format!(
                    "edge {idx} ({u}, {v}) references a node outside 0..{n}"
                )));
            }
            if !w.is_finite() || w < 0.0 {
                return Err(AgcError::validation(format!(
                    "edge {idx} ({u}, {v}) has invalid weight {w}"
                )));
            }
            *directed.entry((u, v)).or_insert(0.0) += w;
        }

        let mut undirected: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (&(u, v), &w) in &directed {
            let key = (u.min(v), u.max(v));
            let slot = undirected.entry(key).or_insert(0.0);
            if w > *slot {
                *slot = w;
            }
        }

        let mut counts = vec![0usize; n];
        for &(u, v) in undirected.keys() {
            counts[u] += 1;
            if u != v {
                counts[v] += 1;
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        for c in &counts {
            row_ptr.push(row_ptr.last().unwrap() + c);
        }
        let nnz = *row_ptr.last().unwrap();
        let mut col_idx = vec![0usize; nnz];
        let mut weights = vec![0.0f64; nnz];
        let mut cursor = row_ptr[..n].to_vec();
        let mut push = |r: usize, c: usize, w: f64| {
            col_idx[cursor[r]] = c;
            weights[cursor[r]] = w;
            cursor[r] += 1;
        };
        for (&(u, v), &w) in &undirected {
            push(u, v, w);
            if u != v {
                push(v, u, w);
            }
        }
        // Keys were visited in (min, max) order, which leaves the mirrored
        // entries of each row out of column order.
        for r in 0..n {
            let (lo, hi) = (row_ptr[r], row_ptr[r + 1]);
            let mut row: Vec<(usize, f64)> = col_idx[lo..hi]
                .iter()
                .copied()
                .zip(weights[lo..hi].iter().copied())
                .collect();
            row.sort_by_key(|&(c, _)| c);
            for (slot, (c, w)) in row.into_iter().enumerate() {
                col_idx[lo + slot] = c;
                weights[lo + slot] = w;
            }
        }

        Ok(SparseGraph {
            n,
            row_ptr,
            col_idx,
            weights,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of stored nonzeros of `A` (each off-diagonal edge counts twice).
    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    /// Number of undirected edges, self-loops counted once.
    pub fn num_edges(&self) -> usize {
        let loops = (0..self.n)
            .filter(|&i| self.neighbors(i).any(|(j, _)| j == i))
            .count();
        (self.nnz() - loops) / 2 + loops
    }

    /// `(neighbour, weight)` pairs of row `i` in increasing neighbour order.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.col_idx[lo..hi]
            .iter()
            .copied()
            .zip(self.weights[lo..hi].iter().copied())
    }

    /// Each undirected edge once, as `(u, v, w)` with `u <= v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |u| {
            self.neighbors(u)
                .filter(move |&(v, _)| v >= u)
                .map(move |(v, w)| (u, v, w))
        })
    }

    /// Stored weight `a_ij`, zero when absent.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        match self.col_idx[lo..hi].binary_search(&j) {
            Ok(pos) => self.weights[lo + pos],
            Err(_) => 0.0,
        }
    }

    pub fn degree_vector(&self) -> DegreeVector {
        DegreeVector(
            (0..self.n)
                .map(|i| self.neighbors(i).map(|(_, w)| w).sum())
                .collect(),
        )
    }

    /// `y = A x`.
    pub fn apply_adjacency(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.neighbors(i).map(|(j, w)| w * x[j]).sum();
        }
    }

    /// Writes the graph as a tab-separated edge list, one undirected edge per
    /// line. Unit weights are omitted.
    pub fn write_edge_list<W: Write>(&self, mut out: W) -> Result<()> {
        for (u, v, w) in self.edges() {
            if w == 1.0 {
                writeln!(out, "{u}\t{v}")?;
            } else {
                writeln!(out, "{u}\t{v}\t{w}")?;
            }
        }
        Ok(())
    }
}

/// Node degrees `d_i = sum_j a_ij`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeVector(Vec<f64>);

impl DegreeVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `D^{1/2} 1`, the eigenvalue-zero direction of the normalized Laplacian.
    pub fn sqrt(&self) -> Vec<f64> {
        self.0.iter().map(|d| d.sqrt()).collect()
    }
}

/// Implicit `S = D^{-1/2} A D^{-1/2}` sharing the CSR structure of a graph.
///
/// Rows and columns of isolated nodes (`d_i = 0`) are zero, so the
/// normalized Laplacian `I - S` acts as the identity on them.
#[derive(Debug, Clone)]
pub struct PropagationOperator<'g> {
    graph: &'g SparseGraph,
    degrees: DegreeVector,
    values: Vec<f64>,
    isolated: Vec<bool>,
}

impl<'g> PropagationOperator<'g> {
    pub fn new(graph: &'g SparseGraph) -> Self {
        let degrees = graph.degree_vector();
        let inv_sqrt: Vec<f64> = degrees
            .as_slice()
            .iter()
            .map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
            .collect();
        let mut values = Vec::with_capacity(graph.nnz());
        for i in 0..graph.n() {
            for (j, w) in graph.neighbors(i) {
                values.push(w * inv_sqrt[i] * inv_sqrt[j]);
            }
        }
        let isolated = degrees.as_slice().iter().map(|&d| d == 0.0).collect();
        PropagationOperator {
            graph,
            degrees,
            values,
            isolated,
        }
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn graph(&self) -> &SparseGraph {
        self.graph
    }

    pub fn degrees(&self) -> &DegreeVector {
        &self.degrees
    }

    pub fn isolated_mask(&self) -> &[bool] {
        &self.isolated
    }

    fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (lo, hi) = (self.graph.row_ptr[i], self.graph.row_ptr[i + 1]);
        self.graph.col_idx[lo..hi]
            .iter()
            .copied()
            .zip(self.values[lo..hi].iter().copied())
    }

    /// `y = S x` for a single signal.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n());
        assert_eq!(y.len(), self.n());
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, s) in self.row(i) {
                acc += s * x[j];
            }
            *yi = acc;
        }
    }

    /// `x^T S x` without materializing `S x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        (0..self.n())
            .map(|i| {
                let sx: f64 = self.row(i).map(|(j, s)| s * x[j]).sum();
                x[i] * sx
            })
            .sum()
    }

    /// One low-pass step `0.5 (X + S X)` applied to every column of `x`.
    ///
    /// Rows are computed independently and each row accumulates its
    /// neighbours in CSR order, so the result does not depend on the number
    /// of worker threads.
    pub fn half_step(&self, x: &FeatureMatrix) -> FeatureMatrix {
        assert_eq!(x.nrows(), self.n());
        let d = x.ncols();
        let mut out = vec![0.0; self.n() * d];
        if d == 0 {
            return FeatureMatrix::from_raw_unchecked(self.n(), 0, out);
        }
        out.par_chunks_mut(d).enumerate().for_each(|(i, row_out)| {
            for (j, s) in self.row(i) {
                for (o, &v) in row_out.iter_mut().zip(x.row(j)) {
                    *o += s * v;
                }
            }
            for (o, &v) in row_out.iter_mut().zip(x.row(i)) {
                *o = 0.5 * (v + *o);
            }
        });
        FeatureMatrix::from_raw_unchecked(self.n(), d, out)
    }
}

/// Parses a whitespace-separated edge list.
///
/// Each non-blank line that does not start with `#` is `u v` or `u v w`.
/// The node count is `max id + 1`, or `n_hint` when that is larger.
pub fn load_edge_list<R: BufRead>(source: R, n_hint: Option<usize>) -> Result<SparseGraph> {
    let mut edges = Vec::new();
    let mut max_id: Option<usize> = None;
    for (lineno, line) in source.lines().enumerate() {
        let line = line?;
        let Some((u, v, w)) = parse_edge_line(&line, lineno + 1, |tok, line| {
            tok.parse::<usize>()
                .map_err(|_| AgcError::parse(line, format!("invalid node id {tok:?}")))
        })?
        else {
            continue;
        };
        max_id = Some(max_id.map_or(u.max(v), |m| m.max(u).max(v)));
        edges.push((u, v, w));
    }
    let n = max_id.map_or(0, |m| m + 1).max(n_hint.unwrap_or(0));
    SparseGraph::from_edges(n, &edges)
}

type EdgeRecord<T> = (T, T, f64);

fn parse_edge_line<T>(
    line: &str,
    lineno: usize,
    parse_id: impl Fn(&str, usize) -> Result<T>,
) -> Result<Option<EdgeRecord<T>>> {
    let trimmed = line.trim();
    if trimmed.is_empty() || trimmed.starts_with('#') {
        return Ok(None);
    }
    let tokens: Vec<&str> = trimmed.split_whitespace().collect();
    if tokens.len() != 2 && tokens.len() != 3 {
        return Err(AgcError::parse(
            lineno,
            format!("expected 2 or 3 fields, found {}", tokens.len()),
        ));
    }
    let u = parse_id(tokens[0], lineno)?;
    let v = parse_id(tokens[1], lineno)?;
    let w = match tokens.get(2) {
        None => 1.0,
        Some(tok) => {
            let w: f64 = tok
                .parse()
                .map_err(|_| AgcError::parse(lineno, format!("invalid weight {tok:?}")))?;
            if !w.is_finite() || w < 0.0 {
                return Err(AgcError::validation(format!(
                    "line {lineno}: edge weight must be finite and nonnegative, got {w}"
                )));
            }
            w
        }
    };
    Ok(Some((u, v, w)))
}

/// Mapping from dense node ids back to the raw ids of a sparse-id input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdMap {
    raw: Vec<u64>,
}

impl IdMap {
    pub fn len(&self) -> usize {
        self.raw.len()
    }

    pub fn is_empty(&self) -> bool {
        self.raw.is_empty()
    }

    pub fn raw_id(&self, dense: usize) -> u64 {
        self.raw[dense]
    }

    pub fn dense_id(&self, raw: u64) -> Option<usize> {
        self.raw.binary_search(&raw).ok()
    }

    /// Writes `raw<TAB>dense` lines in dense-id order.
    pub fn write<W: Write>(&self, mut out: W) -> Result<()> {
        for (dense, raw) in self.raw.iter().enumerate() {
            writeln!(out, "{raw}\t{dense}")?;
        }
        Ok(())
    }
}

/// Like [`load_edge_list`] but accepts arbitrary 64-bit node ids, assigning
/// dense ids in increasing raw-id order.
pub fn load_edge_list_remapped<R: BufRead>(source: R) -> Result<(SparseGraph, IdMap)> {
    let mut raw_edges = Vec::new();
    for (lineno, line) in source.lines().enumerate() {
        let line = line?;
        if let Some(edge) = parse_edge_line(&line, lineno + 1, |tok, line| {
            tok.parse::<u64>()
                .map_err(|_| AgcError::parse(line, format!("invalid node id {tok:?}")))
        })? {
            raw_edges.push(edge);
        }
    }
    let mut raw: Vec<u64> = raw_edges.iter().flat_map(|&(u, v, _)| [u, v]).collect();
    raw.sort_unstable();
    raw.dedup();
    let map = IdMap { raw };
    let edges: Vec<(usize, usize, f64)> = raw_edges
        .iter()
        .map(|&(u, v, w)| (map.dense_id(u).unwrap(), map.dense_id(v).unwrap(), w))
        .collect();
    let graph = SparseGraph::from_edges(map.len(), &edges)?;
    Ok((graph, map))
}
