//! k-order low-pass graph convolution `X_bar = (I - L_s / 2)^k X` and the
//! normalized smoothness functional used to measure its effect.
//!
//! The filter is never materialized. Each order is one sparse propagation
//! `x <- 0.5 (x + S x)`, so order `k` costs `O(N d k)` for `N` stored
//! adjacency entries and `d` feature columns.

use crate::error::{AgcError, Result};
use crate::features::FeatureMatrix;
use crate::graph::PropagationOperator;

/// Number of low-pass propagation steps. Zero is the identity filter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FilterOrder(pub usize);

impl FilterOrder {
    pub fn get(self) -> usize {
        self.0
    }
}

impl From<usize> for FilterOrder {
    fn from(k: usize) -> Self {
        FilterOrder(k)
    }
}

/// `p(lambda) = (1 - lambda / 2)^k` on the normalized Laplacian spectrum `[0, 2]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrequencyResponse {
    order: FilterOrder,
}

impl FrequencyResponse {
    pub fn new(order: FilterOrder) -> Self {
        FrequencyResponse { order }
    }

    pub fn eval(&self, lambda: f64) -> Result<f64> {
        if !(0.0..=2.0).contains(&lambda) {
            return Err(AgcError::domain(format!(
                "frequency {lambda} is outside the Laplacian spectrum [0, 2]"
            )));
        }
        let base = 1.0 - 0.5 * lambda;
        Ok(match i32::try_from(self.order.0) {
            Ok(k) => base.powi(k),
            Err(_) => base.powf(self.order.0 as f64),
        })
    }

    /// `points` evenly spaced samples `(lambda, p(lambda))` covering `[0, 2]`.
    pub fn table(&self, points: usize) -> Vec<(f64, f64)> {
        match points {
            0 => Vec::new(),
            1 => vec![(0.0, 1.0)],
            _ => (0..points)
                .map(|i| {
                    let lambda = 2.0 * i as f64 / (points - 1) as f64;
                    (lambda, self.eval(lambda.min(2.0)).unwrap())
                })
                .collect(),
        }
    }
}

pub fn frequency_response(lambda: f64, k: FilterOrder) -> Result<f64> {
    FrequencyResponse::new(k).eval(lambda)
}

/// Applies the k-order low-pass filter to every feature column.
pub fn convolve_k(
    op: &PropagationOperator<'_>,
    x: &FeatureMatrix,
    k: FilterOrder,
) -> Result<FeatureMatrix> {
    let mut filter = IncrementalFilter::new(op, x.clone())?;
    for _ in 0..k.0 {
        filter.advance();
    }
    Ok(filter.into_features())
}

/// Filtered features that can be advanced one order at a time, so order
/// `t + 1` reuses the result for order `t`.
#[derive(Debug, Clone)]
pub struct IncrementalFilter<'a, 'g> {
    op: &'a PropagationOperator<'g>,
    current: FeatureMatrix,
    order: usize,
}

impl<'a, 'g> IncrementalFilter<'a, 'g> {
    pub fn new(op: &'a PropagationOperator<'g>, x: FeatureMatrix) -> Result<Self> {
        if x.nrows() != op.n() {
            return Err(AgcError::validation(format!(
                "feature matrix has {} rows but the graph has {} nodes",
                x.nrows(),
                op.n()
            )));
        }
        Ok(IncrementalFilter {
            op,
            current: x,
            order: 0,
        })
    }

    pub fn order(&self) -> FilterOrder {
        FilterOrder(self.order)
    }

    pub fn features(&self) -> &FeatureMatrix {
        &self.current
    }

    pub fn into_features(self) -> FeatureMatrix {
        self.current
    }

    /// Moves to the next order and returns the new features.
    pub fn advance(&mut self) -> &FeatureMatrix {
        self.current = self.op.half_step(&self.current);
        self.order += 1;
        &self.current
    }
}

fn squared_norm(f: &[f64]) -> Result<f64> {
    let norm2: f64 = f.iter().map(|v| v * v).sum();
    if norm2 == 0.0 {
        return Err(AgcError::domain(
            "smoothness of the zero signal is undefined",
        ));
    }
    Ok(norm2)
}

/// Normalized smoothness `f^T L_s f / ||f||^2` from the quadratic form
/// `f^T f - f^T S f`. The value lies in `[0, 2]` up to rounding.
pub fn smoothness(op: &PropagationOperator<'_>, f: &[f64]) -> Result<f64> {
    check_signal_len(op, f)?;
    let norm2 = squared_norm(f)?;
    Ok((norm2 - op.quadratic_form(f)) / norm2)
}

/// Same quantity as [`smoothness`], evaluated as the edge sum
/// `1/2 sum_ij a_ij (f_i / sqrt(d_i) - f_j / sqrt(d_j))^2`.
///
/// Isolated nodes have no edges but the Laplacian is the identity on them,
/// so their `f_i^2` is added explicitly.
pub fn smoothness_edge_sum(op: &PropagationOperator<'_>, f: &[f64]) -> Result<f64> {
    check_signal_len(op, f)?;
    let norm2 = squared_norm(f)?;
    let deg = op.degrees().as_slice();
    let graph = op.graph();
    let mut total = 0.0;
    for i in 0..graph.n() {
        if deg[i] == 0.0 {
            total += f[i] * f[i];
            continue;
        }
        let fi = f[i] / deg[i].sqrt();
        for (j, w) in graph.neighbors(i) {
            let diff = fi - f[j] / deg[j].sqrt();
            total += 0.5 * w * diff * diff;
        }
    }
    Ok(total / norm2)
}

fn check_signal_len(op: &PropagationOperator<'_>, f: &[f64]) -> Result<()> {
    if f.len() != op.n() {
        return Err(AgcError::validation(format!(
            "signal has length {} but the graph has {} nodes",
            f.len(),
            op.n()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::SparseGraph;

    #[test]
    fn response_examples() {
        for k in [0, 1, 5, 60] {
            assert_eq!(frequency_response(0.0, FilterOrder(k)).unwrap(), 1.0);
        }
        assert_eq!(frequency_response(2.0, FilterOrder(1)).unwrap(), 0.0);
        assert_eq!(frequency_response(1.0, FilterOrder(2)).unwrap(), 0.25);
        assert!(frequency_response(2.5, FilterOrder(1)).is_err());
        assert!(frequency_response(-0.1, FilterOrder(1)).is_err());
    }

    #[test]
    fn response_table_is_low_pass() {
        let table = FrequencyResponse::new(FilterOrder(3)).table(21);
        assert_eq!(table.len(), 21);
        assert_eq!(table[0], (0.0, 1.0));
        assert_eq!(table[20], (2.0, 0.0));
        assert!(table.windows(2).all(|w| w[1].1 <= w[0].1 && w[1].1 >= 0.0));
    }

    #[test]
    fn order_zero_is_identity() {
        let g = SparseGraph::from_edges(3, &[(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let op = PropagationOperator::new(&g);
        let x = FeatureMatrix::from_rows(&[[0.3, 1.0], [-2.0, 0.1], [7.0, 1e-9]]).unwrap();
        assert_eq!(convolve_k(&op, &x, FilterOrder(0)).unwrap(), x);
    }

    #[test]
    fn edgeless_graph_halves_each_step() {
        let g = SparseGraph::empty(3);
        let op = PropagationOperator::new(&g);
        let x = FeatureMatrix::from_rows(&[[0.3, 1.0], [-2.0, 0.1], [7.0, 1e-9]]).unwrap();
        let y = convolve_k(&op, &x, FilterOrder(3)).unwrap();
        let expected: Vec<f64> = x.as_slice().iter().map(|v| v / 8.0).collect();
        assert_eq!(y.as_slice(), expected.as_slice());
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let g = SparseGraph::empty(3);
        let op = PropagationOperator::new(&g);
        let x = FeatureMatrix::zeros(2, 1);
        assert!(matches!(
            convolve_k(&op, &x, FilterOrder(1)),
            Err(AgcError::Validation(_))
        ));
    }

    #[test]
    fn constant_direction_is_perfectly_smooth() {
        let g = SparseGraph::from_edges(4, &[(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0), (0, 2, 0.5)])
            .unwrap();
        let op = PropagationOperator::new(&g);
        let f = op.degrees().sqrt();
        assert!(smoothness(&op, &f).unwrap().abs() <= 1e-12);
        assert!(smoothness_edge_sum(&op, &f).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn zero_signal_is_a_domain_error() {
        let g = SparseGraph::empty(2);
        let op = PropagationOperator::new(&g);
        assert!(matches!(
            smoothness(&op, &[0.0, 0.0]),
            Err(AgcError::Domain(_))
        ));
    }

    #[test]
    fn isolated_nodes_count_as_unit_frequency() {
        let g = SparseGraph::from_edges(3, &[(0, 1, 1.0)]).unwrap();
        let op = PropagationOperator::new(&g);
        let f = [1.0, 1.0, 2.0];
        let q = smoothness(&op, &f).unwrap();
        let e = smoothness_edge_sum(&op, &f).unwrap();
        assert!((q - 4.0 / 6.0).abs() < 1e-15);
        assert!((q - e).abs() < 1e-15);
    }
}
