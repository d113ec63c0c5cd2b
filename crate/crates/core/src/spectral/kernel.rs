use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{AgcError, Result};
use crate::features::FeatureMatrix;
use crate::graph::SparseGraph;

/// A real symmetric linear operator that can be applied to vectors and, for
/// small sizes, densified.
pub trait SymmetricOperator: Sync {
    fn dim(&self) -> usize;

    /// `y = W x`.
    fn apply(&self, x: &[f64], y: &mut [f64]);

    fn to_dense(&self) -> DMatrix<f64>;
}

/// Dense nonnegative symmetric similarity `W = (|K| + |K^T|) / 2` for the
/// linear kernel `K = X X^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// Wraps an existing dense matrix after checking it is symmetric,
    /// finite and nonnegative.
    pub fn from_dense(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(AgcError::validation("similarity buffer is not n x n"));
        }
        for i in 0..n {
            for j in 0..n {
                let v = data[i * n + j];
                if !v.is_finite() || v < 0.0 || v != data[j * n + i] {
                    return Err(AgcError::validation(format!(
                        "similarity entry ({i}, {j}) breaks symmetry or nonnegativity"
                    )));
                }
            }
        }
        Ok(SimilarityMatrix { n, data })
    }
}

/// Dot product with a fixed eight-lane accumulation order.
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 8];
    let ca = a.chunks_exact(8);
    let cb = b.chunks_exact(8);
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for l in 0..8 {
            acc[l] += x[l] * y[l];
        }
    }
    let mut tail = 0.0;
    for (x, y) in ra.iter().zip(rb) {
        tail += x * y;
    }
    ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7])) + tail
}

/// Absolute linear-kernel similarity of the rows of `x`.
///
/// The Gram matrix comes from a blocked single-threaded matrix product; the
/// upper triangle is then mirrored so the result is exactly symmetric.
/// Costs `O(n^2 d)`.
pub fn linear_kernel(x: &FeatureMatrix) -> Result<SimilarityMatrix> {
    let n = x.nrows();
    if n < 2 {
        return Err(AgcError::validation(format!(
            "linear kernel needs at least 2 rows, got {n}"
        )));
    }
    let xm = DMatrix::from_row_slice(n, x.ncols(), x.as_slice());
    let gram = &xm * xm.transpose();
    let mut data = vec![0.0; n * n];
    for j in 0..n {
        let col = gram.column(j);
        for i in 0..=j {
            let v = col[i].abs();
            data[i * n + j] = v;
            data[j * n + i] = v;
        }
    }
    Ok(SimilarityMatrix { n, data })
}

impl SymmetricOperator for SimilarityMatrix {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        y.par_iter_mut()
            .enumerate()
            .for_each(|(i, yi)| *yi = dot(self.row(i), x));
    }

    fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.n, &self.data)
    }
}

/// The adjacency matrix itself, used as the similarity for structure-only
/// spectral clustering.
impl SymmetricOperator for SparseGraph {
    fn dim(&self) -> usize {
        self.n()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.apply_adjacency(x, y);
    }

    fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n(), self.n());
        for (u, v, w) in self.edges() {
            m[(u, v)] = w;
            m[(v, u)] = w;
        }
        m
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_rows_give_identity() {
        let x =
            FeatureMatrix::from_rows(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        let w = linear_kernel(&x).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(w.get(i, j), if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn absolute_value_removes_sign() {
        let x = FeatureMatrix::from_rows(&[[1.0, 2.0], [-1.0, -2.0]]).unwrap();
        let w = linear_kernel(&x).unwrap();
        assert_eq!(w.data, vec![5.0; 4]);
    }

    #[test]
    fn single_row_rejected() {
        let x = FeatureMatrix::zeros(1, 3);
        assert!(linear_kernel(&x).is_err());
    }

    #[test]
    fn dot_handles_remainders() {
        let a: Vec<f64> = (0..19).map(|i| i as f64).collect();
        let b: Vec<f64> = (0..19).map(|i| (i as f64) * 0.5 - 3.0).collect();
        let naive: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        assert!((dot(&a, &b) - naive).abs() < 1e-12);
    }

    #[test]
    fn from_dense_checks_symmetry() {
        assert!(SimilarityMatrix::from_dense(2, vec![1.0, 2.0, 2.0, 1.0]).is_ok());
        assert!(SimilarityMatrix::from_dense(2, vec![1.0, 2.0, 3.0, 1.0]).is_err());
        assert!(SimilarityMatrix::from_dense(2, vec![1.0, -2.0, -2.0, 1.0]).is_err());
    }
}
