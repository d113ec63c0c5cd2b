//! Largest eigenpairs of symmetric operators.
//!
//! Small problems use a dense symmetric eigendecomposition. Larger ones use
//! Lanczos iteration with full reorthogonalization, which only needs
//! matrix-vector products and converges quickly to the extreme part of the
//! spectrum that spectral clustering uses.

use nalgebra::DMatrix;
use rand::Rng;

use super::kernel::{dot, SymmetricOperator};
use crate::error::{AgcError, Result};
use crate::features::FeatureMatrix;
use crate::seed::rng_from_seed;

const LANCZOS_SEED: u64 = 0x4c61_6e63_7a6f_7321;

/// Ritz residual target relative to the operator norm estimate.
const LANCZOS_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum EigenSolver {
    /// Dense below or at `dense_limit` nodes, Lanczos above.
    Auto {
        dense_limit: usize,
    },
    Dense,
    Lanczos,
}

impl Default for EigenSolver {
    fn default() -> Self {
        EigenSolver::Auto { dense_limit: 128 }
    }
}

/// Top eigenvectors as the columns of an `n x m` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralEmbedding {
    vectors: FeatureMatrix,
    values: Vec<f64>,
}

impl SpectralEmbedding {
    pub fn vectors(&self) -> &FeatureMatrix {
        &self.vectors
    }

    /// Eigenvalues in descending order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn column(&self, q: usize) -> Vec<f64> {
        self.vectors.column(q)
    }

    /// Rows scaled to unit length (zero rows left as they are).
    pub fn row_normalized(&self) -> FeatureMatrix {
        normalize_rows(&self.vectors)
    }

    /// Columns multiplied by their eigenvalues.
    pub fn eigenvalue_scaled(&self) -> FeatureMatrix {
        let cols: Vec<Vec<f64>> = (0..self.values.len())
            .map(|q| self.column(q).iter().map(|v| v * self.values[q]).collect())
            .collect();
        FeatureMatrix::from_columns(&cols).unwrap()
    }
}

pub(crate) fn normalize_rows(x: &FeatureMatrix) -> FeatureMatrix {
    let rows: Vec<Vec<f64>> = x
        .rows()
        .map(|r| {
            let norm = dot(r, r).sqrt();
            if norm > 0.0 {
                r.iter().map(|v| v / norm).collect()
            } else {
                r.to_vec()
            }
        })
        .collect();
    FeatureMatrix::from_rows(&rows).unwrap()
}

/// Eigenvectors of the `m` largest eigenvalues of `w`.
///
/// Eigenvalues are returned in descending order with ties kept in the
/// order the solver produced them. Each eigenvector is signed so that its
/// entry of largest magnitude (first one on ties) is positive.
pub fn top_eigenvectors<W: SymmetricOperator + ?Sized>(
    w: &W,
    m: usize,
    solver: EigenSolver,
) -> Result<SpectralEmbedding> {
    let n = w.dim();
    if m == 0 || m > n {
        return Err(AgcError::validation(format!(
            "requested {m} eigenvectors of a {n} x {n} matrix"
        )));
    }
    let use_dense = match solver {
        EigenSolver::Dense => true,
        EigenSolver::Lanczos => false,
        EigenSolver::Auto { dense_limit } => n <= dense_limit,
    };
    let (values, mut columns) = if use_dense {
        dense_top(w.to_dense(), m)
    } else {
        lanczos_top(w, m)?
    };
    for c in &mut columns {
        fix_sign(c);
    }
    Ok(SpectralEmbedding {
        vectors: FeatureMatrix::from_columns(&columns)?,
        values,
    })
}

fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Indices of `values` sorted by decreasing value, stable on ties.
fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    idx
}

fn dense_top(a: DMatrix<f64>, m: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let eig = a.symmetric_eigen();
    let vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let order = descending_order(&vals);
    let values = order[..m].iter().map(|&q| vals[q]).collect();
    let columns = order[..m]
        .iter()
        .map(|&q| eig.eigenvectors.column(q).iter().copied().collect())
        .collect();
    (values, columns)
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

/// Two passes of classical Gram-Schmidt against the basis.
fn orthogonalize(basis: &[Vec<f64>], v: &mut [f64]) {
    for _ in 0..2 {
        let coeffs: Vec<f64> = basis.iter().map(|q| dot(q, v)).collect();
        for (q, c) in basis.iter().zip(coeffs) {
            axpy(-c, q, v);
        }
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

fn lanczos_top<W: SymmetricOperator + ?Sized>(
    op: &W,
    m: usize,
) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = op.dim();
    let mut rng = rng_from_seed(LANCZOS_SEED);
    let mut random_unit = |basis: &[Vec<f64>]| -> Option<Vec<f64>> {
        for _ in 0..8 {
            let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
            orthogonalize(basis, &mut v);
            if normalize(&mut v) > 1e-8 {
                return Some(v);
            }
        }
        None
    };

    let mut basis: Vec<Vec<f64>> = vec![random_unit(&[]).expect("nonzero start vector")];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut anorm: f64 = 0.0;
    let mut w = vec![0.0; n];

    loop {
        let j = basis.len() - 1;
        op.apply(&basis[j], &mut w);
        let a = dot(&basis[j], &w);
        alpha.push(a);
        axpy(-a, &basis[j], &mut w);
        if j > 0 {
            axpy(-beta[j - 1], &basis[j - 1], &mut w);
        }
        orthogonalize(&basis, &mut w);
        let b = dot(&w, &w).sqrt();
        anorm = anorm.max(a.abs() + b + beta.last().copied().unwrap_or(0.0));

        let size = basis.len();
        let exhausted = size == n;
        let breakdown = b <= 1e-12 * anorm.max(f64::MIN_POSITIVE);
        if size >= m && (exhausted || breakdown || size.is_multiple_of(4)) {
            let (ritz_vals, ritz_vecs) = tridiagonal_eigen(&alpha, &beta);
            let order = descending_order(&ritz_vals);
            let converged = exhausted
                || order[..m]
                    .iter()
                    .all(|&q| (b * ritz_vecs[(size - 1, q)]).abs() <= LANCZOS_TOL * anorm);
            if converged {
                let values: Vec<f64> = order[..m].iter().map(|&q| ritz_vals[q]).collect();
                let columns: Vec<Vec<f64>> = order[..m]
                    .iter()
                    .map(|&q| {
                        let mut v = vec![0.0; n];
                        for (r, qv) in basis.iter().enumerate() {
                            axpy(ritz_vecs[(r, q)], qv, &mut v);
                        }
                        normalize(&mut v);
                        v
                    })
                    .collect();
                if exhausted || residuals_ok(op, &values, &columns, anorm) {
                    return Ok((values, columns));
                }
            }
        }
        if exhausted {
            return Err(AgcError::domain("Lanczos iteration exhausted the space"));
        }

        if breakdown {
            // Invariant subspace found; continue in a fresh direction.
            match random_unit(&basis) {
                Some(v) => {
                    beta.push(0.0);
                    basis.push(v);
                }
                None => return Err(AgcError::domain("Lanczos restart vector vanished")),
            }
        } else {
            beta.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }
    }
}

fn residuals_ok<W: SymmetricOperator + ?Sized>(
    op: &W,
    values: &[f64],
    columns: &[Vec<f64>],
    anorm: f64,
) -> bool {
    let mut y = vec![0.0; op.dim()];
    columns.iter().zip(values).all(|(v, &lambda)| {
        op.apply(v, &mut y);
        let r: f64 = y
            .iter()
            .zip(v)
            .map(|(a, b)| (a - lambda * b).powi(2))
            .sum::<f64>()
            .sqrt();
        r <= 1e-9 * anorm
    })
}

fn tridiagonal_eigen(alpha: &[f64], beta: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let k = alpha.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = t.symmetric_eigen();
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}
