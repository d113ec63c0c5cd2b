//! Dense node feature matrices and the plain-text feature and label formats.

use std::io::{BufRead, Write};

use crate::error::{AgcError, Result};

/// Row-major `n x d` matrix of finite reals; row `i` is the feature vector of
/// node `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n: usize,
    d: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(n: usize, d: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * d {
            return Err(AgcError::validation(format!(
                "feature buffer has {} values, expected {n} x {d}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(AgcError::validation(format!(
                "non-finite feature at row {}, column {}",
                pos / d.max(1),
                pos % d.max(1)
            )));
        }
        Ok(FeatureMatrix { n, d, data })
    }

    pub(crate) fn from_raw_unchecked(n: usize, d: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), n * d);
        FeatureMatrix { n, d, data }
    }

    pub fn zeros(n: usize, d: usize) -> Self {
        FeatureMatrix {
            n,
            d,
            data: vec![0.0; n * d],
        }
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let d = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * d);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != d {
                return Err(AgcError::validation(format!(
                    "row {i} has {} columns, expected {d}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), d, data)
    }

    pub fn nrows(&self) -> usize {
        self.n
    }

    pub fn ncols(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        (0..self.n).map(move |i| self.row(i))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.d + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    /// Builds a matrix from column vectors of equal length.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let d = columns.len();
        let n = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != n) {
            return Err(AgcError::validation("columns have unequal lengths"));
        }
        let mut data = vec![0.0; n * d];
        for (j, c) in columns.iter().enumerate() {
            for (i, &v) in c.iter().enumerate() {
                data[i * d + j] = v;
            }
        }
        Self::new(n, d, data)
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        FeatureMatrix {
            n: self.n,
            d: self.d,
            data: self.data.iter().map(|v| alpha * v).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Rows reordered so that row `i` of the result is row `perm[i]` here.
    pub fn permute_rows(&self, perm: &[usize]) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for &p in perm {
            data.extend_from_slice(self.row(p));
        }
        FeatureMatrix {
            n: perm.len(),
            d: self.d,
            data,
        }
    }

    /// Parses headerless comma-separated rows of decimal floats.
    pub fn read_csv<R: BufRead>(source: R) -> Result<Self> {
        let mut data = Vec::new();
        let mut d: Option<usize> = None;
        let mut n = 0;
        for (lineno, line) in source.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let before = data.len();
            for tok in trimmed.split(',') {
                let tok = tok.trim();
                let v: f64 = tok
                    .parse()
                    .map_err(|_| AgcError::parse(lineno + 1, format!("invalid number {tok:?}")))?;
                if !v.is_finite() {
                    return Err(AgcError::parse(lineno + 1, "non-finite feature value"));
                }
                data.push(v);
            }
            let cols = data.len() - before;
            match d {
                None => d = Some(cols),
                Some(expected) if expected != cols => {
                    return Err(AgcError::parse(
                        lineno + 1,
                        format!("expected {expected} columns, found {cols}"),
                    ))
                }
                _ => {}
            }
            n += 1;
        }
        Ok(FeatureMatrix {
            n,
            d: d.unwrap_or(0),
            data,
        })
    }

    /// Writes rows as comma-separated values using the shortest decimal
    /// representation that parses back to the identical `f64`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let mut line = String::new();
        for row in self.rows() {
            line.clear();
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    line.push(',');
                }
                line.push_str(&v.to_string());
            }
            line.push('\n');
            out.write_all(line.as_bytes())?;
        }
        Ok(())
    }
}

/// Reads one integer label per non-blank line.
pub fn read_labels<R: BufRead>(source: R) -> Result<Vec<i64>> {
    let mut labels = Vec::new();
    for (lineno, line) in source.lines().enumerate() {
        let line = line?;
        let tok = line.trim();
        if tok.is_empty() {
            continue;
        }
        labels.push(
            tok.parse()
                .map_err(|_| AgcError::parse(lineno + 1, format!("invalid label {tok:?}")))?,
        );
    }
    Ok(labels)
}

pub fn write_labels<W: Write>(labels: &[usize], mut out: W) -> Result<()> {
    let mut buf = String::with_capacity(labels.len() * 3);
    for l in labels {
        buf.push_str(&l.to_string());
        buf.push('\n');
    }
    out.write_all(buf.as_bytes())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let x =
            FeatureMatrix::from_rows(&[[0.1, -2.5e-300, 3.0], [1.0 / 3.0, 0.0, -7.25]]).unwrap();
        let mut buf = Vec::new();
        x.write_csv(&mut buf).unwrap();
        let y = FeatureMatrix::read_csv(buf.as_slice()).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn ragged_csv_rejected() {
        let err = FeatureMatrix::read_csv("1,2\n3\n".as_bytes()).unwrap_err();
        assert!(matches!(err, AgcError::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn non_finite_rejected() {
        assert!(FeatureMatrix::read_csv("1,NaN\n".as_bytes()).is_err());
        assert!(FeatureMatrix::new(1, 2, vec![1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn labels_parse() {
        assert_eq!(
            read_labels("3\n-1\n\n0\n".as_bytes()).unwrap(),
            vec![3, -1, 0]
        );
        assert!(read_labels("1\nfoo\n".as_bytes()).is_err());
    }

    #[test]
    fn columns_and_rows_agree() {
        let x = FeatureMatrix::from_columns(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert_eq!(x.row(0), &[1.0, 3.0]);
        assert_eq!(x.column(1), vec![3.0, 4.0]);
    }
}
