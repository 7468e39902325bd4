use crate::error::{ForestError, Result};

/// Dense row-major design matrix with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    data: Vec<f64>,
    n: usize,
    d: usize,
}

impl Matrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(ForestError::EmptyInput);
        }
        let d = rows[0].len();
        if d == 0 {
            return Err(ForestError::NoFeatures);
        }
        let mut data = Vec::with_capacity(n * d);
        for r in rows {
            if r.len() != d {
                return Err(ForestError::DimensionMismatch {
                    expected: d,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::from_flat(data, n, d)
    }

    pub fn from_flat(data: Vec<f64>, n: usize, d: usize) -> Result<Self> {
        if n == 0 {
            return Err(ForestError::EmptyInput);
        }
        if d == 0 {
            return Err(ForestError::NoFeatures);
        }
        if data.len() != n * d {
            return Err(ForestError::DimensionMismatch {
                expected: n * d,
                got: data.len(),
            });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(ForestError::NonFinite {
                row: i / d,
                col: i % d,
            });
        }
        Ok(Self { data, n, d })
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn n_cols(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.d + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.d)
    }

    /// Same rows with columns reordered so that new column `j` is old column `perm[j]`.
    pub fn permute_columns(&self, perm: &[usize]) -> Self {
        let data = self
            .rows()
            .flat_map(|r| perm.iter().map(move |&j| r[j]))
            .collect();
        Self { data, n: self.n, d: perm.len() }
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let data = idx.iter().flat_map(|&i| self.row(i).iter().copied()).collect();
        Self { data, n: idx.len(), d: self.d }
    }
}

pub(crate) fn check_targets(y: &[f64], n: usize) -> Result<()> {
    if y.len() != n {
        return Err(ForestError::DimensionMismatch {
            expected: n,
            got: y.len(),
        });
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(ForestError::NonFinite { row: i, col: 0 });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(matches!(Matrix::from_rows(&[]), Err(ForestError::EmptyInput)));
        assert!(matches!(Matrix::from_rows(&[vec![]]), Err(ForestError::NoFeatures)));
        assert!(matches!(
            Matrix::from_rows(&[vec![1.0, 2.0], vec![1.0]]),
            Err(ForestError::DimensionMismatch { expected: 2, got: 1 })
        ));
        assert!(matches!(
            Matrix::from_rows(&[vec![1.0, 2.0], vec![1.0, f64::NAN]]),
            Err(ForestError::NonFinite { row: 1, col: 1 })
        ));
    }

    #[test]
    fn permute_and_select() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0]]).unwrap();
        let p = m.permute_columns(&[2, 0, 1]);
        assert_eq!(p.row(1), &[6.0, 4.0, 5.0]);
        let s = m.select_rows(&[1, 1, 0]);
        assert_eq!(s.n_rows(), 3);
        assert_eq!(s.row(0), &[4.0, 5.0, 6.0]);
    }
}
