//! Compressed-row storage for real symmetric Hamiltonians.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::chain::ChainMatrix;
use crate::error::{Error, Result};

/// Square sparse matrix in compressed-row form. Columns within a row are
/// sorted and unique; explicit zeros are dropped at assembly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Assembles from coordinate triplets. Duplicate entries are summed.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sorted = triplets.to_vec();
        for &(r, c, v) in &sorted {
            if r >= n || c >= n {
                return Err(Error::InvalidParameter(format!(
                    "triplet ({r}, {c}) outside a {n}x{n} matrix"
                )));
            }
            if !v.is_finite() {
                return Err(Error::InvalidParameter(format!("non-finite entry at ({r}, {c})")));
            }
        }
        sorted.sort_by_key(|&(r, c, _)| (r, c));

        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        let mut rows = Vec::with_capacity(sorted.len());
        for (r, c, v) in sorted {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                rows.push(r);
                col_idx.push(c);
                values.push(v);
                last = Some((r, c));
            }
        }
        let mut keep_cols = Vec::with_capacity(col_idx.len());
        let mut keep_vals = Vec::with_capacity(values.len());
        for ((r, c), v) in rows.into_iter().zip(col_idx).zip(values) {
            if v != 0.0 {
                row_ptr[r + 1] += 1;
                keep_cols.push(c);
                keep_vals.push(v);
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Ok(Self {
            n,
            row_ptr,
            col_idx: keep_cols,
            values: keep_vals,
        })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            row_ptr: vec![0; n + 1],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[span.clone()].binary_search(&j) {
            Ok(k) => self.values[span.start + k],
            Err(_) => 0.0,
        }
    }

    /// All stored entries in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            *yi = acc;
        }
    }

    /// First entry whose transpose partner differs bit-for-bit, if any.
    pub fn asymmetry(&self) -> Option<(usize, usize)> {
        self.triplets()
            .find(|&(i, j, v)| self.get(j, i).to_bits() != v.to_bits())
            .map(|(i, j, _)| (i, j))
    }

    pub fn ensure_hermitian(&self) -> Result<()> {
        match self.asymmetry() {
            Some((row, col)) => Err(Error::NotHermitian { row, col }),
            None => Ok(()),
        }
    }

    /// Maximum absolute row sum, an upper bound on the spectral norm of a
    /// symmetric matrix.
    pub fn row_sum_norm(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (i, j, v) in self.triplets() {
            m[(i, j)] = v;
        }
        m
    }

    /// Principal submatrix on `keep` (indices in the new ordering).
    pub fn principal_submatrix(&self, keep: &[usize]) -> Self {
        let mut map = vec![usize::MAX; self.n];
        for (new, &old) in keep.iter().enumerate() {
            map[old] = new;
        }
        let mut triplets = Vec::new();
        for (new_i, &old_i) in keep.iter().enumerate() {
            for (old_j, v) in self.row(old_i) {
                let new_j = map[old_j];
                if new_j != usize::MAX {
                    triplets.push((new_i, new_j, v));
                }
            }
        }
        Self::from_triplets(keep.len(), &triplets).expect("indices remapped in range")
    }

    /// `D (A - shift I) D` for a diagonal `D`.
    pub fn shifted_congruence(&self, shift: f64, diag: &[f64]) -> Self {
        let mut triplets: Vec<(usize, usize, f64)> = self
            .triplets()
            .map(|(i, j, v)| (i, j, (diag[i] * diag[j]) * v))
            .collect();
        for (i, d) in diag.iter().enumerate() {
            triplets.push((i, i, -shift * d * d));
        }
        Self::from_triplets(self.n, &triplets).expect("same shape")
    }

    /// Views the matrix as a (possibly periodic) symmetric tridiagonal chain
    /// when its sparsity allows it.
    pub fn as_chain(&self) -> Option<ChainMatrix> {
        let n = self.n;
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n.saturating_sub(1)];
        let mut corner = 0.0;
        for (i, j, v) in self.triplets() {
            if i == j {
                diag[i] = v;
            } else if j == i + 1 {
                off[i] = v;
            } else if i == j + 1 {
                if self.get(j, i) != v {
                    return None;
                }
            } else if n >= 3 && i == n - 1 && j == 0 {
                corner = v;
            } else if n >= 3 && i == 0 && j == n - 1 {
                if self.get(n - 1, 0) != v {
                    return None;
                }
            } else {
                return None;
            }
        }
        Some(ChainMatrix::new(diag, off, corner))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed_and_zeros_dropped() {
        let m = CsrMatrix::from_triplets(3, &[(0, 1, 1.0), (0, 1, 2.0), (2, 2, 0.0)]).unwrap();
        assert_eq!(m.get(0, 1), 3.0);
        assert_eq!(m.nnz(), 1);
    }

    #[test]
    fn out_of_range_triplet_rejected() {
        assert!(CsrMatrix::from_triplets(2, &[(2, 0, 1.0)]).is_err());
    }

    #[test]
    fn matvec_matches_dense() {
        let m = CsrMatrix::from_triplets(3, &[(0, 1, 2.0), (1, 0, 2.0), (2, 2, -1.0)]).unwrap();
        let mut y = vec![0.0; 3];
        m.matvec(&[1.0, 2.0, 3.0], &mut y);
        assert_eq!(y, vec![4.0, 2.0, -3.0]);
    }

    #[test]
    fn chain_detection() {
        let ring = CsrMatrix::from_triplets(4, &[(0, 1, 1.0), (1, 0, 1.0), (3, 0, 2.0), (0, 3, 2.0)]).unwrap();
        let c = ring.as_chain().unwrap();
        assert_eq!(c.corner(), 2.0);
        let long = CsrMatrix::from_triplets(4, &[(0, 2, 1.0), (2, 0, 1.0)]).unwrap();
        assert!(long.as_chain().is_none());
    }
}
