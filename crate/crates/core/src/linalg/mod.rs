//! Linear algebra kernels: sparse storage, chain eigensolvers, a dense
//! fallback for matrices without chain structure, and quadrature.

pub mod chain;
pub mod quadrature;
pub mod sparse;

pub use chain::{ChainMatrix, EigenRows, Sturm};
pub use sparse::CsrMatrix;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Largest dimension for which a dense eigendecomposition is attempted.
pub const DENSE_CAP: usize = 4096;

/// Largest dimension accepted by the chain eigenvalue path.
pub const CHAIN_CAP: usize = 1 << 18;

/// Eigenvalues and eigenvector components at `rows` of a symmetric matrix.
///
/// Chain-structured matrices use the O(n^2) chain solver; anything else goes
/// through a dense eigendecomposition capped at `DENSE_CAP`.
pub fn eigen_rows(h: &CsrMatrix, rows: &[usize]) -> Result<EigenRows> {
    let n = h.dim();
    if let Some(chain) = h.as_chain() {
        if n > CHAIN_CAP {
            return Err(Error::DenseCapExceeded { dim: n, cap: CHAIN_CAP });
        }
        return chain.eigen_rows(rows);
    }
    let (values, vectors) = dense_eigen(h)?;
    let components = rows
        .iter()
        .map(|&r| {
            if r >= n {
                Err(Error::IndexOutOfRange { index: r, len: n })
            } else {
                Ok((0..n).map(|j| vectors[(r, j)]).collect())
            }
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    Ok(EigenRows {
        values,
        rows: rows.to_vec(),
        components,
    })
}

/// All eigenvalues, ascending.
pub fn eigenvalues(h: &CsrMatrix) -> Result<Vec<f64>> {
    match h.as_chain() {
        Some(_) if h.dim() > CHAIN_CAP => Err(Error::DenseCapExceeded {
            dim: h.dim(),
            cap: CHAIN_CAP,
        }),
        Some(chain) => chain.eigenvalues(),
        None => Ok(dense_eigen(h)?.0),
    }
}

/// Full dense eigendecomposition with eigenvalues sorted ascending and the
/// eigenvector columns permuted to match.
pub fn dense_eigen(h: &CsrMatrix) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = h.dim();
    if n > DENSE_CAP {
        return Err(Error::DenseCapExceeded { dim: n, cap: DENSE_CAP });
    }
    h.ensure_hermitian()?;
    Ok(sorted_symmetric_eigen(h.to_dense()))
}

pub(crate) fn sorted_symmetric_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    let eig = m.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}
