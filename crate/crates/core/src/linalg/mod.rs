//! Dense linear-algebra kernels used by the path solvers.
//!
//! Matrices are `ndarray` arrays. The solvers here only ever see small active
//! sets (at most a few hundred columns), so everything is dense and direct.

mod cholesky;
mod lstsq;
mod nnls;

pub use cholesky::{factor_downdate, factor_update, CholeskyFactor};
pub use lstsq::solve_least_squares;
pub use nnls::{solve_nnls, solve_nnls_gram, solve_nnls_with, NnlsOptions};

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

/// Relative pivot threshold below which a column is treated as dependent.
pub const RANK_TOLERANCE: f64 = 1e-12;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `AᵀA` for a dense matrix.
pub fn gram(a: ArrayView2<f64>) -> Array2<f64> {
    a.t().dot(&a)
}

/// Principal submatrix `G[idx, idx]`.
pub fn submatrix(g: ArrayView2<f64>, idx: &[usize]) -> Array2<f64> {
    Array2::from_shape_fn((idx.len(), idx.len()), |(i, j)| g[[idx[i], idx[j]]])
}

pub fn select(v: ArrayView1<f64>, idx: &[usize]) -> Array1<f64> {
    idx.iter().map(|&i| v[i]).collect()
}

/// Inverse of a symmetric positive definite matrix via its Cholesky factor.
pub fn spd_inverse(g: ArrayView2<f64>) -> crate::Result<Array2<f64>> {
    let n = g.nrows();
    let factor = CholeskyFactor::factor(g)?;
    let mut inv = Array2::zeros((n, n));
    let mut e = vec![0.0; n];
    for j in 0..n {
        e.iter_mut().for_each(|v| *v = 0.0);
        e[j] = 1.0;
        let col = factor.solve(&e);
        for i in 0..n {
            inv[[i, j]] = col[i];
        }
    }
    Ok(inv)
}
