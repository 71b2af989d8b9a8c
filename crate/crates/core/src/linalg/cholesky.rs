use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

/// Lower-triangular Cholesky factor `L` of a Gram matrix `G = L·Lᵀ`.
///
/// Rows are stored packed (row `i` holds `i + 1` entries), which makes
/// appending a column to the factored set a push and keeps removal local.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CholeskyFactor {
    rows: Vec<Vec<f64>>,
}

impl CholeskyFactor {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Factor a full symmetric positive definite matrix.
    pub fn factor(g: ArrayView2<f64>) -> Result<Self> {
        if g.nrows() != g.ncols() {
            return Err(Error::Dimension(format!(
                "Gram matrix is {}x{}",
                g.nrows(),
                g.ncols()
            )));
        }
        let mut f = Self::empty();
        let mut row = Vec::with_capacity(g.nrows());
        for k in 0..g.nrows() {
            row.clear();
            row.extend((0..=k).map(|j| g[[k, j]]));
            f.append(&row)?;
        }
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if j > i {
            0.0
        } else {
            self.rows[i][j]
        }
    }

    pub fn diagonal(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().enumerate().map(|(i, r)| r[i])
    }

    /// Grow the factored matrix by one row/column.
    ///
    /// `gram_row` holds the new column's inner products with the existing
    /// columns (in factor order) followed by its squared norm.
    pub fn append(&mut self, gram_row: &[f64]) -> Result<()> {
        let n = self.dim();
        if gram_row.len() != n + 1 {
            return Err(Error::Dimension(format!(
                "gram row of length {} for a factor of dimension {n}",
                gram_row.len()
            )));
        }
        if gram_row.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("gram row"));
        }
        let mut new_row = self.forward_substitute(&gram_row[..n]);
        let diag_sq = gram_row[n] - new_row.iter().map(|v| v * v).sum::<f64>();
        let scale = self
            .diagonal()
            .map(|d| d * d)
            .fold(gram_row[n].abs(), f64::max);
        if !(diag_sq > super::RANK_TOLERANCE * scale) {
            return Err(Error::DegenerateDesign {
                column: n,
                detail: format!("Cholesky pivot {diag_sq:e} relative to {scale:e}"),
            });
        }
        new_row.push(diag_sq.sqrt());
        self.rows.push(new_row);
        Ok(())
    }

    /// Delete row/column `k` of the factored matrix, restoring triangularity
    /// with Givens rotations on the trailing columns.
    pub fn remove(&mut self, k: usize) {
        assert!(k < self.dim(), "remove index {k} out of range");
        self.rows.remove(k);
        let n = self.dim();
        // Rows k.. now carry one entry past the diagonal.
        for i in k..n {
            let a = self.rows[i][i];
            let b = self.rows[i][i + 1];
            let r = a.hypot(b);
            let (c, s) = if r == 0.0 { (1.0, 0.0) } else { (a / r, b / r) };
            for t in i..n {
                let x = self.rows[t][i];
                let y = self.rows[t][i + 1];
                self.rows[t][i] = c * x + s * y;
                self.rows[t][i + 1] = -s * x + c * y;
            }
            self.rows[i][i] = r;
            self.rows[i].truncate(i + 1);
        }
    }

    /// Solve `L y = b`.
    pub fn forward_substitute(&self, b: &[f64]) -> Vec<f64> {
        let mut y = Vec::with_capacity(b.len());
        for (i, row) in self.rows.iter().enumerate() {
            let s: f64 = row[..i].iter().zip(&y).map(|(l, v)| l * v).sum();
            y.push((b[i] - s) / row[i]);
        }
        y
    }

    /// Solve `L Lᵀ x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(b.len(), n, "right-hand side length");
        let mut x = self.forward_substitute(b);
        for i in (0..n).rev() {
            let mut s = x[i];
            for t in i + 1..n {
                s -= self.rows[t][i] * x[t];
            }
            x[i] = s / self.rows[i][i];
        }
        x
    }

    pub fn lower(&self) -> Array2<f64> {
        let n = self.dim();
        Array2::from_shape_fn((n, n), |(i, j)| self.entry(i, j))
    }

    /// `L Lᵀ`.
    pub fn reconstruct(&self) -> Array2<f64> {
        let l = self.lower();
        l.dot(&l.t())
    }
}

/// Factor of the Gram matrix augmented by one column.
pub fn factor_update(mut factor: CholeskyFactor, new_column_gram_row: &[f64]) -> Result<CholeskyFactor> {
    factor.append(new_column_gram_row)?;
    Ok(factor)
}

/// Factor of the Gram matrix with column `k` deleted.
pub fn factor_downdate(mut factor: CholeskyFactor, k: usize) -> CholeskyFactor {
    factor.remove(k);
    factor
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
        (a - b).iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    #[test]
    fn identity_grows_block_diagonal() {
        let f = CholeskyFactor::factor(Array2::<f64>::eye(3).view()).unwrap();
        let f = factor_update(f, &[0.0, 0.0, 0.0, 4.0]).unwrap();
        let mut expected = Array2::<f64>::eye(4);
        expected[[3, 3]] = 2.0;
        assert_eq!(f.lower(), expected);
    }

    #[test]
    fn remove_then_append_restores() {
        let g = array![[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 2.0]];
        let f = CholeskyFactor::factor(g.view()).unwrap();
        let down = factor_downdate(f.clone(), 2);
        let back = factor_update(down, &[0.5, 0.2, 2.0]).unwrap();
        assert!(max_abs_diff(&back.lower(), &f.lower()) < 1e-12);
    }

    #[test]
    fn remove_interior_matches_refactorization() {
        let g = array![
            [5.0, 1.0, 0.5, 0.3],
            [1.0, 4.0, 0.2, 0.1],
            [0.5, 0.2, 3.0, 0.4],
            [0.3, 0.1, 0.4, 2.0]
        ];
        let mut f = CholeskyFactor::factor(g.view()).unwrap();
        f.remove(1);
        let keep = [0, 2, 3];
        let sub = crate::linalg::submatrix(g.view(), &keep);
        let fresh = CholeskyFactor::factor(sub.view()).unwrap();
        assert!(max_abs_diff(&f.lower(), &fresh.lower()) < 1e-12);
        assert!(f.diagonal().all(|d| d > 0.0));
    }

    #[test]
    fn dependent_column_is_rejected() {
        let f = CholeskyFactor::factor(array![[1.0, 0.5], [0.5, 1.0]].view()).unwrap();
        // third column equals the first
        let err = factor_update(f, &[1.0, 0.5, 1.0]).unwrap_err();
        assert!(matches!(err, Error::DegenerateDesign { column: 2, .. }));
    }

    #[test]
    fn solve_round_trips() {
        let g = array![[4.0, 1.0], [1.0, 3.0]];
        let f = CholeskyFactor::factor(g.view()).unwrap();
        let x = f.solve(&[1.0, 2.0]);
        let b = g.dot(&ndarray::arr1(&x));
        assert!((b[0] - 1.0).abs() < 1e-14 && (b[1] - 2.0).abs() < 1e-14);
    }
}
