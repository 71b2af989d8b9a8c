use ndarray::{Array1, Array2, ArrayView1};

use super::{collapse, StandardizedDesign};

/// The `2p`-column design `[X : −X]`.
///
/// Column `p + j` is the negation of column `j`; it is never stored, the sign
/// is applied on access, so the pairing is exact.
#[derive(Debug, Clone)]
pub struct ExpandedDesign {
    base: StandardizedDesign,
}

impl ExpandedDesign {
    pub fn new(base: StandardizedDesign) -> Self {
        Self { base }
    }

    pub fn base(&self) -> &StandardizedDesign {
        &self.base
    }

    pub fn into_base(self) -> StandardizedDesign {
        self.base
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    /// Number of original predictors.
    pub fn p(&self) -> usize {
        self.base.p()
    }

    /// Number of expanded columns, `2p`.
    pub fn width(&self) -> usize {
        2 * self.base.p()
    }

    pub fn base_index(&self, k: usize) -> usize {
        k % self.p()
    }

    pub fn sign(&self, k: usize) -> f64 {
        if k < self.p() {
            1.0
        } else {
            -1.0
        }
    }

    /// Index of the paired column `∓x_j`.
    pub fn partner(&self, k: usize) -> usize {
        let p = self.p();
        if k < p {
            k + p
        } else {
            k - p
        }
    }

    pub fn column(&self, k: usize) -> Array1<f64> {
        let s = self.sign(k);
        self.base.xs().column(self.base_index(k)).mapv(|v| s * v)
    }

    pub fn y(&self) -> ArrayView1<'_, f64> {
        self.base.y_centered()
    }

    /// `X̃ β` for an expanded coefficient vector.
    pub fn fitted(&self, beta: &[f64]) -> Array1<f64> {
        self.base.fitted(collapse(beta).view())
    }

    pub fn residual(&self, beta: &[f64]) -> Array1<f64> {
        self.base.residual(collapse(beta).view())
    }

    /// `X̃ᵀ r`, from the `p` base inner products.
    pub fn correlations_of(&self, r: ArrayView1<f64>) -> Array1<f64> {
        self.expand_base(self.base.correlations(r))
    }

    /// Current correlations `X̃ᵀ(y − X̃β)`.
    pub fn correlations(&self, beta: &[f64]) -> Array1<f64> {
        self.correlations_of(self.residual(beta).view())
    }

    /// `X̃ᵀ X̃ ρ`, using the cached base Gram.
    pub fn gram_times(&self, rho: &[f64]) -> Array1<f64> {
        let d = collapse(rho);
        self.expand_base(self.base.gram().dot(&d))
    }

    pub fn gram_entry(&self, i: usize, k: usize) -> f64 {
        self.sign(i) * self.sign(k) * self.base.gram()[[self.base_index(i), self.base_index(k)]]
    }

    /// `X̃_Aᵀ X̃_A` for the given expanded columns.
    pub fn gram_submatrix(&self, idx: &[usize]) -> Array2<f64> {
        Array2::from_shape_fn((idx.len(), idx.len()), |(a, b)| {
            self.gram_entry(idx[a], idx[b])
        })
    }

    fn expand_base(&self, v: Array1<f64>) -> Array1<f64> {
        let neg = v.mapv(|x| -x);
        ndarray::concatenate![ndarray::Axis(0), v, neg]
    }

    /// Upper bound `‖y‖₂ · max_j ‖x_j‖₂` on any correlation; the natural scale
    /// for correlation tolerances.
    pub fn correlation_scale(&self) -> f64 {
        let y = self.y();
        let ynorm = y.dot(&y).sqrt();
        let xmax = (0..self.p())
            .map(|j| self.base.gram()[[j, j]])
            .fold(0.0f64, f64::max)
            .sqrt();
        ynorm * xmax
    }
}
