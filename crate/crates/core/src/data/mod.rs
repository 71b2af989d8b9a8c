//! Datasets, standardization, the expanded `[X : −X]` design and the
//! piecewise-linear path container.

mod dataset;
mod expanded;
mod path;

pub use dataset::{Dataset, StandardizedDesign};
pub use expanded::ExpandedDesign;
pub use path::{EventKind, IndexBy, IndexedPath, Method, Parametrization, PathEvent, PiecewiseLinearPath};

use ndarray::Array1;

/// Paired differences `β_j = β⁺_j − β⁻_j` of an expanded coefficient vector.
pub fn collapse(beta_expanded: &[f64]) -> Array1<f64> {
    assert!(
        beta_expanded.len().is_multiple_of(2),
        "expanded vector must have even length"
    );
    let p = beta_expanded.len() / 2;
    (0..p)
        .map(|j| beta_expanded[j] - beta_expanded[p + j])
        .collect()
}

/// Split a signed coefficient vector into its positive and negative parts.
pub fn expand(beta: &[f64]) -> Array1<f64> {
    let pos = beta.iter().map(|&b| b.max(0.0));
    let neg = beta.iter().map(|&b| (-b).max(0.0));
    pos.chain(neg).collect()
}

pub fn l1_norm(beta: &[f64]) -> f64 {
    beta.iter().map(|v| v.abs()).sum()
}
