use ndarray::{Array1, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::data::{collapse, l1_norm, ExpandedDesign, IndexBy, IndexedPath, PiecewiseLinearPath, StandardizedDesign};
use crate::error::{Error, Result};
use crate::stagewise::{fs_epsilon, StagewiseConfig};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub index: f64,
    pub value: f64,
}

/// `n` evenly spaced values from `0` to `hi`.
fn grid(hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![hi],
        _ => (0..n).map(|i| hi * i as f64 / (n - 1) as f64).collect(),
    }
}

fn rss_of(design: &ExpandedDesign, beta: &Array1<f64>) -> f64 {
    design.base().rss(beta.view())
}

/// Residual sum of squares along the path at `grid` evenly spaced values of
/// the chosen index, from zero to the largest value the path reaches.
pub fn rss_profile(design: &ExpandedDesign, path: &PiecewiseLinearPath, by: IndexBy, grid_size: usize) -> Vec<CurvePoint> {
    let indexed = IndexedPath::new(path, by);
    grid(indexed.max_value(), grid_size)
        .into_iter()
        .filter_map(|v| {
            let b = indexed.collapsed_at(v)?;
            Some(CurvePoint {
                index: v,
                value: rss_of(design, &b),
            })
        })
        .collect()
}

/// RSS where the index first reaches `value`.
pub fn rss_at(design: &ExpandedDesign, path: &PiecewiseLinearPath, by: IndexBy, value: f64) -> Option<f64> {
    IndexedPath::new(path, by).collapsed_at(value).map(|b| rss_of(design, &b))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathComparison {
    pub index: IndexBy,
    /// Upper end of the common index range.
    pub range: f64,
    /// `sup ‖a − b‖∞` over the compared grid, in collapsed coordinates.
    pub sup_difference: f64,
    /// Smallest index value at which the paths differ by more than
    /// [`DIVERGENCE_THRESHOLD`].
    pub divergence: Option<f64>,
}

pub const DIVERGENCE_THRESHOLD: f64 = 1e-8;

/// Compare two paths on their common index range.
///
/// Both paths are evaluated at every vertex index value of either path (and
/// the midpoints between consecutive ones); the divergence point is refined
/// by bisection.
pub fn compare_paths(a: &PiecewiseLinearPath, b: &PiecewiseLinearPath, by: IndexBy) -> Result<PathComparison> {
    if a.p != b.p {
        return Err(Error::Dimension(format!("paths over {} and {} predictors", a.p, b.p)));
    }
    let (ia, ib) = (IndexedPath::new(a, by), IndexedPath::new(b, by));
    let range = ia.max_value().min(ib.max_value());
    let mut points: Vec<f64> = ia
        .vertex_values()
        .iter()
        .chain(ib.vertex_values())
        .copied()
        .filter(|&v| v <= range)
        .collect();
    points.push(range);
    points.sort_by(f64::total_cmp);
    points.dedup();
    let mut grid = Vec::with_capacity(2 * points.len());
    for w in points.windows(2) {
        grid.push(w[0]);
        grid.push(0.5 * (w[0] + w[1]));
    }
    grid.extend(points.last());

    let diff = |v: f64| -> f64 {
        match (ia.collapsed_at(v), ib.collapsed_at(v)) {
            (Some(x), Some(y)) => x.iter().zip(&y).fold(0.0, |m, (p, q)| m.max((p - q).abs())),
            _ => 0.0,
        }
    };
    let mut sup: f64 = 0.0;
    let mut divergence = None;
    let mut prev = 0.0;
    for &v in &grid {
        let d = diff(v);
        sup = sup.max(d);
        if divergence.is_none() && d > DIVERGENCE_THRESHOLD {
            let (mut lo, mut hi) = (prev, v);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if diff(mid) > DIVERGENCE_THRESHOLD {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            divergence = Some(hi);
        }
        prev = v;
    }
    Ok(PathComparison {
        index: by,
        range,
        sup_difference: sup,
        divergence,
    })
}

/// Total variation of the path up to the point where the collapsed L1 norm
/// first reaches `norm`.
pub fn total_variation_at_norm(path: &PiecewiseLinearPath, norm: f64) -> Option<f64> {
    let ell = IndexedPath::new(path, IndexBy::Norm).position(norm)?;
    path.arc_length(ell).ok()
}

pub fn final_norm(path: &PiecewiseLinearPath) -> f64 {
    l1_norm(collapse(path.last_vertex()).as_slice().unwrap())
}

/// Holdout mean squared error along the path at evenly spaced fractions of
/// the final L1 norm.
///
/// Predictions use the training centering and scaling; `target` is compared
/// directly, so passing noise-free means measures estimation error only.
pub fn test_mse(
    design: &StandardizedDesign,
    path: &PiecewiseLinearPath,
    x_holdout: ArrayView2<f64>,
    target: ArrayView1<f64>,
    grid_size: usize,
) -> Result<Vec<CurvePoint>> {
    if x_holdout.ncols() != design.p() || x_holdout.nrows() != target.len() {
        return Err(Error::Dimension(format!(
            "holdout is {}x{} with {} targets, design has {} predictors",
            x_holdout.nrows(),
            x_holdout.ncols(),
            target.len(),
            design.p()
        )));
    }
    let indexed = IndexedPath::new(path, IndexBy::Norm);
    let total = final_norm(path);
    let mut out = Vec::with_capacity(grid_size);
    for fraction in grid(1.0, grid_size) {
        let Some(beta) = indexed.collapsed_at(fraction * total) else {
            continue;
        };
        let pred = design.predict(x_holdout, beta.view());
        let mse = pred
            .iter()
            .zip(target)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / target.len() as f64;
        out.push(CurvePoint {
            index: fraction,
            value: mse,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub steps: usize,
    pub truncated: bool,
    /// Sup distance to the reference path at matched arc-length.
    pub sup_distance: f64,
}

/// Run incremental stagewise at each `ε` and measure its distance to a
/// reference (forward-stagewise) path at matched arc-length.
pub fn epsilon_sweep(
    design: &StandardizedDesign,
    reference: &PiecewiseLinearPath,
    epsilons: &[f64],
    base: &StagewiseConfig,
) -> Result<Vec<SweepRow>> {
    epsilons
        .iter()
        .map(|&epsilon| {
            let config = StagewiseConfig {
                epsilon,
                ..base.clone()
            };
            let path = fs_epsilon(design, &config)?;
            let cmp = compare_paths(&path, reference, IndexBy::ArcLength)?;
            Ok(SweepRow {
                epsilon,
                steps: (path.end() / epsilon).round() as usize,
                truncated: path.truncated,
                sup_distance: cmp.sup_difference,
            })
        })
        .collect()
}

/// Halving sequence `ε, ε/2, …` of the given length.
pub fn halving(epsilon: f64, levels: usize) -> Vec<f64> {
    (0..levels).map(|k| epsilon / f64::powi(2.0, k as i32)).collect()
}
