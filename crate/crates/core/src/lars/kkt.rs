use serde::Serialize;

use crate::data::ExpandedDesign;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoordinateCheck {
    pub index: usize,
    pub beta: f64,
    pub correlation: f64,
    /// Excess of the correlation over `λ`, relative to the starting `λ`.
    pub bound_violation: f64,
    /// Gap between the correlation and `λ` on the support, relative.
    pub equality_violation: f64,
}

/// Optimality certificate for a point of the positive lasso in expanded
/// space at penalty level `λ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KktReport {
    pub lambda: f64,
    pub tolerance: f64,
    /// `max_k x̃_kᵀ y`, the penalty at which the path starts.
    pub lambda_max: f64,
    pub coordinates: Vec<CoordinateCheck>,
    /// Original predictors with both expanded coefficients positive.
    pub pair_violations: Vec<usize>,
    /// Expanded coordinates with negative coefficients.
    pub negative: Vec<usize>,
    pub worst_violation: f64,
    pub pass: bool,
}

/// Check the optimality conditions of the lasso at `(β, λ)`: every expanded
/// correlation is at most `λ`, correlations on the support equal `λ`, and at
/// most one coefficient of each `±x_j` pair is positive.
///
/// Correlation gaps are measured relative to `λ_max`; coefficient conditions
/// relative to `max(1, ‖β‖∞)`.
pub fn kkt_certify(design: &ExpandedDesign, beta: &[f64], lambda: f64, tolerance: f64) -> KktReport {
    let p = design.p();
    let c = design.correlations(beta);
    let lambda_max = design
        .correlations_of(design.y())
        .iter()
        .copied()
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let beta_scale = beta.iter().fold(1.0f64, |m, b| m.max(b.abs()));

    let coordinates: Vec<CoordinateCheck> = (0..design.width())
        .map(|k| CoordinateCheck {
            index: k,
            beta: beta[k],
            correlation: c[k],
            bound_violation: ((c[k] - lambda) / lambda_max).max(0.0),
            equality_violation: if beta[k] > 0.0 {
                (c[k] - lambda).abs() / lambda_max
            } else {
                0.0
            },
        })
        .collect();
    let pair_violations: Vec<usize> = (0..p)
        .filter(|&j| beta[j].min(beta[j + p]) > tolerance * beta_scale)
        .collect();
    let negative: Vec<usize> = (0..2 * p)
        .filter(|&k| beta[k] < -tolerance * beta_scale)
        .collect();

    let mut worst = coordinates
        .iter()
        .map(|r| r.bound_violation.max(r.equality_violation))
        .fold(0.0, f64::max);
    for j in 0..p {
        worst = worst.max(beta[j].min(beta[j + p]).max(0.0) / beta_scale);
    }
    for &b in beta {
        worst = worst.max(-b / beta_scale);
    }
    KktReport {
        lambda,
        tolerance,
        lambda_max,
        coordinates,
        pair_violations,
        negative,
        worst_violation: worst,
        pass: worst <= tolerance,
    }
}
