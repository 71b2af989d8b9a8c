use crate::data::ExpandedDesign;
use crate::error::{Error, Result};
use crate::linalg::{solve_nnls_gram, CholeskyFactor, NnlsOptions};

/// Unit-L1 direction of motion in expanded space.
///
/// `active` is the set of maximally correlated columns the direction was
/// computed from and `support` the columns that actually move. For the lasso
/// they coincide; the non-negative fit may leave active columns at rest.
#[derive(Debug, Clone, PartialEq)]
pub struct MoveDirection {
    pub rho: Vec<f64>,
    pub active: Vec<usize>,
    pub support: Vec<usize>,
}

impl MoveDirection {
    pub fn zero(width: usize) -> Self {
        Self {
            rho: vec![0.0; width],
            active: Vec::new(),
            support: Vec::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }
}

/// Columns whose correlation is within the tie band of the maximum, plus any
/// `forced` columns, in increasing index order.
pub(crate) fn tie_band(c: &[f64], band: f64, forced: &[usize]) -> Vec<usize> {
    let cmax = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<usize> = (0..c.len())
        .filter(|&k| c[k] >= cmax - band || forced.contains(&k))
        .collect();
    out.dedup();
    out
}

pub(crate) fn band_width(c_max: f64, tie: f64, floor: f64) -> f64 {
    (tie * c_max).max(floor)
}

/// Normalize the fitted coefficients `theta` on `active` into a direction.
pub(crate) fn normalize(width: usize, active: Vec<usize>, theta: &[f64]) -> Result<MoveDirection> {
    let total: f64 = theta.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::InternalConsistency(format!(
            "move direction has non-positive total weight {total}"
        )));
    }
    let mut rho = vec![0.0; width];
    let mut support = Vec::new();
    for (&k, &t) in active.iter().zip(theta) {
        if t != 0.0 {
            rho[k] = t / total;
            support.push(k);
        }
    }
    Ok(MoveDirection { rho, active, support })
}

/// Least-squares direction of the residual on the maximally correlated
/// columns, from an existing factor of their Gram matrix.
pub(crate) fn least_squares_direction(
    width: usize,
    active: Vec<usize>,
    factor: &CholeskyFactor,
    c: &[f64],
) -> Result<MoveDirection> {
    let rhs: Vec<f64> = active.iter().map(|&k| c[k]).collect();
    let theta = factor.solve(&rhs);
    normalize(width, active, &theta)
}

pub(crate) fn nonnegative_direction(
    design: &ExpandedDesign,
    active: Vec<usize>,
    c: &[f64],
) -> Result<MoveDirection> {
    let g = design.gram_submatrix(&active);
    let rhs: ndarray::Array1<f64> = active.iter().map(|&k| c[k]).collect();
    let theta = solve_nnls_gram(g.view(), rhs.view(), NnlsOptions::default())
        .map_err(|e| name_column(e, &active))?;
    normalize(design.width(), active, theta.as_slice().unwrap())
}

/// Translate a column position within `active` into an expanded index.
pub(crate) fn name_column(e: Error, active: &[usize]) -> Error {
    match e {
        Error::DegenerateDesign { column, detail } if column < active.len() => {
            Error::DegenerateDesign {
                column: active[column],
                detail,
            }
        }
        other => other,
    }
}

const DEFAULT_TIE: f64 = 1e-9;
const DEFAULT_FLOOR: f64 = 1e-12;

fn current_band(design: &ExpandedDesign, beta: &[f64]) -> Result<Option<(Vec<f64>, Vec<usize>)>> {
    if beta.len() != design.width() {
        return Err(Error::Dimension(format!(
            "coefficient vector has length {}, expected {}",
            beta.len(),
            design.width()
        )));
    }
    if beta.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("coefficients"));
    }
    let c = design.correlations(beta).to_vec();
    let scale = design.correlation_scale();
    let cmax = c.iter().copied().fold(0.0, f64::max);
    if cmax <= DEFAULT_FLOOR * scale {
        return Ok(None);
    }
    let band = band_width(cmax, DEFAULT_TIE, DEFAULT_FLOOR * scale);
    let active = tie_band(&c, band, &[]);
    Ok(Some((c, active)))
}

/// Lasso direction at `beta`: least-squares coefficients of the residual on
/// the maximally correlated expanded columns, scaled to unit L1 norm.
///
/// Returns the zero direction when all correlations vanish.
pub fn lasso_move_direction(design: &ExpandedDesign, beta: &[f64]) -> Result<MoveDirection> {
    let Some((c, active)) = current_band(design, beta)? else {
        return Ok(MoveDirection::zero(design.width()));
    };
    let factor = CholeskyFactor::factor(design.gram_submatrix(&active).view())
        .map_err(|e| name_column(e, &active))?;
    least_squares_direction(design.width(), active, &factor, &c)
}

/// Forward-stagewise direction at `beta`: non-negative least-squares
/// coefficients of the residual on the maximally correlated expanded
/// columns, scaled to unit L1 norm. Columns with a zero coefficient are not
/// part of the support.
pub fn monotone_move_direction(design: &ExpandedDesign, beta: &[f64]) -> Result<MoveDirection> {
    let Some((c, active)) = current_band(design, beta)? else {
        return Ok(MoveDirection::zero(design.width()));
    };
    nonnegative_direction(design, active, &c)
}
