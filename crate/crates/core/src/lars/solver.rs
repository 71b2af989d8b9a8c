use serde::{Deserialize, Serialize};

use super::direction::{band_width, least_squares_direction, nonnegative_direction, tie_band};
use super::event::EventSearch;
use super::MoveDirection;
use crate::data::{EventKind, ExpandedDesign, Method, Parametrization, PiecewiseLinearPath};
use crate::error::{Error, Result};
use crate::linalg::{norm2, CholeskyFactor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Least angle regression.
    Lar,
    /// LAR with coefficients dropped when they reach zero.
    Lasso,
    /// Infinitesimal forward stagewise: non-negative directions.
    Fs0,
}

impl Mode {
    pub fn method(self) -> Method {
        match self {
            Mode::Lar => Method::Lar,
            Mode::Lasso => Method::Lasso,
            Mode::Fs0 => Method::Fs0,
        }
    }

    pub fn parametrization(self) -> Parametrization {
        match self {
            Mode::Lar | Mode::Lasso => Parametrization::L1Norm,
            Mode::Fs0 => Parametrization::ArcLength,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub mode: Mode,
    /// Width of the maximal-correlation band, relative to the current maximum.
    pub tie_tolerance: f64,
    /// Correlations below this multiple of `‖y‖ max‖x_j‖` count as zero.
    pub correlation_tolerance: f64,
    /// Segment budget; `None` picks `16 (2p + N)`.
    pub max_steps: Option<usize>,
    /// Stop when the path parameter reaches this value.
    pub stop_l1_norm: Option<f64>,
    /// Stop when the maximal correlation falls to this value.
    pub stop_lambda: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Lasso,
            tie_tolerance: 1e-9,
            correlation_tolerance: 1e-12,
            max_steps: None,
            stop_l1_norm: None,
            stop_lambda: None,
        }
    }
}

impl SolverConfig {
    pub fn new(mode: Mode) -> Self {
        Self {
            mode,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("tie_tolerance", self.tie_tolerance),
            ("correlation_tolerance", self.correlation_tolerance),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("stop_l1_norm", self.stop_l1_norm), ("stop_lambda", self.stop_lambda)] {
            if let Some(v) = v {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::Config(format!("{name} must be non-negative, got {v}")));
                }
            }
        }
        if self.max_steps == Some(0) {
            return Err(Error::Config("max_steps must be at least 1".into()));
        }
        Ok(())
    }
}

/// A full fit on the active set ends the path once no correlation above this
/// fraction of the starting maximum remains.
const FULL_FIT_RESIDUAL: f64 = 1e-9;

/// Residuals below this fraction of `‖y‖` end the path (the `p ≥ N` case).
const ZERO_RESIDUAL: f64 = 1e-10;

/// Trace the exact piecewise-linear path of the configured mode from zero.
///
/// All three modes move along unit-L1 directions in expanded space, so the
/// path parameter grows by the step length at every event. LAR and the lasso
/// keep a persistent active set with an incrementally updated Cholesky factor
/// of its Gram matrix; forward stagewise re-solves a non-negative
/// least-squares problem on the current tie band at every vertex.
pub fn solve_path(design: &ExpandedDesign, config: &SolverConfig) -> Result<PiecewiseLinearPath> {
    config.validate()?;
    let width = design.width();
    let mode = config.mode;
    let floor = config.correlation_tolerance * design.correlation_scale();
    let y_norm = norm2(design.y().as_slice().expect("contiguous response"));
    let max_steps = config.max_steps.unwrap_or(16 * (width + design.n()));

    let mut path = PiecewiseLinearPath::new(mode.method(), mode.parametrization(), design.p());
    let mut beta = vec![0.0; width];
    let mut ell = 0.0;
    let mut active: Vec<usize> = Vec::new();
    let mut factor = CholeskyFactor::empty();
    let mut joined: Option<usize> = None;
    let mut dropped: Option<usize> = None;
    let c_start = design.correlations(&beta).iter().copied().fold(0.0, f64::max);

    loop {
        let residual = design.residual(&beta);
        if norm2(residual.as_slice().unwrap()) <= ZERO_RESIDUAL * y_norm {
            break;
        }
        let c = design.correlations_of(residual.view()).to_vec();
        let c_max = c.iter().copied().fold(0.0, f64::max);
        if c_max <= floor
            || config.stop_lambda.is_some_and(|l| c_max <= l)
            || config.stop_l1_norm.is_some_and(|s| ell >= s)
        {
            break;
        }
        if path.segments() >= max_steps {
            path.truncated = true;
            fill_max_correlations(design, &mut path);
            return Err(Error::StepBudget {
                steps: max_steps,
                partial: Box::new(path),
            });
        }

        let band = band_width(c_max, config.tie_tolerance, floor);
        let forced: Vec<usize> = joined.into_iter().collect();
        let candidates = tie_band(&c, band, &forced);
        let direction = match mode {
            Mode::Lar | Mode::Lasso => {
                for k in candidates {
                    if active.contains(&k) || active.contains(&design.partner(k)) || dropped == Some(k) {
                        continue;
                    }
                    let mut row: Vec<f64> = active.iter().map(|&i| design.gram_entry(i, k)).collect();
                    row.push(design.gram_entry(k, k));
                    match factor.append(&row) {
                        Ok(()) => active.push(k),
                        // already in the span of the active set, so it stays
                        // tied without moving
                        Err(Error::DegenerateDesign { detail, .. }) if !active.is_empty() => {
                            log::debug!("column {k} is dependent on the active set: {detail}");
                        }
                        Err(Error::DegenerateDesign { detail, .. }) => {
                            return Err(Error::DegenerateDesign {
                                column: design.base_index(k),
                                detail,
                            })
                        }
                        Err(other) => return Err(other),
                    }
                }
                least_squares_direction(width, active.clone(), &factor, &c)?
            }
            Mode::Fs0 => nonnegative_direction(design, candidates, &c).map_err(|e| {
                match e {
                    Error::DegenerateDesign { column, detail } => Error::DegenerateDesign {
                        column: design.base_index(column),
                        detail,
                    },
                    other => other,
                }
            })?,
        };
        if mode == Mode::Fs0 && direction.rho.iter().any(|&r| r < 0.0) {
            return Err(Error::InternalConsistency(
                "forward-stagewise direction has a negative component".into(),
            ));
        }

        let blocked = blocked_columns(design, &direction, dropped);
        let a = design.gram_times(&direction.rho).to_vec();
        let event = EventSearch {
            c: &c,
            a: &a,
            beta: &beta,
            direction: &direction,
            mode,
            blocked: &blocked,
            max_gamma: config.stop_l1_norm.map(|s| s - ell),
            stop_lambda: config.stop_lambda,
        }
        .find()?;
        log::debug!("{:?} step {}: {:?}", mode, path.segments(), event);

        for &k in &direction.support {
            beta[k] += event.gamma * direction.rho[k];
        }
        joined = None;
        dropped = None;
        match (event.kind, event.index) {
            (EventKind::Join, Some(j)) => joined = Some(j),
            (EventKind::HitZero, Some(k)) => {
                beta[k] = 0.0;
                let pos = active
                    .iter()
                    .position(|&i| i == k)
                    .ok_or_else(|| Error::InternalConsistency(format!("dropped column {k} is not active")))?;
                factor.remove(pos);
                active.remove(pos);
                dropped = Some(k);
            }
            _ => {}
        }
        ell += event.gamma;
        path.push(ell, beta.clone(), direction.support.clone(), Some(event));
        match event.kind {
            EventKind::EarlyStop => break,
            EventKind::FullLeastSquares => {
                let left = design.correlations(&beta).iter().copied().fold(0.0, f64::max);
                if left <= FULL_FIT_RESIDUAL * c_start {
                    break;
                }
                log::warn!("correlation {left:e} remains after the full fit on the active set; continuing");
            }
            _ => {}
        }
    }
    fill_max_correlations(design, &mut path);
    Ok(path)
}

fn blocked_columns(design: &ExpandedDesign, direction: &MoveDirection, dropped: Option<usize>) -> Vec<bool> {
    let mut blocked = vec![false; design.width()];
    for &k in &direction.active {
        blocked[k] = true;
    }
    // A resting member of the band may lose correlation faster than the moving
    // set, so only partners of moving columns are excluded.
    for &k in &direction.support {
        blocked[design.partner(k)] = true;
    }
    if let Some(k) = dropped {
        blocked[k] = true;
    }
    blocked
}

fn fill_max_correlations(design: &ExpandedDesign, path: &mut PiecewiseLinearPath) {
    path.max_correlations = path
        .vertices
        .iter()
        .map(|v| design.correlations(v).iter().copied().fold(0.0, f64::max))
        .collect();
}
