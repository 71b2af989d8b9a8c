use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::data::{ExpandedDesign, Method, Parametrization, PiecewiseLinearPath, StandardizedDesign};
use crate::error::{Error, Result};
use crate::lars::{band_width, normalize, tie_band, MoveDirection};
use crate::linalg::{norm2, solve_nnls_gram, CholeskyFactor, NnlsOptions};
use crate::loss::LossModel;

/// Weights at or below this value make the local quadratic model singular.
const MIN_CURVATURE: f64 = 1e-12;
const TIE: f64 = 1e-9;

/// The response a loss is fitted to: centered for squared error, raw for
/// losses with a bounded response domain.
pub fn default_response(design: &ExpandedDesign, loss: &dyn LossModel) -> Array1<f64> {
    if loss.uses_centered_response() {
        design.y().to_owned()
    } else {
        design.base().y().to_owned()
    }
}

/// `Σ_i l(y_i, x̃_iᵀβ)`.
pub fn total_loss(design: &ExpandedDesign, beta: &[f64], loss: &dyn LossModel, response: ArrayView1<f64>) -> f64 {
    loss.total(response, design.fitted(beta).view())
}

fn check_response(design: &ExpandedDesign, loss: &dyn LossModel, response: ArrayView1<f64>) -> Result<()> {
    if response.len() != design.n() {
        return Err(Error::Dimension(format!(
            "response has length {}, design has {} rows",
            response.len(),
            design.n()
        )));
    }
    loss.check_response(response)
}

/// Monotone stagewise direction for a general loss at `beta`.
///
/// The columns with the largest negative gradient `−x̃_kᵀu` form the active
/// set; the direction is the non-negative weighted least-squares fit of the
/// Newton working response `−W⁻¹u` on them (weights `W = l''`), normalized to
/// unit L1 norm.
pub fn glm_move_direction(
    design: &ExpandedDesign,
    beta: &[f64],
    loss: &dyn LossModel,
    response: ArrayView1<f64>,
) -> Result<MoveDirection> {
    check_response(design, loss, response)?;
    if beta.len() != design.width() {
        return Err(Error::Dimension(format!(
            "coefficient vector has length {}, expected {}",
            beta.len(),
            design.width()
        )));
    }
    let eta = design.fitted(beta);
    let w = loss.weights(response, eta.view());
    if let Some(i) = w.iter().position(|&v| !(v > MIN_CURVATURE)) {
        return Err(Error::CurvatureDegeneracy {
            observation: i,
            weight: w[i],
        });
    }
    let u = loss.gradient_terms(response, eta.view());
    let g = design.correlations_of(u.view()).mapv(|v| -v);
    let g = g.as_slice().unwrap();
    let x_max = (0..design.p())
        .map(|j| design.base().gram()[[j, j]])
        .fold(0.0f64, f64::max)
        .sqrt();
    let floor = 1e-12 * norm2(u.as_slice().unwrap()) * x_max;
    let g_max = g.iter().copied().fold(0.0, f64::max);
    if g_max <= floor {
        return Ok(MoveDirection::zero(design.width()));
    }
    let active = tie_band(g, band_width(g_max, TIE, floor), &[]);
    let xs = design.base().xs();
    let weighted_gram = Array2::from_shape_fn((active.len(), active.len()), |(a, b)| {
        let (i, k) = (active[a], active[b]);
        let (ci, ck) = (xs.column(design.base_index(i)), xs.column(design.base_index(k)));
        let s = design.sign(i) * design.sign(k);
        s * ci.iter().zip(ck).zip(&w).map(|((x, z), wt)| x * z * wt).sum::<f64>()
    });
    let rhs: Array1<f64> = active.iter().map(|&k| g[k]).collect();
    let theta = solve_nnls_gram(weighted_gram.view(), rhs.view(), NnlsOptions::default())?;
    normalize(design.width(), active, theta.as_slice().unwrap())
}

/// Newton step `−(XᵀWX)⁻¹Xᵀu` for the unpenalized fit in original
/// coordinates, from collapsed coefficients `beta`.
pub fn newton_direction(
    design: &StandardizedDesign,
    beta: ArrayView1<f64>,
    loss: &dyn LossModel,
    response: ArrayView1<f64>,
) -> Result<Array1<f64>> {
    let xs = design.xs();
    let eta = xs.dot(&beta);
    let u = loss.gradient_terms(response, eta.view());
    let w = loss.weights(response, eta.view());
    let weighted = &xs * &w.view().insert_axis(ndarray::Axis(1));
    let hessian = xs.t().dot(&weighted);
    let grad = xs.t().dot(&u);
    let factor = CholeskyFactor::factor(hessian.view())?;
    Ok(factor.solve(grad.as_slice().unwrap()).into_iter().map(|v| -v).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    /// Initial arc-length step `h`.
    pub step: f64,
    /// Abort when halving would take the step below this.
    pub min_step: f64,
    pub max_steps: usize,
    /// Stop after this much arc-length.
    pub max_arc_length: Option<f64>,
    /// Stop when the largest negative gradient is at most this multiple of
    /// its value at zero.
    pub gradient_tolerance: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            step: 1e-2,
            min_step: 1e-12,
            max_steps: 1_000_000,
            max_arc_length: None,
            gradient_tolerance: 1e-8,
        }
    }
}

impl IntegratorConfig {
    pub fn with_step(step: f64) -> Self {
        Self {
            step,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::Config(format!("step must be positive, got {}", self.step)));
        }
        if !(self.min_step > 0.0 && self.min_step <= self.step) {
            return Err(Error::Config("min_step must be positive and at most step".into()));
        }
        if let Some(l) = self.max_arc_length {
            if !(l > 0.0) {
                return Err(Error::Config("max_arc_length must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Explicit-Euler integration of the monotone path `dβ/dℓ = ρ(β)` in
/// arc-length, recomputing the direction after every step.
///
/// Each step is capped at the Newton estimate of the loss minimizer along the
/// current direction, which stops the scheme from chattering across the
/// optimum at the end of the path. A step that still increases the loss
/// (beyond a relative `1e-12` slack) is halved and retried; after a step that
/// needed no halving, `h` doubles back towards its configured value.
pub fn integrate_monotone_path(
    design: &ExpandedDesign,
    loss: &dyn LossModel,
    response: ArrayView1<f64>,
    control: &IntegratorConfig,
) -> Result<PiecewiseLinearPath> {
    control.validate()?;
    check_response(design, loss, response)?;
    let width = design.width();
    let mut path = PiecewiseLinearPath::new(Method::MonotoneIntegrator, Parametrization::ArcLength, design.p());
    let mut beta = vec![0.0; width];
    let mut ell = 0.0;
    let mut h = control.step;
    let mut current = total_loss(design, &beta, loss, response);
    let eta0 = design.fitted(&beta);
    let g0 = design.correlations_of(loss.gradient_terms(response, eta0.view()).view());
    let tol = control.gradient_tolerance * g0.iter().fold(0.0f64, |m, v| m.max(v.abs()));

    for _ in 0..control.max_steps {
        let remaining = control.max_arc_length.map(|l| l - ell);
        if remaining.is_some_and(|r| r <= 0.0) {
            return Ok(path);
        }
        let eta = design.fitted(&beta);
        let g = design.correlations_of(loss.gradient_terms(response, eta.view()).view());
        if g.iter().copied().fold(0.0, f64::max) <= tol {
            return Ok(path);
        }
        let dir = glm_move_direction(design, &beta, loss, response)?;
        if dir.is_zero() {
            return Ok(path);
        }
        let mut step = remaining.map_or(h, |r| h.min(r));
        if let Some(cap) = line_minimizer(design, &dir, loss, response, eta.view(), &g) {
            step = step.min(cap);
        }
        let mut halved = false;
        let (trial, value) = loop {
            let mut trial = beta.clone();
            for &k in &dir.support {
                trial[k] += step * dir.rho[k];
            }
            let value = total_loss(design, &trial, loss, response);
            let slack = 1e-12 * current.abs().max(1.0);
            if value <= current + slack {
                break (trial, value);
            }
            step *= 0.5;
            halved = true;
            h = h.min(step);
            if step < control.min_step {
                return Err(Error::StepSize {
                    step,
                    increase: value - current,
                });
            }
        };
        if !halved {
            h = (2.0 * h).min(control.step);
        }
        beta = trial;
        current = value;
        ell += step;
        path.push(ell, beta.clone(), dir.support.clone(), None);
    }
    path.truncated = true;
    log::warn!("integrator stopped after {} steps", control.max_steps);
    Ok(path)
}

/// Newton step length `−uᵀv / vᵀWv` along `v = X̃ρ`, or `None` when the
/// curvature along the direction vanishes.
fn line_minimizer(
    design: &ExpandedDesign,
    dir: &MoveDirection,
    loss: &dyn LossModel,
    response: ArrayView1<f64>,
    eta: ArrayView1<f64>,
    correlations: &Array1<f64>,
) -> Option<f64> {
    // x̃_kᵀu, so the slope along ρ is minus its ρ-weighted sum
    let slope: f64 = dir.support.iter().map(|&k| -dir.rho[k] * correlations[k]).sum();
    let v = design.fitted(&dir.rho);
    let w = loss.weights(response, eta);
    let curvature: f64 = v.iter().zip(&w).map(|(a, b)| a * a * b).sum();
    (curvature > 0.0 && slope > 0.0).then(|| slope / curvature)
}
