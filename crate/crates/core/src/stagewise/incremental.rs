use ndarray::{Array1, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::data::{ExpandedDesign, Method, Parametrization, PiecewiseLinearPath, StandardizedDesign};
use crate::error::{Error, Result};
use crate::linalg::norm2;
use crate::loss::LossModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StagewiseConfig {
    pub epsilon: f64,
    pub max_iterations: usize,
    /// Stop once the largest correlation (or negative gradient) is at most
    /// this multiple of `‖y‖` (of the gradient norm at zero for general
    /// losses).
    pub correlation_tolerance: f64,
    /// Keep a vertex every `record_stride` steps. Endpoints and the first
    /// move of every coordinate are always kept.
    pub record_stride: usize,
}

impl Default for StagewiseConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.01,
            max_iterations: 1_000_000,
            correlation_tolerance: 1e-8,
            record_stride: 1,
        }
    }
}

impl StagewiseConfig {
    pub fn with_epsilon(epsilon: f64) -> Self {
        Self {
            epsilon,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(self.correlation_tolerance >= 0.0) {
            return Err(Error::Config("correlation_tolerance must be non-negative".into()));
        }
        if self.record_stride == 0 {
            return Err(Error::Config("record_stride must be at least 1".into()));
        }
        Ok(())
    }
}

/// Step counter and vertex recorder shared by the ε-stepping algorithms.
///
/// Coefficients are stored as step counts, so `β_k = n_k ε` and the path
/// parameter `m ε` are reproduced exactly by every algorithm.
struct Recorder {
    eps: f64,
    stride: usize,
    counts: Vec<u64>,
    steps: usize,
    moved: Vec<usize>,
    seen: Vec<bool>,
    path: PiecewiseLinearPath,
}

impl Recorder {
    fn new(method: Method, p: usize, config: &StagewiseConfig) -> Self {
        Self {
            eps: config.epsilon,
            stride: config.record_stride,
            counts: vec![0; 2 * p],
            steps: 0,
            moved: Vec::new(),
            seen: vec![false; 2 * p],
            path: PiecewiseLinearPath::new(method, Parametrization::ArcLength, p),
        }
    }

    fn beta(&self) -> Vec<f64> {
        self.counts.iter().map(|&n| n as f64 * self.eps).collect()
    }

    fn record(&mut self) {
        if self.moved.is_empty() {
            return;
        }
        let mut moved = std::mem::take(&mut self.moved);
        moved.sort_unstable();
        let ell = self.steps as f64 * self.eps;
        let beta = self.beta();
        self.path.push(ell, beta, moved, None);
    }

    fn step(&mut self, k: usize) {
        let first = !self.seen[k];
        if first {
            self.record();
        }
        self.seen[k] = true;
        self.counts[k] += 1;
        self.steps += 1;
        if !self.moved.contains(&k) {
            self.moved.push(k);
        }
        if first || self.steps.is_multiple_of(self.stride) {
            self.record();
        }
    }

    fn finish(mut self, truncated: bool) -> PiecewiseLinearPath {
        self.record();
        self.path.truncated = truncated;
        if truncated {
            log::warn!("iteration budget exhausted after {} steps", self.steps);
        }
        self.path
    }
}

fn argmax_lowest(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (k, &v) in values.iter().enumerate() {
        if best.is_none_or(|b| v > values[b]) {
            best = Some(k);
        }
    }
    best
}

/// Incremental forward stagewise: repeatedly move the coefficient of the
/// predictor most correlated with the residual by `ε` in the direction of
/// the correlation. Ties go to the lowest index.
///
/// Stops when the largest absolute correlation falls below the tolerance or
/// when no `ε`-step would reduce the residual sum of squares. The path is
/// reported in expanded coordinates (positive and negative moves counted
/// separately) with parameter `t = m ε`.
pub fn fs_epsilon(design: &StandardizedDesign, config: &StagewiseConfig) -> Result<PiecewiseLinearPath> {
    config.validate()?;
    let p = design.p();
    let xs = design.xs();
    let gram = design.gram();
    let eps = config.epsilon;
    let mut r = design.y_centered().to_owned();
    let tol = config.correlation_tolerance * norm2(r.as_slice().unwrap());
    let mut rec = Recorder::new(Method::FsEpsilon, p, config);
    let mut truncated = false;
    loop {
        let c = xs.t().dot(&r);
        let abs: Vec<f64> = c.iter().map(|v| v.abs()).collect();
        let Some(j) = argmax_lowest(&abs) else { break };
        if abs[j] <= tol || abs[j] <= 0.5 * eps * gram[[j, j]] {
            break;
        }
        if rec.steps >= config.max_iterations {
            truncated = true;
            break;
        }
        let (delta, k) = if c[j] > 0.0 { (eps, j) } else { (-eps, p + j) };
        r.scaled_add(-delta, &xs.column(j));
        rec.step(k);
    }
    Ok(rec.finish(truncated))
}

/// Monotone incremental forward stagewise in the expanded design: add `ε` to
/// the expanded coefficient most positively correlated with the residual.
/// Ties go to the lowest original index, positive column first.
pub fn monotone_incremental(design: &ExpandedDesign, config: &StagewiseConfig) -> Result<PiecewiseLinearPath> {
    config.validate()?;
    let p = design.p();
    let eps = config.epsilon;
    let mut r = design.y().to_owned();
    let tol = config.correlation_tolerance * norm2(r.as_slice().unwrap());
    let mut rec = Recorder::new(Method::MonotoneIncremental, p, config);
    let mut truncated = false;
    loop {
        let c = design.correlations_of(r.view());
        let Some(k) = argmax_expanded(c.as_slice().unwrap(), p) else { break };
        if c[k] <= tol || c[k] <= 0.5 * eps * design.gram_entry(k, k) {
            break;
        }
        if rec.steps >= config.max_iterations {
            truncated = true;
            break;
        }
        r.scaled_add(-eps, &design.column(k));
        rec.step(k);
    }
    Ok(rec.finish(truncated))
}

/// Largest entry, ties broken by original index and then sign.
fn argmax_expanded(c: &[f64], p: usize) -> Option<usize> {
    let order = (0..p).flat_map(|j| [j, j + p]);
    let mut best: Option<usize> = None;
    for k in order {
        if best.is_none_or(|b| c[k] > c[b]) {
            best = Some(k);
        }
    }
    best
}

/// Generalized monotone incremental stagewise for a convex loss: add `ε` to
/// the expanded coefficient with the largest negative gradient `−x̃_kᵀu`.
///
/// Stops when the largest negative gradient is below tolerance or when the
/// step would not decrease the loss.
pub fn generalized_incremental(
    design: &ExpandedDesign,
    loss: &dyn LossModel,
    response: ArrayView1<f64>,
    config: &StagewiseConfig,
) -> Result<PiecewiseLinearPath> {
    config.validate()?;
    if response.len() != design.n() {
        return Err(Error::Dimension(format!(
            "response has length {}, design has {} rows",
            response.len(),
            design.n()
        )));
    }
    loss.check_response(response)?;
    let p = design.p();
    let eps = config.epsilon;
    let mut eta: Array1<f64> = Array1::zeros(design.n());
    let mut current = loss.total(response, eta.view());
    let u0 = loss.gradient_terms(response, eta.view());
    let tol = config.correlation_tolerance * norm2(u0.as_slice().unwrap());
    let mut rec = Recorder::new(Method::GeneralizedIncremental, p, config);
    let mut truncated = false;
    loop {
        let u = loss.gradient_terms(response, eta.view());
        let g = design.correlations_of(u.view()).mapv(|v| -v);
        let Some(k) = argmax_expanded(g.as_slice().unwrap(), p) else { break };
        if g[k] <= tol {
            break;
        }
        let mut trial = eta.clone();
        trial.scaled_add(eps, &design.column(k));
        let next = loss.total(response, trial.view());
        if next >= current {
            break;
        }
        if rec.steps >= config.max_iterations {
            truncated = true;
            break;
        }
        eta = trial;
        current = next;
        rec.step(k);
    }
    Ok(rec.finish(truncated))
}
