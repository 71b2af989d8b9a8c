use ndarray::Array1;
use serde::{Deserialize, Serialize};

use super::{collapse, l1_norm};
use crate::error::{Error, Result};

/// How the path parameter `ℓ` relates to the coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parametrization {
    /// `ℓ = Σ_k β_k` in expanded space: the L1 norm whenever all expanded
    /// coefficients are non-negative (lasso, stagewise).
    L1Norm,
    /// L1 arc-length travelled along the path (unit L1 speed).
    ArcLength,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Lar,
    Lasso,
    Fs0,
    FsEpsilon,
    MonotoneIncremental,
    GeneralizedIncremental,
    MonotoneIntegrator,
    Unknown,
}

/// What ended a segment of an exact path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    /// A variable outside the active set reached the maximal correlation.
    Join,
    /// An active coefficient reached zero and left the active set (lasso).
    HitZero,
    /// The residual reached the unrestricted least-squares residual.
    FullLeastSquares,
    /// A configured norm or λ bound was reached.
    EarlyStop,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathEvent {
    pub kind: EventKind,
    pub index: Option<usize>,
    pub gamma: f64,
}

/// Index used to line up paths with different native parametrizations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexBy {
    /// L1 norm of the collapsed coefficients.
    Norm,
    /// L1 arc-length (total variation) travelled so far.
    ArcLength,
}

/// Coefficient path in expanded (`2p`) space, linear between breakpoints.
///
/// `segment_active_sets[k]` lists the coordinates moving on segment `k`
/// (between vertices `k` and `k + 1`). Exact solvers also record the event
/// ending each segment and the maximal correlation at every vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinearPath {
    pub method: Method,
    pub parametrization: Parametrization,
    pub p: usize,
    pub breakpoints: Vec<f64>,
    pub vertices: Vec<Vec<f64>>,
    pub segment_active_sets: Vec<Vec<usize>>,
    #[serde(default)]
    pub events: Vec<PathEvent>,
    #[serde(default)]
    pub max_correlations: Vec<f64>,
    /// Set when an iteration budget ran out before the natural stop.
    #[serde(default)]
    pub truncated: bool,
}

impl PiecewiseLinearPath {
    /// A path holding only the origin.
    pub fn new(method: Method, parametrization: Parametrization, p: usize) -> Self {
        Self {
            method,
            parametrization,
            p,
            breakpoints: vec![0.0],
            vertices: vec![vec![0.0; 2 * p]],
            segment_active_sets: Vec::new(),
            events: Vec::new(),
            max_correlations: Vec::new(),
            truncated: false,
        }
    }

    /// Append a vertex. A breakpoint that does not advance (a step below the
    /// resolution of `ℓ`) replaces the last vertex instead of adding an empty
    /// segment.
    pub fn push(&mut self, ell: f64, vertex: Vec<f64>, active: Vec<usize>, event: Option<PathEvent>) {
        debug_assert_eq!(vertex.len(), 2 * self.p);
        let last = *self.breakpoints.last().expect("path has an origin");
        if ell <= last && self.breakpoints.len() > 1 {
            *self.vertices.last_mut().unwrap() = vertex;
            if let Some(e) = event {
                if let Some(slot) = self.events.last_mut() {
                    *slot = e;
                }
            }
            return;
        }
        if ell <= last {
            return;
        }
        self.breakpoints.push(ell);
        self.vertices.push(vertex);
        self.segment_active_sets.push(active);
        if let Some(e) = event {
            self.events.push(e);
        }
    }

    pub fn segments(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn end(&self) -> f64 {
        *self.breakpoints.last().unwrap()
    }

    pub fn last_vertex(&self) -> &[f64] {
        self.vertices.last().unwrap()
    }

    pub fn collapsed_vertices(&self) -> Vec<Array1<f64>> {
        self.vertices.iter().map(|v| collapse(v)).collect()
    }

    /// Segment containing `ell` and the fraction along it.
    fn locate(&self, ell: f64) -> Result<(usize, f64)> {
        let end = self.end();
        if !(0.0..=end).contains(&ell) {
            return Err(Error::Range {
                value: ell,
                lo: 0.0,
                hi: end,
            });
        }
        if self.segments() == 0 {
            return Ok((0, 0.0));
        }
        // first breakpoint strictly greater than ell
        let upper = self.breakpoints.partition_point(|&b| b <= ell);
        let seg = upper.saturating_sub(1).min(self.segments() - 1);
        let (a, b) = (self.breakpoints[seg], self.breakpoints[seg + 1]);
        Ok((seg, ((ell - a) / (b - a)).clamp(0.0, 1.0)))
    }

    /// Expanded coefficients at `ell`, by linear interpolation.
    pub fn evaluate(&self, ell: f64) -> Result<Array1<f64>> {
        let (seg, t) = self.locate(ell)?;
        if t == 0.0 || self.segments() == 0 {
            return Ok(Array1::from(self.vertices[seg].clone()));
        }
        if t == 1.0 {
            return Ok(Array1::from(self.vertices[seg + 1].clone()));
        }
        let (a, b) = (&self.vertices[seg], &self.vertices[seg + 1]);
        Ok(a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect())
    }

    pub fn evaluate_collapsed(&self, ell: f64) -> Result<Array1<f64>> {
        Ok(collapse(self.evaluate(ell)?.as_slice().unwrap()))
    }

    /// Cumulative L1 arc-length at every vertex.
    ///
    /// Measured on expanded coordinates. No exact solver moves both members of
    /// a pair on the same segment, so this equals the arc-length of the
    /// collapsed path.
    pub fn vertex_arc_lengths(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.vertices.len());
        let mut total = 0.0;
        out.push(0.0);
        for w in self.vertices.windows(2) {
            total += w[0].iter().zip(&w[1]).map(|(a, b)| (b - a).abs()).sum::<f64>();
            out.push(total);
        }
        out
    }

    /// L1 arc-length travelled up to `ell`.
    pub fn arc_length(&self, ell: f64) -> Result<f64> {
        let (seg, t) = self.locate(ell)?;
        let tv = self.vertex_arc_lengths();
        if self.segments() == 0 {
            return Ok(0.0);
        }
        Ok(tv[seg] + t * (tv[seg + 1] - tv[seg]))
    }

    /// Value of the requested index at position `ell`.
    pub fn index_value(&self, ell: f64, by: IndexBy) -> Result<f64> {
        match by {
            IndexBy::Norm => Ok(l1_norm(self.evaluate_collapsed(ell)?.as_slice().unwrap())),
            IndexBy::ArcLength => self.arc_length(ell),
        }
    }

    pub fn vertex_index_values(&self, by: IndexBy) -> Vec<f64> {
        match by {
            IndexBy::Norm => self
                .collapsed_vertices()
                .iter()
                .map(|v| l1_norm(v.as_slice().unwrap()))
                .collect(),
            IndexBy::ArcLength => self.vertex_arc_lengths(),
        }
    }

    /// First position `ℓ` at which the index reaches `value`, or `None` if the
    /// path never gets there.
    pub fn position_for(&self, by: IndexBy, value: f64) -> Option<f64> {
        IndexedPath::new(self, by).position(value)
    }

    /// Every expanded coordinate non-decreasing from vertex to vertex (exact
    /// comparison).
    pub fn is_monotone_expanded(&self) -> bool {
        self.vertices
            .windows(2)
            .all(|w| w[0].iter().zip(&w[1]).all(|(a, b)| b >= a))
    }

    /// Every collapsed coordinate monotone (in either direction) along the
    /// path, up to `tol`.
    pub fn is_monotone_collapsed(&self, tol: f64) -> bool {
        let c = self.collapsed_vertices();
        (0..self.p).all(|j| {
            let inc = c.windows(2).all(|w| w[1][j] >= w[0][j] - tol);
            let dec = c.windows(2).all(|w| w[1][j] <= w[0][j] + tol);
            inc || dec
        })
    }

    /// `‖Δβ‖₁ / Δℓ` for each segment.
    pub fn segment_speeds(&self) -> Vec<f64> {
        (0..self.segments())
            .map(|k| {
                let dl = self.breakpoints[k + 1] - self.breakpoints[k];
                let dv: f64 = self.vertices[k]
                    .iter()
                    .zip(&self.vertices[k + 1])
                    .map(|(a, b)| (b - a).abs())
                    .sum();
                dv / dl
            })
            .collect()
    }
}

/// A path together with cached index values, for repeated lookups by norm
/// or arc-length in logarithmic time.
pub struct IndexedPath<'a> {
    path: &'a PiecewiseLinearPath,
    by: IndexBy,
    collapsed: Vec<Array1<f64>>,
    /// Index value at each vertex.
    values: Vec<f64>,
    /// Running maximum of `values`.
    reached: Vec<f64>,
}

impl<'a> IndexedPath<'a> {
    pub fn new(path: &'a PiecewiseLinearPath, by: IndexBy) -> Self {
        let collapsed = path.collapsed_vertices();
        let values = match by {
            IndexBy::Norm => collapsed.iter().map(|v| l1_norm(v.as_slice().unwrap())).collect(),
            IndexBy::ArcLength => path.vertex_arc_lengths(),
        };
        let reached = values
            .iter()
            .scan(f64::NEG_INFINITY, |m, &v| {
                *m = m.max(v);
                Some(*m)
            })
            .collect();
        Self {
            path,
            by,
            collapsed,
            values,
            reached,
        }
    }

    pub fn path(&self) -> &PiecewiseLinearPath {
        self.path
    }

    pub fn index(&self) -> IndexBy {
        self.by
    }

    /// Index values at the vertices.
    pub fn vertex_values(&self) -> &[f64] {
        &self.values
    }

    /// Largest index value the path attains.
    pub fn max_value(&self) -> f64 {
        *self.reached.last().unwrap()
    }

    /// Index value at the end of the path.
    pub fn end_value(&self) -> f64 {
        *self.values.last().unwrap()
    }

    /// First position `ℓ` at which the index reaches `value`.
    pub fn position(&self, value: f64) -> Option<f64> {
        if value <= 0.0 {
            return Some(0.0);
        }
        // absorb rounding in values computed from the path's own range
        let max = self.max_value();
        let value = if value > max && value <= max * (1.0 + 1e-12) { max } else { value };
        // first vertex at which the running maximum reaches the value
        let hit = self.reached.partition_point(|&m| m < value);
        if hit >= self.values.len() {
            return None;
        }
        if hit == 0 {
            return Some(0.0);
        }
        let seg = hit - 1;
        let (l0, l1) = (self.path.breakpoints[seg], self.path.breakpoints[seg + 1]);
        let t = match self.by {
            IndexBy::ArcLength => {
                let span = self.values[seg + 1] - self.values[seg];
                if span > 0.0 {
                    ((value - self.values[seg]) / span).clamp(0.0, 1.0)
                } else {
                    1.0
                }
            }
            IndexBy::Norm => {
                let a = &self.collapsed[seg];
                let d = &self.collapsed[seg + 1] - a;
                first_crossing(a, &d, value).unwrap_or(1.0)
            }
        };
        Some(l0 + t * (l1 - l0))
    }

    /// Collapsed coefficients where the index first reaches `value`.
    pub fn collapsed_at(&self, value: f64) -> Option<Array1<f64>> {
        let ell = self.position(value)?;
        self.path.evaluate_collapsed(ell).ok()
    }
}

/// Smallest `t ∈ [0, 1]` with `‖a + t d‖₁ ≥ value`.
fn first_crossing(a: &Array1<f64>, d: &Array1<f64>, value: f64) -> Option<f64> {
    let f = |t: f64| -> f64 { a.iter().zip(d).map(|(x, y)| (x + t * y).abs()).sum() };
    let mut knots: Vec<f64> = a
        .iter()
        .zip(d)
        .filter(|(_, &y)| y != 0.0)
        .map(|(x, y)| -x / y)
        .filter(|t| *t > 0.0 && *t < 1.0)
        .collect();
    knots.push(1.0);
    knots.sort_by(f64::total_cmp);
    let mut lo = 0.0;
    let mut f_lo = f(0.0);
    if f_lo >= value {
        return Some(0.0);
    }
    for hi in knots {
        let f_hi = f(hi);
        if f_hi >= value {
            // f is linear on [lo, hi]
            let t = lo + (value - f_lo) / (f_hi - f_lo) * (hi - lo);
            return Some(t.clamp(lo, hi));
        }
        lo = hi;
        f_lo = f_hi;
    }
    None
}
