use ndarray::{Array1, ArrayView1, ArrayView2};

use super::{lstsq::solve_least_squares, CholeskyFactor};
use crate::error::{Error, Result};

/// Controls for the Lawson–Hanson active-set iteration.
#[derive(Debug, Clone, Copy)]
pub struct NnlsOptions {
    /// Cap on active-set pivots (additions plus removals). `None` means
    /// `10 * cols`, with a floor of 10.
    pub max_pivots: Option<usize>,
    /// Relative threshold on the negative gradient for entering a variable.
    pub tolerance: f64,
}

impl Default for NnlsOptions {
    fn default() -> Self {
        Self {
            max_pivots: None,
            tolerance: 1e-12,
        }
    }
}

/// `min ‖b − Aθ‖₂` subject to `θ ≥ 0`.
pub fn solve_nnls(a: ArrayView2<f64>, b: ArrayView1<f64>) -> Result<Array1<f64>> {
    solve_nnls_with(a, b, NnlsOptions::default())
}

pub fn solve_nnls_with(
    a: ArrayView2<f64>,
    b: ArrayView1<f64>,
    options: NnlsOptions,
) -> Result<Array1<f64>> {
    let (m, n) = a.dim();
    if m == 0 || n == 0 {
        return Err(Error::Dimension("NNLS needs a non-empty matrix".into()));
    }
    if b.len() != m {
        return Err(Error::Dimension(format!(
            "matrix has {m} rows but right-hand side has {}",
            b.len()
        )));
    }
    if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("NNLS input"));
    }
    let col_norm = a
        .columns()
        .into_iter()
        .map(|c| c.dot(&c).sqrt())
        .fold(0.0, f64::max);
    let scale = col_norm * b.dot(&b).sqrt();
    let mut problem = DenseProblem { a, b };
    lawson_hanson(&mut problem, n, scale, options)
}

/// NNLS in Gram form: `min ½θᵀGθ − cᵀθ` subject to `θ ≥ 0`.
///
/// With `G = AᵀA` and `c = Aᵀb` this is the same problem as [`solve_nnls`].
/// Passive-set changes are applied to a Cholesky factor incrementally.
pub fn solve_nnls_gram(
    gram: ArrayView2<f64>,
    rhs: ArrayView1<f64>,
    options: NnlsOptions,
) -> Result<Array1<f64>> {
    let n = gram.nrows();
    if n == 0 || gram.ncols() != n || rhs.len() != n {
        return Err(Error::Dimension(format!(
            "Gram {}x{} with right-hand side of length {}",
            gram.nrows(),
            gram.ncols(),
            rhs.len()
        )));
    }
    if gram.iter().chain(rhs.iter()).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("NNLS input"));
    }
    let scale = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut problem = GramProblem {
        gram,
        rhs,
        factor: CholeskyFactor::empty(),
        order: Vec::new(),
    };
    lawson_hanson(&mut problem, n, scale, options)
}

trait Subproblem {
    fn negative_gradient(&self, x: &[f64]) -> Vec<f64>;
    /// Unconstrained least-squares solution restricted to `passive`, in the
    /// order given.
    fn passive_solution(&mut self, passive: &[usize]) -> Result<Vec<f64>>;
}

struct DenseProblem<'a> {
    a: ArrayView2<'a, f64>,
    b: ArrayView1<'a, f64>,
}

impl Subproblem for DenseProblem<'_> {
    fn negative_gradient(&self, x: &[f64]) -> Vec<f64> {
        let residual = &self.b - &self.a.dot(&ArrayView1::from(x));
        self.a.t().dot(&residual).to_vec()
    }

    fn passive_solution(&mut self, passive: &[usize]) -> Result<Vec<f64>> {
        let sub = self.a.select(ndarray::Axis(1), passive);
        solve_least_squares(sub.view(), self.b).map(|v| v.to_vec()).map_err(|e| match e {
            Error::DegenerateDesign { column, detail } => Error::DegenerateDesign {
                column: passive[column],
                detail,
            },
            other => other,
        })
    }
}

struct GramProblem<'a> {
    gram: ArrayView2<'a, f64>,
    rhs: ArrayView1<'a, f64>,
    factor: CholeskyFactor,
    order: Vec<usize>,
}

impl Subproblem for GramProblem<'_> {
    fn negative_gradient(&self, x: &[f64]) -> Vec<f64> {
        (&self.rhs - &self.gram.dot(&ArrayView1::from(x))).to_vec()
    }

    fn passive_solution(&mut self, passive: &[usize]) -> Result<Vec<f64>> {
        // `passive` preserves relative order under removal and grows at the
        // end, so the factor can be synchronised with downdates then updates.
        let mut k = 0;
        while k < self.order.len() {
            if passive.contains(&self.order[k]) {
                k += 1;
            } else {
                self.factor.remove(k);
                self.order.remove(k);
            }
        }
        for &j in passive {
            if !self.order.contains(&j) {
                let mut row: Vec<f64> = self.order.iter().map(|&i| self.gram[[j, i]]).collect();
                row.push(self.gram[[j, j]]);
                self.factor.append(&row).map_err(|e| match e {
                    Error::DegenerateDesign { detail, .. } => {
                        Error::DegenerateDesign { column: j, detail }
                    }
                    other => other,
                })?;
                self.order.push(j);
            }
        }
        debug_assert_eq!(self.order, passive);
        let b: Vec<f64> = passive.iter().map(|&j| self.rhs[j]).collect();
        Ok(self.factor.solve(&b))
    }
}

fn lawson_hanson<P: Subproblem>(
    problem: &mut P,
    n: usize,
    scale: f64,
    options: NnlsOptions,
) -> Result<Array1<f64>> {
    let max_pivots = options.max_pivots.unwrap_or((10 * n).max(10));
    let tol = options.tolerance * scale;
    let mut x = vec![0.0; n];
    let mut passive: Vec<usize> = Vec::new();
    let mut blocked = vec![false; n];
    let mut pivots = 0usize;

    loop {
        let w = problem.negative_gradient(&x);
        let candidate = (0..n)
            .filter(|j| !passive.contains(j) && !blocked[*j])
            .filter(|&j| w[j] > tol)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]).then(j.cmp(&i)));
        let Some(enter) = candidate else { break };

        pivots += 1;
        if pivots > max_pivots {
            return Err(Error::SolverStall { pivots });
        }
        passive.push(enter);

        let mut fresh = true;
        loop {
            let z = match problem.passive_solution(&passive) {
                // A column in the span of the passive set has zero gradient at
                // the passive optimum; any excess is roundoff.
                Err(Error::DegenerateDesign { .. }) if fresh => {
                    passive.pop();
                    blocked[enter] = true;
                    break;
                }
                other => other?,
            };
            fresh = false;
            if z.iter().all(|&v| v > 0.0) {
                for (&j, &v) in passive.iter().zip(&z) {
                    x[j] = v;
                }
                blocked.iter_mut().for_each(|b| *b = false);
                break;
            }
            // Step back toward the previous feasible point; the blocking
            // variable lands on zero and leaves the passive set.
            let mut alpha = f64::INFINITY;
            let mut blocking = passive[0];
            for (&j, &zj) in passive.iter().zip(&z) {
                if zj <= 0.0 {
                    let denom = x[j] - zj;
                    let a = if denom > 0.0 { x[j] / denom } else { 0.0 };
                    if a < alpha {
                        alpha = a;
                        blocking = j;
                    }
                }
            }
            let alpha = alpha.clamp(0.0, 1.0);
            for (&j, &zj) in passive.iter().zip(&z) {
                x[j] += alpha * (zj - x[j]);
            }
            x[blocking] = 0.0;
            let before = passive.len();
            passive.retain(|&j| x[j] > 0.0);
            for j in 0..n {
                if !passive.contains(&j) {
                    x[j] = 0.0;
                }
            }
            pivots += before - passive.len();
            if pivots > max_pivots {
                return Err(Error::SolverStall { pivots });
            }
            if alpha == 0.0 && blocking == enter {
                // Entering variable rejected on the spot: a numerical tie with
                // the optimality threshold. Skip it until the iterate moves.
                blocked[enter] = true;
            }
            if passive.is_empty() {
                break;
            }
        }
    }
    Ok(Array1::from(x))
}
