//! The signed-subset monotonicity condition and the closed-form Gram
//! matrices of piecewise-constant bases.
//!
//! For a design with correlation matrix `R`, all three exact paths are
//! monotone (and therefore coincide) iff for every subset `A` and sign matrix
//! `S_A` the vector `S_A R_A⁻¹ S_A 𝟙` is non-negative. Indices in this module
//! are 0-based.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::data::StandardizedDesign;
use crate::error::{Error, Result};
use crate::linalg::spd_inverse;
use crate::par::Parallelism;

/// Entries of `v` above `−CONDITION_TOLERANCE` count as non-negative.
pub const CONDITION_TOLERANCE: f64 = 1e-10;
/// Default cap on the number of signed subsets an exhaustive check visits.
pub const CHECK_LIMIT: u128 = 10_000_000;
/// Largest `p` checked exhaustively without explicit opt-in.
pub const MAX_UNGUARDED_P: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignedSubset {
    pub indices: Vec<usize>,
    pub signs: Vec<i8>,
}

impl SignedSubset {
    pub fn new(indices: Vec<usize>, signs: Vec<i8>) -> Result<Self> {
        if indices.len() != signs.len() {
            return Err(Error::Config(format!(
                "{} indices but {} signs",
                indices.len(),
                signs.len()
            )));
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::Config("signs must be +1 or -1".into()));
        }
        let mut sorted = indices.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("subset indices must be distinct".into()));
        }
        Ok(Self { indices, signs })
    }

    pub fn positive(indices: Vec<usize>) -> Result<Self> {
        let signs = vec![1; indices.len()];
        Self::new(indices, signs)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub subset: SignedSubset,
    /// `S_A R_A⁻¹ S_A 𝟙`.
    pub v: Vec<f64>,
    pub min: f64,
    pub pass: bool,
}

fn correlation_submatrix(design: &StandardizedDesign, indices: &[usize]) -> Result<Array2<f64>> {
    let p = design.p();
    if let Some(&j) = indices.iter().find(|&&j| j >= p) {
        return Err(Error::Config(format!("index {j} out of range for {p} predictors")));
    }
    let n = design.n() as f64;
    let g = design.gram();
    Ok(Array2::from_shape_fn((indices.len(), indices.len()), |(a, b)| {
        g[[indices[a], indices[b]]] / n
    }))
}

fn inverse_of(design: &StandardizedDesign, indices: &[usize]) -> Result<Array2<f64>> {
    let r = correlation_submatrix(design, indices)?;
    spd_inverse(r.view()).map_err(|e| match e {
        Error::DegenerateDesign { column, detail } => Error::DegenerateDesign {
            column: indices[column.min(indices.len() - 1)],
            detail,
        },
        other => other,
    })
}

fn signed_row_sums(inv: &Array2<f64>, signs: &[i8]) -> Vec<f64> {
    let k = signs.len();
    (0..k)
        .map(|a| {
            let s_a = f64::from(signs[a]);
            (0..k).map(|b| s_a * inv[[a, b]] * f64::from(signs[b])).sum()
        })
        .collect()
}

fn report(subset: SignedSubset, v: Vec<f64>) -> ConditionReport {
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    ConditionReport {
        subset,
        v,
        min,
        pass: min >= -CONDITION_TOLERANCE,
    }
}

/// Evaluate the condition for one signed subset.
pub fn check_condition(design: &StandardizedDesign, subset: &SignedSubset) -> Result<ConditionReport> {
    if subset.indices.is_empty() {
        return Err(Error::Config("subset is empty".into()));
    }
    let inv = inverse_of(design, &subset.indices)?;
    Ok(report(subset.clone(), signed_row_sums(&inv, &subset.signs)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExhaustiveOptions {
    /// Largest subset size; `None` means all sizes up to `p`.
    pub max_subset_size: Option<usize>,
    /// Permit `p` above [`MAX_UNGUARDED_P`].
    pub allow_large: bool,
    pub limit: u128,
    pub parallelism: Parallelism,
}

impl Default for ExhaustiveOptions {
    fn default() -> Self {
        Self {
            max_subset_size: None,
            allow_large: false,
            limit: CHECK_LIMIT,
            parallelism: Parallelism::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum ExhaustiveOutcome {
    Pass { checked: u128, max_subset_size: usize },
    Violation(ConditionReport),
}

impl ExhaustiveOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, ExhaustiveOutcome::Pass { .. })
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Number of signed subsets of size at most `max_size` among `p` predictors.
pub fn signed_subset_count(p: usize, max_size: usize) -> u128 {
    (1..=max_size.min(p)).map(|k| binomial(p, k) << k).sum()
}

/// Advance `idx` to the next `k`-combination of `0..p` in lexicographic order.
fn next_combination(idx: &mut [usize], p: usize) -> bool {
    let k = idx.len();
    let Some(i) = (0..k).rev().find(|&i| idx[i] < p - k + i) else {
        return false;
    };
    idx[i] += 1;
    for j in i + 1..k {
        idx[j] = idx[j - 1] + 1;
    }
    true
}

/// Check every signed subset of size at most `max_subset_size`.
///
/// Subsets are visited by size, then lexicographically; sign patterns with
/// `+` before `−`, first element most significant. The reported violation is
/// the first in that order whatever the parallelism.
pub fn exhaustive_check(design: &StandardizedDesign, options: &ExhaustiveOptions) -> Result<ExhaustiveOutcome> {
    let p = design.p();
    let max_size = options.max_subset_size.unwrap_or(p).min(p);
    let estimated = signed_subset_count(p, max_size);
    if p > MAX_UNGUARDED_P && !options.allow_large {
        return Err(Error::Config(format!(
            "exhaustive check over {p} predictors visits {estimated} signed subsets; \
             opt in explicitly to run it"
        )));
    }
    if estimated > options.limit {
        return Err(Error::BudgetExceeded {
            estimated,
            limit: options.limit,
        });
    }
    const CHUNK: usize = 4096;
    for k in 1..=max_size {
        let mut idx: Vec<usize> = (0..k).collect();
        let mut more = true;
        while more {
            let mut chunk = Vec::with_capacity(CHUNK);
            while more && chunk.len() < CHUNK {
                chunk.push(idx.clone());
                more = next_combination(&mut idx, p);
            }
            let found = options.parallelism.find_first(chunk.len(), |c| {
                first_violation(design, &chunk[c]).transpose()
            });
            match found {
                Some(Ok(r)) => return Ok(ExhaustiveOutcome::Violation(r)),
                Some(Err(e)) => return Err(e),
                None => {}
            }
        }
    }
    Ok(ExhaustiveOutcome::Pass {
        checked: estimated,
        max_subset_size: max_size,
    })
}

fn first_violation(design: &StandardizedDesign, indices: &[usize]) -> Result<Option<ConditionReport>> {
    let inv = inverse_of(design, indices)?;
    let k = indices.len();
    for pattern in 0u64..(1u64 << k) {
        let signs: Vec<i8> = (0..k)
            .map(|a| if pattern >> (k - 1 - a) & 1 == 1 { -1 } else { 1 })
            .collect();
        let v = signed_row_sums(&inv, &signs);
        let r = report(
            SignedSubset {
                indices: indices.to_vec(),
                signs,
            },
            v,
        );
        if !r.pass {
            return Ok(Some(r));
        }
    }
    Ok(None)
}

fn check_counts(counts: &[usize], n: usize) -> Result<()> {
    if counts.is_empty() {
        return Err(Error::Config("no knots".into()));
    }
    if let Some(j) = counts.iter().position(|&c| c == 0 || c >= n) {
        return Err(Error::DegenerateColumn {
            column: j,
            detail: format!("{} of {n} observations lie right of the knot", counts[j]),
        });
    }
    Ok(())
}

/// Correlation matrix of the indicator columns `I(x > t_j)`, given the
/// number `n_j` of observations right of each knot.
///
/// For `n_i ≥ n_j` the entry is `√((n − n_i)/n_i · n_j/(n − n_j))`.
pub fn pc_gram(knot_counts: &[usize], n: usize) -> Result<Array2<f64>> {
    check_counts(knot_counts, n)?;
    let k = knot_counts.len();
    let nf = n as f64;
    Ok(Array2::from_shape_fn((k, k), |(i, j)| {
        if i == j {
            return 1.0;
        }
        let hi = knot_counts[i].max(knot_counts[j]) as f64;
        let lo = knot_counts[i].min(knot_counts[j]) as f64;
        ((nf - hi) / hi * lo / (nf - lo)).sqrt()
    }))
}

/// Tridiagonal inverse of [`pc_gram`] in closed form.
///
/// Sorting knots right to left, `s_j = n_(j)/n` increases and
/// `v_j = s_j/(1 − s_j)`; with `v_0 = 0` and `v_{k+1} = ∞` the inverse has
/// diagonal `v_j (1/(v_j − v_{j−1}) + 1/(v_{j+1} − v_j))` and neighbours
/// `−√(v_j v_{j−1})/(v_j − v_{j−1})`.
pub fn pc_inverse_gram(knot_counts: &[usize], n: usize) -> Result<Array2<f64>> {
    check_counts(knot_counts, n)?;
    let k = knot_counts.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&i| (knot_counts[i], i));
    for w in order.windows(2) {
        if knot_counts[w[0]] == knot_counts[w[1]] {
            return Err(Error::TiedKnots {
                first: w[0].min(w[1]),
                second: w[0].max(w[1]),
            });
        }
    }
    let v: Vec<f64> = order
        .iter()
        .map(|&i| {
            let s = knot_counts[i] as f64 / n as f64;
            s / (1.0 - s)
        })
        .collect();
    let below = |j: usize| if j == 0 { 0.0 } else { v[j - 1] };
    let mut inv = Array2::zeros((k, k));
    for j in 0..k {
        let left = 1.0 / (v[j] - below(j));
        let right = if j + 1 < k { 1.0 / (v[j + 1] - v[j]) } else { 0.0 };
        inv[[order[j], order[j]]] = v[j] * (left + right);
        if j > 0 {
            let off = -(v[j] * v[j - 1]).sqrt() / (v[j] - v[j - 1]);
            inv[[order[j], order[j - 1]]] = off;
            inv[[order[j - 1], order[j]]] = off;
        }
    }
    Ok(inv)
}
