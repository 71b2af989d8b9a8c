use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};

/// Random source for all generators: ChaCha8 seeded from a `u64`.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    /// `(x − t) I(x > t)`.
    PiecewiseLinear,
    /// `I(x > t)`.
    PiecewiseConstant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SineSpec {
    pub n: usize,
    pub basis: Basis,
    pub knots: Vec<f64>,
    pub noise_scale: f64,
    pub seed: u64,
}

impl Default for SineSpec {
    fn default() -> Self {
        Self {
            n: 300,
            basis: Basis::PiecewiseLinear,
            knots: (0..10).map(|k| k as f64 / 10.0).collect(),
            noise_scale: 0.25,
            seed: 0,
        }
    }
}

pub fn sine_target(x: f64) -> f64 {
    (6.0 * x).sin() / (1.0 + x)
}

/// `n` equally spaced points on `[0, 1]`.
pub fn unit_grid(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.0];
    }
    (0..n).map(|i| i as f64 / (n - 1) as f64).collect()
}

/// Spline basis columns at the given knots.
///
/// A knot must satisfy `min x ≤ t < max x`, otherwise its column is
/// identically zero. Piecewise-constant knots with identical columns are
/// merged, keeping the first.
pub fn basis_matrix(x: &[f64], basis: Basis, knots: &[f64]) -> Result<(Array2<f64>, Vec<String>)> {
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut names = Vec::new();
    for (j, &t) in knots.iter().enumerate() {
        if !(t >= lo && t < hi) {
            return Err(Error::DegenerateColumn {
                column: j,
                detail: format!("knot {t} leaves no observations on one side of [{lo}, {hi}]"),
            });
        }
        let col: Vec<f64> = x
            .iter()
            .map(|&xi| match basis {
                Basis::PiecewiseLinear if xi > t => xi - t,
                Basis::PiecewiseConstant if xi > t => 1.0,
                _ => 0.0,
            })
            .collect();
        if let Some(k) = columns.iter().position(|c| *c == col) {
            log::warn!("knot {t} gives the same column as {}; merged", names[k]);
            continue;
        }
        columns.push(col);
        names.push(format!("knot_{t}"));
    }
    let n = x.len();
    let m = Array2::from_shape_fn((n, columns.len()), |(i, j)| columns[j][i]);
    Ok((m, names))
}

/// Spline data `y = sin(6x)/(1 + x) + σ Z` on `n` equally spaced points.
pub fn gen_sine(spec: &SineSpec) -> Result<Dataset> {
    if spec.n < 2 {
        return Err(Error::Config("sine data needs at least two points".into()));
    }
    if !(spec.noise_scale >= 0.0 && spec.noise_scale.is_finite()) {
        return Err(Error::Config("noise_scale must be non-negative".into()));
    }
    let x = unit_grid(spec.n);
    let (m, names) = basis_matrix(&x, spec.basis, &spec.knots)?;
    let mut rng = seeded_rng(spec.seed);
    let y: Array1<f64> = x
        .iter()
        .map(|&xi| {
            let z: f64 = rng.sample(StandardNormal);
            sine_target(xi) + spec.noise_scale * z
        })
        .collect();
    Dataset::new(m, y)?.with_feature_names(names)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BlockSpec {
    pub n: usize,
    pub p: usize,
    pub block: usize,
    pub rho: f64,
    pub sigma2: f64,
    pub nonzero_per_block: usize,
    pub seed: u64,
}

impl Default for BlockSpec {
    fn default() -> Self {
        Self {
            n: 60,
            p: 1000,
            block: 20,
            rho: 0.95,
            sigma2: 36.0,
            nonzero_per_block: 1,
            seed: 0,
        }
    }
}

impl BlockSpec {
    /// The reduced configuration with `p = 200` (10 blocks).
    pub fn desk_scale() -> Self {
        Self {
            p: 200,
            ..Self::default()
        }
    }

    pub fn blocks(&self) -> usize {
        self.p / self.block
    }

    pub fn validate(&self) -> Result<()> {
        if self.block == 0 || self.p == 0 || !self.p.is_multiple_of(self.block) {
            return Err(Error::Config(format!(
                "p = {} is not a positive multiple of the block size {}",
                self.p, self.block
            )));
        }
        if self.n == 0 {
            return Err(Error::Config("n must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return Err(Error::Range {
                value: self.rho,
                lo: 0.0,
                hi: 1.0,
            });
        }
        if !(self.sigma2 >= 0.0 && self.sigma2.is_finite()) {
            return Err(Error::Config("sigma2 must be non-negative".into()));
        }
        if self.nonzero_per_block > self.block {
            return Err(Error::Config("more nonzero coefficients than block slots".into()));
        }
        Ok(())
    }

    /// `σ² / E(βᵀΣβ)`: every block contributes `nonzero_per_block` unit
    /// expected squared coefficients on unit-variance predictors.
    pub fn noise_to_signal(&self) -> f64 {
        self.sigma2 / (self.blocks() * self.nonzero_per_block) as f64
    }

    /// Rows with equicorrelated blocks, `x = √(1 − ρ) z + √ρ w 𝟙` per block.
    pub fn draw_design(&self, rng: &mut ChaCha8Rng, rows: usize) -> Array2<f64> {
        let (a, b) = ((1.0 - self.rho).sqrt(), self.rho.sqrt());
        let mut x = Array2::zeros((rows, self.p));
        for i in 0..rows {
            for blk in 0..self.blocks() {
                let w: f64 = rng.sample(StandardNormal);
                for j in blk * self.block..(blk + 1) * self.block {
                    let z: f64 = rng.sample(StandardNormal);
                    x[[i, j]] = a * z + b * w;
                }
            }
        }
        x
    }

    /// Coefficients: standard normal in the leading slots of each block.
    pub fn draw_beta(&self, rng: &mut ChaCha8Rng) -> Array1<f64> {
        let mut beta = Array1::zeros(self.p);
        for blk in 0..self.blocks() {
            for s in 0..self.nonzero_per_block {
                beta[blk * self.block + s] = rng.sample(StandardNormal);
            }
        }
        beta
    }
}

#[derive(Debug, Clone)]
pub struct BlockSample {
    pub data: Dataset,
    pub beta: Array1<f64>,
    /// Noise-free mean `Xβ` of the training rows.
    pub signal: Array1<f64>,
    pub noise: Array1<f64>,
}

/// Block-correlated Gaussian regression data.
pub fn gen_block(spec: &BlockSpec) -> Result<BlockSample> {
    spec.validate()?;
    let mut rng = seeded_rng(spec.seed);
    let beta = spec.draw_beta(&mut rng);
    let x = spec.draw_design(&mut rng, spec.n);
    let signal = x.dot(&beta);
    let sd = spec.sigma2.sqrt();
    let noise: Array1<f64> = (0..spec.n).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect();
    let y = &signal + &noise;
    let names = (0..spec.p).map(|j| format!("x{j}")).collect();
    Ok(BlockSample {
        data: Dataset::new(x, y)?.with_feature_names(names)?,
        beta,
        signal,
        noise,
    })
}

/// Seed for the holdout draw that accompanies training seed `seed`.
pub fn holdout_seed(seed: u64) -> u64 {
    seed ^ 0x005e_ed0f_b10c
}

/// Noise-free holdout rows for a drawn coefficient vector: `(X, Xβ)`.
pub fn gen_block_holdout(spec: &BlockSpec, beta: &Array1<f64>, rows: usize, seed: u64) -> Result<(Array2<f64>, Array1<f64>)> {
    spec.validate()?;
    let mut rng = seeded_rng(seed);
    let x = spec.draw_design(&mut rng, rows);
    let f = x.dot(beta);
    Ok((x, f))
}
