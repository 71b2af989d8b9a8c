use serde::{Deserialize, Serialize};

use super::diagnostics::{final_norm, test_mse, total_variation_at_norm};
use super::generators::{gen_block, gen_block_holdout, holdout_seed, BlockSpec};
use crate::data::ExpandedDesign;
use crate::error::{Error, Result};
use crate::lars::{solve_path, Mode, SolverConfig};
use crate::par::Parallelism;

fn variance(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseSignalSummary {
    pub replications: usize,
    pub analytic_ratio: f64,
    /// Pooled sample noise variance over pooled sample signal variance.
    pub empirical_ratio: f64,
    /// Mean sample variance of `Xβ` divided by its expectation.
    pub signal_variance_ratio: f64,
}

/// Monte Carlo check of the block simulation's noise-to-signal ratio.
pub fn noise_to_signal_study(spec: &BlockSpec, seeds: &[u64], parallelism: Parallelism) -> Result<NoiseSignalSummary> {
    spec.validate()?;
    if seeds.is_empty() {
        return Err(Error::Config("no seeds".into()));
    }
    let per_seed: Vec<Result<(f64, f64)>> = parallelism.map(seeds, |&seed| {
        let s = gen_block(&BlockSpec { seed, ..spec.clone() })?;
        Ok((
            variance(s.noise.as_slice().unwrap()),
            variance(s.signal.as_slice().unwrap()),
        ))
    });
    let mut noise = 0.0;
    let mut signal = 0.0;
    for r in per_seed {
        let (a, b) = r?;
        noise += a;
        signal += b;
    }
    let k = seeds.len() as f64;
    let expected_signal = (spec.blocks() * spec.nonzero_per_block) as f64;
    Ok(NoiseSignalSummary {
        replications: seeds.len(),
        analytic_ratio: spec.noise_to_signal(),
        empirical_ratio: noise / signal,
        signal_variance_ratio: signal / k / expected_signal,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockReplicate {
    pub seed: u64,
    /// Smaller of the two final collapsed L1 norms.
    pub common_norm: f64,
    pub tv_lasso: f64,
    pub tv_fs0: f64,
    pub min_mse_lasso: f64,
    pub min_mse_fs0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockStudyConfig {
    pub spec: BlockSpec,
    pub holdout_rows: usize,
    pub grid: usize,
}

impl Default for BlockStudyConfig {
    fn default() -> Self {
        Self {
            spec: BlockSpec::desk_scale(),
            holdout_rows: 2000,
            grid: 101,
        }
    }
}

/// Lasso against forward stagewise on block-correlated data: total
/// variation at a common norm and minimum holdout error, one row per seed.
pub fn block_study(config: &BlockStudyConfig, seeds: &[u64], parallelism: Parallelism) -> Result<Vec<BlockReplicate>> {
    config.spec.validate()?;
    parallelism
        .map(seeds, |&seed| replicate(config, seed))
        .into_iter()
        .collect()
}

fn replicate(config: &BlockStudyConfig, seed: u64) -> Result<BlockReplicate> {
    let spec = BlockSpec {
        seed,
        ..config.spec.clone()
    };
    let sample = gen_block(&spec)?;
    let design = ExpandedDesign::new(sample.data.standardize()?);
    let lasso = solve_path(&design, &SolverConfig::new(Mode::Lasso))?;
    let fs0 = solve_path(&design, &SolverConfig::new(Mode::Fs0))?;
    let common_norm = final_norm(&lasso).min(final_norm(&fs0));
    let tv = |p| {
        total_variation_at_norm(p, common_norm)
            .ok_or_else(|| Error::InternalConsistency("common norm not reached".into()))
    };
    let (x_test, f_test) = gen_block_holdout(&spec, &sample.beta, config.holdout_rows, holdout_seed(seed))?;
    let min_mse = |p| -> Result<f64> {
        let curve = test_mse(design.base(), p, x_test.view(), f_test.view(), config.grid)?;
        Ok(curve.iter().map(|c| c.value).fold(f64::INFINITY, f64::min))
    };
    Ok(BlockReplicate {
        seed,
        common_norm,
        tv_lasso: tv(&lasso)?,
        tv_fs0: tv(&fs0)?,
        min_mse_lasso: min_mse(&lasso)?,
        min_mse_fs0: min_mse(&fs0)?,
    })
}
