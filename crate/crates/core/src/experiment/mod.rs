//! Data generators, path diagnostics and Monte Carlo studies.

mod diagnostics;
mod generators;
mod study;

pub use diagnostics::{
    compare_paths, epsilon_sweep, final_norm, halving, rss_at, rss_profile, test_mse, total_variation_at_norm,
    CurvePoint, PathComparison, SweepRow, DIVERGENCE_THRESHOLD,
};
pub use generators::{
    basis_matrix, gen_block, gen_block_holdout, gen_sine, holdout_seed, seeded_rng, sine_target, unit_grid, Basis, BlockSample,
    BlockSpec, SineSpec,
};
pub use study::{block_study, noise_to_signal_study, BlockReplicate, BlockStudyConfig, NoiseSignalSummary};
