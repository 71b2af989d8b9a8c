//! Regularization paths for least angle regression, the lasso and forward
//! stagewise regression.
//!
//! The exact solvers in [`lars`] trace the piecewise-linear coefficient paths
//! of LAR, the lasso and infinitesimal forward stagewise (the monotone lasso).
//! All three work in the expanded design `[X : -X]`, where every coefficient is
//! non-negative and the lasso becomes a positive lasso; forward stagewise is
//! the variant whose coordinates are additionally non-decreasing.
//!
//! [`stagewise`] holds the ε-stepping counterparts, including the generalized
//! monotone stagewise for convex losses from [`loss`]. [`monotone`] checks the
//! signed-subset condition under which all three exact paths coincide, and
//! [`experiment`] provides the data generators and path diagnostics.

pub mod data;
pub mod error;
pub mod experiment;
pub mod io;
pub mod lars;
pub mod linalg;
pub mod loss;
pub mod monotone;
pub mod par;
pub mod stagewise;

pub use data::{
    collapse, l1_norm, Dataset, ExpandedDesign, Method, Parametrization, PiecewiseLinearPath,
    StandardizedDesign,
};
pub use error::{Error, ErrorCategory, Result};
pub use lars::{kkt_certify, solve_path, Mode, SolverConfig};
pub use loss::{logistic_loss, squared_error_loss, LossModel};
pub use par::Parallelism;
