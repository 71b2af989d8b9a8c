//! Exact path solvers for LAR, the lasso and forward stagewise, with the
//! event logic and optimality certificates.

mod direction;
mod event;
mod kkt;
mod solver;

pub use direction::{lasso_move_direction, monotone_move_direction, MoveDirection};
pub use event::next_event;
pub use kkt::{kkt_certify, CoordinateCheck, KktReport};
pub use solver::{solve_path, Mode, SolverConfig};

pub(crate) use direction::{band_width, normalize, tie_band};
