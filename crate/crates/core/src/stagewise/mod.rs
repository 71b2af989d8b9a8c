//! ε-stepping forward stagewise and the generalized monotone stagewise for
//! convex losses.

mod glm;
mod incremental;

pub use glm::{
    default_response, glm_move_direction, integrate_monotone_path, newton_direction, total_loss,
    IntegratorConfig,
};
pub use incremental::{fs_epsilon, generalized_incremental, monotone_incremental, StagewiseConfig};
