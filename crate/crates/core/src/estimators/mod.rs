//! A posteriori estimators, oscillations and the exact energy error.

pub mod energy;
pub mod problem;
pub mod projection;
pub mod residual;

pub use energy::{effectivity, energy_error};
pub use problem::{AmbientVecFn, ManufacturedProblem};
pub use projection::{l2_project_local, projection_residual_sq, Projector};
pub use residual::{estimate, interior_residual, jump_residual, IndicatorSet};
