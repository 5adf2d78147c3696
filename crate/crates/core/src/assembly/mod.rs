//! Discrete forms, boundary conditions, the assembled saddle-point system
//! and error measurement.

mod global;
mod local;
mod problem;

pub use global::{assemble, compute_errors, dirichlet_dofs, SaddleSystem};
pub use local::{local_divergence, local_load, local_viscous};
pub use problem::{FieldFn, StokesProblem, VecFn};
