//! Benchmark problems and the suite runner.

mod manufactured;
mod sinker;

pub use manufactured::{
    body_force, exact_pressure, exact_pressure_s, exact_velocity, exact_velocity_s,
    manufactured_dirichlet, manufactured_problem, traction,
};
pub use sinker::{multi_sinker_problem, SinkerField, SINKER_RADIUS, SINKER_WIDTH};
