//! Balancing domain decomposition by constraints: primal spaces, group
//! change of basis, scaling, the coarse problem and the preconditioner.

mod primal;
mod state;

pub use primal::{build_primal_rows, rigid_mode_dofs, CoarseMode, PrimalRows, ScalingMode};
pub use state::{
    attach_deluxe, build_bddc_state, build_group_bases, dense_schur, BddcState, GroupBasis,
    SubPrecon,
};
