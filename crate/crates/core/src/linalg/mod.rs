//! Sparse and dense linear algebra kernels shared by assembly and solvers.

mod dense;
mod ldl;
mod sparse;

pub use dense::{
    parallel_sum, pivoted_gram_basis, split_rowspace_nullspace, sym_generalized_eigen, GramBasis,
};
pub use ldl::LdlSolver;
pub use sparse::{CooBuilder, CsrMatrix};
