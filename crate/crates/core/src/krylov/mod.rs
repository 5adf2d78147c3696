//! Preconditioned Krylov solvers: CG with Lanczos spectral estimates on the
//! benign interface space, restarted GMRES and the block-Schur baseline.

mod blockschur;
mod pcg;

pub use blockschur::BlockSchurPrec;
pub use pcg::{gmres, pcg, KrylovReport, LinOp};
