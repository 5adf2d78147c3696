//! Local discrete forms on one cell.

use crate::poly::dim_p3;
use crate::vem::ElementOps;
use crate::{lit, Scalar};
use nalgebra::{DMatrix, DVector, Point3, Vector3};

/// Viscous block ν·(consistency + stabilization).
///
/// The consistency term integrates Π⁰_{k−1}ε(u) : Π⁰_{k−1}ε(v); the
/// stabilization applies the diagonal D-recipe on the Π∇ complement, with
/// each weight floored by the mean consistency diagonal.
pub fn local_viscous<S: Scalar>(ops: &ElementOps<S>, viscosity: S) -> DMatrix<S> {
    let n = ops.n_dof;
    let nkm1 = dim_p3(ops.k as i64 - 1);
    let mass = ops.mass.view((0, 0), (nkm1, nkm1));
    let mut kc = DMatrix::<S>::zeros(n, n);
    for d in 0..3 {
        for j in 0..3 {
            let eps = (&ops.grad_proj[3 * d + j] + &ops.grad_proj[3 * j + d]) * lit::<S>(0.5);
            kc += eps.transpose() * (&mass * eps);
        }
    }
    // D-recipe weights on the projector complement
    let proj = &ops.dof_of_poly * &ops.pi_nabla;
    let mut complement = DMatrix::<S>::identity(n, n) - proj;
    let mean_diag = kc.diagonal().sum() / S::from_usize(n).unwrap();
    for i in 0..n {
        let w = kc[(i, i)].max(mean_diag);
        for j in 0..n {
            complement[(i, j)] *= w.sqrt();
        }
    }
    let stab = complement.transpose() * &complement;
    (kc + stab) * viscosity
}

/// Divergence block: entry (α, i) = ∫_K div φ_i · m_α, exact.
pub fn local_divergence<S: Scalar>(ops: &ElementOps<S>) -> DMatrix<S> {
    let nkm1 = dim_p3(ops.k as i64 - 1);
    let mass = ops.mass.view((0, 0), (nkm1, nkm1));
    &mass * &ops.div_coeff
}

/// Load vector: ∫_K Π⁰_k f · φ_i = (moments of f) · (Π⁰_k coefficients).
pub fn local_load<S: Scalar>(
    ops: &ElementOps<S>,
    f: &dyn Fn(&Point3<S>) -> Vector3<S>,
) -> DVector<S> {
    let nk = dim_p3(ops.k as i64);
    let mut fmom = DVector::<S>::zeros(3 * nk);
    for (q, p) in ops.quad.nodes.iter().enumerate() {
        let w = ops.quad.weights[q];
        let fv = f(p);
        for alpha in 0..nk {
            let m = ops.basis.eval(p, alpha);
            for d in 0..3 {
                fmom[d * nk + alpha] += w * fv[d] * m;
            }
        }
    }
    ops.pi0.transpose() * fmom
}
