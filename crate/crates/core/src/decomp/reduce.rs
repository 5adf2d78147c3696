//! The statically condensed interface saddle operator
//! [Ŝ_Γ B̂_0Γᵀ; B̂_0Γ 0], its reduced right-hand side and the interior
//! back-substitution.

use super::interface::InterfaceLayout;
use super::subdomain::{build_subdomain_ops, SubdomainOps};
use crate::assembly::SaddleSystem;
use crate::mesh::PolyMesh;
use crate::vem::{DofMap, FaceOps};
use crate::{Result, Scalar};
use rayon::prelude::*;

pub struct InterfaceOperator<S: Scalar> {
    pub subs: Vec<SubdomainOps<S>>,
    pub n_gamma: usize,
    pub n_q0: usize,
}

impl<S: Scalar> InterfaceOperator<S> {
    pub fn build<'a>(
        mesh: &PolyMesh<S>,
        dm: &DofMap,
        face_ops: &[FaceOps<S>],
        sys: &SaddleSystem<S>,
        layout: &'a InterfaceLayout,
        viscosity: &[S],
    ) -> Result<Self> {
        let subs: Result<Vec<_>> = (0..layout.partition.n_subdomains)
            .into_par_iter()
            .map(|s| build_subdomain_ops(mesh, dm, face_ops, sys, layout, s, viscosity))
            .collect();
        Ok(Self {
            subs: subs?,
            n_gamma: layout.n_gamma(),
            n_q0: layout.n_q0,
        })
    }

    pub fn system_size(&self) -> usize {
        self.n_gamma + self.n_q0
    }

    /// Matrix-free application of the interface saddle operator.
    pub fn apply(&self, layout: &InterfaceLayout, x: &[S]) -> Vec<S> {
        let (u_g, p0) = x.split_at(self.n_gamma);
        let parts: Vec<(usize, Vec<S>, Option<S>)> = self
            .subs
            .par_iter()
            .map(|sub| {
                let w: Vec<S> = sub.gamma.iter().map(|&gi| u_g[gi]).collect();
                let mut y = sub.apply_schur(&w);
                let mut flux = None;
                if let Some(b0) = &sub.b0_row {
                    let q0 = p0[layout.q0_index[sub.sub]];
                    for (l, &b) in b0.iter().enumerate() {
                        y[l] += b * q0;
                    }
                    flux = Some(b0.iter().zip(&w).fold(S::zero(), |a, (&b, &v)| a + b * v));
                }
                (sub.sub, y, flux)
            })
            .collect();
        let mut out = vec![S::zero(); self.system_size()];
        for (s, y, flux) in parts {
            let sub = &self.subs[s];
            for (l, &gi) in sub.gamma.iter().enumerate() {
                out[gi] += y[l];
            }
            if let Some(f) = flux {
                out[self.n_gamma + layout.q0_index[s]] = f;
            }
        }
        out
    }

    /// Reduced right-hand side ĝ of the interface problem.
    pub fn reduced_rhs(&self, layout: &InterfaceLayout, sys: &SaddleSystem<S>) -> Vec<S> {
        let mut g = vec![S::zero(); self.system_size()];
        for (gi, &gdof) in layout.interface_dofs.iter().enumerate() {
            g[gi] = sys.rhs_u[sys.global_to_free[gdof]];
        }
        let parts: Vec<(usize, Vec<S>, Option<S>)> = self
            .subs
            .par_iter()
            .map(|sub| {
                let (f_i, g_p, g0) = local_sources(sub, sys);
                let ni = sub.interior.len();
                let mut rhs = vec![S::zero(); ni + sub.pressure.len()];
                rhs[..ni].copy_from_slice(&f_i);
                rhs[ni..].copy_from_slice(&g_p);
                let z = sub.k_int.solve(&rhs);
                // condensation term −[A_ΓI B_IΓᵀ] K⁻¹ [f_I; g_p]
                let mut y = sub.a_gi.mul_vec(&z[..ni]);
                sub.b_ig.mul_transpose_vec_add(&z[ni..], &mut y);
                (sub.sub, y, g0)
            })
            .collect();
        for (s, y, g0) in parts {
            let sub = &self.subs[s];
            for (l, &gi) in sub.gamma.iter().enumerate() {
                g[gi] -= y[l];
            }
            if let Some(g0) = g0 {
                g[self.n_gamma + layout.q0_index[s]] = g0;
            }
        }
        g
    }

    /// Recover the full solution from interface values: interior solves plus
    /// the raw-pressure reconstruction.
    pub fn expand(
        &self,
        layout: &InterfaceLayout,
        sys: &SaddleSystem<S>,
        x: &[S],
    ) -> (Vec<S>, Vec<S>) {
        let (u_g, p0) = x.split_at(self.n_gamma);
        let mut u = sys.bc_values.clone();
        for (gi, &gdof) in layout.interface_dofs.iter().enumerate() {
            u[gdof] = u_g[gi];
        }
        let mut p = vec![S::zero(); sys.n_pressure];
        let parts: Vec<(usize, Vec<S>, Vec<S>)> = self
            .subs
            .par_iter()
            .map(|sub| {
                let (f_i, g_p, _) = local_sources(sub, sys);
                let w: Vec<S> = sub.gamma.iter().map(|&gi| u_g[gi]).collect();
                let (ui, pt) = sub.interior_solve(&w, &f_i, &g_p);
                (sub.sub, ui, pt)
            })
            .collect();
        for (s, ui, pt) in parts {
            let sub = &self.subs[s];
            for (l, &g) in sub.interior.iter().enumerate() {
                u[g] = ui[l];
            }
            for (l, &q) in sub.pressure.iter().enumerate() {
                p[q] = pt[l];
            }
            if sub.has_q0 {
                // constant part: p̃_0 − Σ_j p̃_j μ_j / |Ω_s| on every cell's
                // constant slot
                let q0 = p0[layout.q0_index[s]];
                let correction = sub
                    .mu
                    .iter()
                    .zip(&pt)
                    .fold(S::zero(), |a, (&m, &v)| a + m * v)
                    / sub.volume;
                for &slot in &sub.m0_slots {
                    p[slot] += q0 - correction;
                }
            }
        }
        (u, p)
    }
}

fn local_sources<S: Scalar>(sub: &SubdomainOps<S>, sys: &SaddleSystem<S>) -> (Vec<S>, Vec<S>, Option<S>) {
    let f_i: Vec<S> = sub
        .interior
        .iter()
        .map(|&g| sys.rhs_u[sys.global_to_free[g]])
        .collect();
    // transformed pressure sources: g̃_j = g_j − (μ_j/V)·Σ_{m0} g
    let g0: S = sub
        .m0_slots
        .iter()
        .map(|&q| sys.rhs_p[q])
        .fold(S::zero(), |a, b| a + b);
    let g_p: Vec<S> = sub
        .pressure
        .iter()
        .enumerate()
        .map(|(l, &q)| {
            let mut v = sys.rhs_p[q];
            if sub.has_q0 {
                v -= sub.mu[l] / sub.volume * g0;
            }
            v
        })
        .collect();
    (f_i, g_p, sub.has_q0.then_some(g0))
}
