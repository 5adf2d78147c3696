//! BDDC preconditioner state and application.
//!
//! Per macro entity the filtered constraint rows give an orthonormal primal
//! direction basis R and its orthonormal complement N (the dual directions);
//! the change of basis is the orthogonal map [R | N]. Subdomain corrections
//! solve constrained Neumann saddle problems (interior + interface + zero-mean
//! pressures, primal constraints via multipliers), the coarse level assembles
//! the energy-minimal basis from the multipliers and couples the subdomain
//! constant pressures through the net-flux functionals of the coarse traces.

use super::primal::PrimalRows;
use crate::decomp::{InterfaceLayout, InterfaceOperator, MacroKind};
use crate::linalg::{split_rowspace_nullspace, CooBuilder, LdlSolver};
use crate::{lit, Error, Result, Scalar};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

#[derive(Clone, Debug)]
pub struct GroupBasis<S: Scalar> {
    pub macro_idx: usize,
    /// Interface indices of the group dofs, ascending.
    pub gamma: Vec<usize>,
    /// Orthonormal primal directions (m × r).
    pub rowspace: DMatrix<S>,
    /// Orthonormal dual complement (m × (m−r)).
    pub nullspace: DMatrix<S>,
    /// Global primal ids of the r primal coordinates.
    pub primal_ids: Vec<usize>,
    /// Multiplicity weight 1/card.
    pub theta: S,
    /// Deluxe dual-block weights per sharing subdomain, aligned with
    /// `macros[macro_idx].subdomains`.
    pub deluxe: Option<Vec<DMatrix<S>>>,
}

pub struct SubPrecon<S: Scalar> {
    pub sub: usize,
    /// Local Γ indices (ascending interface numbering).
    pub gamma: Vec<usize>,
    pub n_int: usize,
    pub n_gamma: usize,
    pub n_c: usize,
    /// Constrained Neumann factorization over (interior, Γ, multipliers).
    pub solver: LdlSolver<S>,
    /// Coarse trace basis: n_gamma × n_c.
    pub phi: DMatrix<S>,
    /// Global primal id per local constraint.
    pub primal_ids: Vec<usize>,
    /// Local coarse block ΦᵀSΦ.
    pub sc: DMatrix<S>,
    /// Net flux of each coarse basis function (q0 subdomains).
    pub b0_phi: Option<Vec<S>>,
    /// Groups on this subdomain: (group index, local positions in gamma,
    /// side = position of this subdomain in the macro's sharing list).
    pub groups: Vec<(usize, Vec<usize>, usize)>,
}

pub struct BddcState<S: Scalar> {
    pub groups: Vec<GroupBasis<S>>,
    pub subs: Vec<SubPrecon<S>>,
    pub n_primal: usize,
    pub n_gamma: usize,
    pub n_q0: usize,
    pub q0_index: Vec<usize>,
    /// Dense coarse factorization over (primal, p0 [, gauge]).
    coarse: nalgebra::LU<S, nalgebra::Dyn, nalgebra::Dyn>,
    coarse_dim: usize,
    gauged: bool,
}

/// Filtered group bases from raw constraint rows.
pub fn build_group_bases<S: Scalar>(
    layout: &InterfaceLayout,
    rows: &PrimalRows<S>,
) -> (Vec<GroupBasis<S>>, usize) {
    let mut groups = Vec::with_capacity(layout.macros.len());
    let mut n_primal = 0;
    for (mi, m) in layout.macros.iter().enumerate() {
        let gamma: Vec<usize> = m.dofs.iter().map(|&g| layout.gamma_index[g]).collect();
        let raw = &rows.rows[mi];
        let (rowspace, nullspace) = if m.kind == MacroKind::Vertex {
            (
                DMatrix::identity(m.dofs.len(), m.dofs.len()),
                DMatrix::zeros(m.dofs.len(), 0),
            )
        } else {
            split_rowspace_nullspace(raw, lit::<S>(1e-10))
        };
        let r = rowspace.ncols();
        let primal_ids: Vec<usize> = (n_primal..n_primal + r).collect();
        n_primal += r;
        groups.push(GroupBasis {
            macro_idx: mi,
            gamma,
            rowspace,
            nullspace,
            primal_ids,
            theta: S::one() / S::from_usize(m.subdomains.len()).unwrap(),
            deluxe: None,
        });
    }
    (groups, n_primal)
}

/// Dense subdomain Schur complement on its interface dofs
/// (column-by-column application; desk scale only).
pub fn dense_schur<S: Scalar>(op: &InterfaceOperator<S>, sub: usize) -> DMatrix<S> {
    let s = &op.subs[sub];
    let n = s.n_gamma_local();
    let cols: Vec<DVector<S>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut e = vec![S::zero(); n];
            e[j] = S::one();
            DVector::from_vec(s.apply_schur(&e))
        })
        .collect();
    let mut m = DMatrix::zeros(n, n);
    for (j, c) in cols.iter().enumerate() {
        m.set_column(j, c);
    }
    // symmetrize roundoff
    let mt = m.transpose();
    (m + mt) * lit::<S>(0.5)
}

/// Attach deluxe weights to the macro-face groups: for a face shared by
/// (i, j), W^{(k)} = (S^{(i)}_FF + S^{(j)}_FF)⁻¹ S^{(k)}_FF on the dual
/// coordinates of the group. Macro edges keep multiplicity weights.
pub fn attach_deluxe<S: Scalar>(
    groups: &mut [GroupBasis<S>],
    layout: &InterfaceLayout,
    op: &InterfaceOperator<S>,
    dense: &[DMatrix<S>],
) -> Result<()> {
    for g in groups.iter_mut() {
        let m = &layout.macros[g.macro_idx];
        if m.kind != MacroKind::Face || g.nullspace.ncols() == 0 {
            continue;
        }
        let mut blocks = Vec::with_capacity(2);
        for &s in &m.subdomains {
            let sub = &op.subs[s];
            // positions of the group dofs on this subdomain's interface
            let pos: Vec<usize> = g
                .gamma
                .iter()
                .map(|&gi| sub.gamma.binary_search(&gi).expect("face dof on subdomain"))
                .collect();
            let d = &dense[s];
            let mg = DMatrix::from_fn(pos.len(), pos.len(), |a, b| d[(pos[a], pos[b])]);
            // dual-coordinate principal minor Nᵀ S N
            blocks.push(g.nullspace.transpose() * &mg * &g.nullspace);
        }
        let sum = &blocks[0] + &blocks[1];
        let lu = sum.lu();
        let mut weights = Vec::with_capacity(2);
        for b in &blocks {
            let w = lu.solve(b).ok_or_else(|| {
                Error::Factorization("singular deluxe face block sum".to_string())
            })?;
            weights.push(w);
        }
        // partition of unity check
        let id_err = (&weights[0] + &weights[1] - DMatrix::identity(blocks[0].nrows(), blocks[0].nrows()))
            .amax();
        if id_err.to_f64_lossy() > 1e-12 * (1.0 + weights[0].amax().to_f64_lossy()) {
            return Err(Error::Factorization(format!(
                "deluxe partition of unity violated: {id_err:?}"
            )));
        }
        g.deluxe = Some(weights);
    }
    Ok(())
}

pub fn build_bddc_state<S: Scalar>(
    layout: &InterfaceLayout,
    op: &InterfaceOperator<S>,
    groups: Vec<GroupBasis<S>>,
    n_primal: usize,
    pure_dirichlet: bool,
) -> Result<BddcState<S>> {
    // per-subdomain group attachments
    let nsub = layout.partition.n_subdomains;
    let mut sub_groups: Vec<Vec<(usize, Vec<usize>, usize)>> = vec![Vec::new(); nsub];
    for (gi, g) in groups.iter().enumerate() {
        let m = &layout.macros[g.macro_idx];
        for (side, &s) in m.subdomains.iter().enumerate() {
            let pos: Vec<usize> = g
                .gamma
                .iter()
                .map(|&idx| op.subs[s].gamma.binary_search(&idx).expect("group on sub"))
                .collect();
            sub_groups[s].push((gi, pos, side));
        }
    }

    let subs: Result<Vec<SubPrecon<S>>> = (0..nsub)
        .into_par_iter()
        .map(|s| build_sub_precon(layout, op, &groups, &sub_groups[s], s))
        .collect();
    let subs = subs?;

    // coarse saddle: primal × primal, p0 coupling, optional global gauge
    let n_q0 = layout.n_q0;
    let gauged = pure_dirichlet && n_q0 > 0;
    let dim = n_primal + n_q0 + gauged as usize;
    let mut coarse = DMatrix::<S>::zeros(dim, dim);
    for sub in &subs {
        for (a, &pa) in sub.primal_ids.iter().enumerate() {
            for (b, &pb) in sub.primal_ids.iter().enumerate() {
                coarse[(pa, pb)] += sub.sc[(a, b)];
            }
        }
        if let Some(b0) = &sub.b0_phi {
            let row = n_primal + layout.q0_index[sub.sub];
            for (a, &pa) in sub.primal_ids.iter().enumerate() {
                coarse[(row, pa)] += b0[a];
                coarse[(pa, row)] += b0[a];
            }
        }
    }
    if gauged {
        for sub in &subs {
            if op.subs[sub.sub].has_q0 {
                let q = n_primal + layout.q0_index[sub.sub];
                coarse[(dim - 1, q)] = op.subs[sub.sub].volume;
                coarse[(q, dim - 1)] = op.subs[sub.sub].volume;
            }
        }
    }
    let coarse_lu = coarse.clone().lu();
    // singularity check: the coarse operator must reproduce a random rhs
    {
        let probe = DVector::from_fn(dim, |i, _| lit::<S>(((i * 7919 + 13) % 101) as f64 / 101.0));
        match coarse_lu.solve(&probe) {
            Some(x) => {
                let resid = (&coarse * &x - &probe).amax();
                let scale = probe.amax() * (S::one() + coarse.amax());
                if resid.to_f64_lossy() > 1e-6 * scale.to_f64_lossy() {
                    return Err(Error::CoarseSingular(format!(
                        "coarse residual {resid:?} on probe"
                    )));
                }
            }
            None => {
                return Err(Error::CoarseSingular(
                    "coarse factorization failed".to_string(),
                ))
            }
        }
    }

    Ok(BddcState {
        groups,
        subs,
        n_primal,
        n_gamma: layout.n_gamma(),
        n_q0,
        q0_index: layout.q0_index.clone(),
        coarse: coarse_lu,
        coarse_dim: dim,
        gauged,
    })
}

fn build_sub_precon<S: Scalar>(
    _layout: &InterfaceLayout,
    op: &InterfaceOperator<S>,
    groups: &[GroupBasis<S>],
    my_groups: &[(usize, Vec<usize>, usize)],
    s: usize,
) -> Result<SubPrecon<S>> {
    let sub = &op.subs[s];
    let ni = sub.interior.len();
    let np = sub.pressure.len();
    let ngl = sub.n_gamma_local();
    let n_int = ni + np;

    // constraint rows over local Γ dofs and their global primal ids
    let mut c_rows: Vec<(usize, Vec<(usize, S)>)> = Vec::new();
    for (gi, pos, _) in my_groups {
        let g = &groups[*gi];
        for (r, &pid) in g.primal_ids.iter().enumerate() {
            let entries: Vec<(usize, S)> = pos
                .iter()
                .enumerate()
                .filter_map(|(local, &p)| {
                    let v = g.rowspace[(local, r)];
                    (v != S::zero()).then_some((p, v))
                })
                .collect();
            c_rows.push((pid, entries));
        }
    }
    let n_c = c_rows.len();

    // assemble the constrained Neumann KKT matrix
    let n = n_int + ngl + n_c;
    let mut coo = CooBuilder::new(n, n);
    // interior saddle blocks (raw CSR kept on the subdomain ops)
    for (i, j, v) in sub.a_ii.iter() {
        coo.push(i, j, v);
    }
    for (q, j, v) in sub.b_ii.iter() {
        coo.push(ni + q, j, v);
        coo.push(j, ni + q, v);
    }
    // interface coupling
    for (g, j, v) in sub.a_gi.iter() {
        coo.push(n_int + g, j, v);
        coo.push(j, n_int + g, v);
    }
    for (q, g, v) in sub.b_ig.iter() {
        coo.push(ni + q, n_int + g, v);
        coo.push(n_int + g, ni + q, v);
    }
    for (g, h, v) in sub.a_gg.iter() {
        coo.push(n_int + g, n_int + h, v);
    }
    for (c, (_, entries)) in c_rows.iter().enumerate() {
        for &(p, v) in entries {
            coo.push(n_int + ngl + c, n_int + p, v);
            coo.push(n_int + p, n_int + ngl + c, v);
        }
    }
    let mut signs = vec![1i8; n];
    for i in ni..n_int {
        signs[i] = -1;
    }
    for i in (n_int + ngl)..n {
        signs[i] = -1;
    }
    let solver = LdlSolver::new(coo.build(), &signs)?;

    // energy-minimal coarse basis from the multiplier solves
    let mut phi = DMatrix::<S>::zeros(ngl, n_c);
    let mut sc = DMatrix::<S>::zeros(n_c, n_c);
    for c in 0..n_c {
        let mut rhs = vec![S::zero(); n];
        rhs[n_int + ngl + c] = S::one();
        let z = solver.solve(&rhs);
        for g in 0..ngl {
            phi[(g, c)] = z[n_int + g];
        }
        for (cc, zc) in z[n_int + ngl..].iter().enumerate() {
            // S_c = −Λ from K Φ + Cᵀ Λ = 0
            sc[(cc, c)] = -*zc;
        }
    }
    let sct = sc.transpose();
    sc = (sc + sct) * lit::<S>(0.5);

    let b0_phi = sub.b0_row.as_ref().map(|b0| {
        (0..n_c)
            .map(|c| {
                b0.iter()
                    .zip(phi.column(c).iter())
                    .fold(S::zero(), |a, (&b, &p)| a + b * p)
            })
            .collect()
    });

    Ok(SubPrecon {
        sub: s,
        gamma: sub.gamma.clone(),
        n_int,
        n_gamma: ngl,
        n_c,
        solver,
        phi,
        primal_ids: c_rows.into_iter().map(|(pid, _)| pid).collect(),
        sc,
        b0_phi,
        groups: my_groups.to_vec(),
    })
}

impl<S: Scalar> BddcState<S> {
    pub fn system_size(&self) -> usize {
        self.n_gamma + self.n_q0
    }

    /// Whether the coarse problem carries the global mean-pressure gauge.
    pub fn is_gauged(&self) -> bool {
        self.gauged
    }

    /// Scaled restriction D^{(s)} (or its transpose) applied to a local
    /// interface vector of subdomain `sp`.
    fn apply_scaling(&self, sp: &SubPrecon<S>, x: &[S], transpose: bool) -> Vec<S> {
        let mut out = x.to_vec();
        for (gi, pos, side) in &sp.groups {
            let g = &self.groups[*gi];
            let m = pos.len();
            let mut local = DVector::<S>::zeros(m);
            for (l, &p) in pos.iter().enumerate() {
                local[l] = x[p];
            }
            // primal part scaled by θ, dual part by the deluxe weights or θ
            let prim = g.rowspace.transpose() * &local;
            let dual = g.nullspace.transpose() * &local;
            let dual_scaled = match &g.deluxe {
                Some(ws) => {
                    let w = &ws[*side];
                    if transpose {
                        w.transpose() * dual
                    } else {
                        w * dual
                    }
                }
                None => dual * g.theta,
            };
            let back = &g.rowspace * (prim * g.theta) + &g.nullspace * dual_scaled;
            for (l, &p) in pos.iter().enumerate() {
                out[p] = back[l];
            }
        }
        out
    }

    /// z = M⁻¹ r on the interface saddle space (Γ velocities + p0).
    pub fn apply(&self, r: &[S]) -> Vec<S> {
        let (r_u, r_p0) = r.split_at(self.n_gamma);
        // local scaled residuals, dual corrections and coarse contributions
        let parts: Vec<(usize, Vec<S>, DVector<S>)> = self
            .subs
            .par_iter()
            .map(|sp| {
                let local: Vec<S> = sp.gamma.iter().map(|&gi| r_u[gi]).collect();
                let d = self.apply_scaling(sp, &local, true);
                let rc = sp.phi.transpose() * DVector::from_column_slice(&d);
                let n = sp.n_int + sp.n_gamma + sp.n_c;
                let mut rhs = vec![S::zero(); n];
                for (g, &v) in d.iter().enumerate() {
                    rhs[sp.n_int + g] = v;
                }
                let z = sp.solver.solve(&rhs);
                let v_dual = z[sp.n_int..sp.n_int + sp.n_gamma].to_vec();
                (sp.sub, v_dual, rc)
            })
            .collect();

        let mut r_c = DVector::<S>::zeros(self.coarse_dim);
        for (s, _, rc) in &parts {
            let sp = &self.subs[*s];
            for (a, &pid) in sp.primal_ids.iter().enumerate() {
                r_c[pid] += rc[a];
            }
        }
        for (i, &v) in r_p0.iter().enumerate() {
            r_c[self.n_primal + i] = v;
        }
        let y = self
            .coarse
            .solve(&r_c)
            .expect("coarse solve after successful factorization");

        let mut z_u = vec![S::zero(); self.n_gamma];
        for (s, v_dual, _) in &parts {
            let sp = &self.subs[*s];
            // add the coarse trace component
            let mut corr = v_dual.clone();
            let mut yloc = DVector::<S>::zeros(sp.n_c);
            for (a, &pid) in sp.primal_ids.iter().enumerate() {
                yloc[a] = y[pid];
            }
            let phi_y = &sp.phi * yloc;
            for g in 0..sp.n_gamma {
                corr[g] += phi_y[g];
            }
            let scaled = self.apply_scaling(sp, &corr, false);
            for (g, &gi) in sp.gamma.iter().enumerate() {
                z_u[gi] += scaled[g];
            }
        }
        let mut z = z_u;
        for i in 0..self.n_q0 {
            z.push(y[self.n_primal + i]);
        }
        z
    }

    /// Average operator E_D on a partially assembled vector (one local Γ
    /// vector per subdomain, consistent at primal coordinates).
    pub fn average(&self, locals: &[Vec<S>]) -> Vec<Vec<S>> {
        let mut global = vec![S::zero(); self.n_gamma];
        for sp in &self.subs {
            let scaled = self.apply_scaling(sp, &locals[sp.sub], false);
            for (g, &gi) in sp.gamma.iter().enumerate() {
                global[gi] += scaled[g];
            }
        }
        self.subs
            .iter()
            .map(|sp| sp.gamma.iter().map(|&gi| global[gi]).collect())
            .collect()
    }

    /// Project a local interface vector onto the dual (constraint-free)
    /// subspace of subdomain `s`.
    pub fn project_dual(&self, s: usize, x: &[S]) -> Vec<S> {
        let sp = &self.subs[s];
        let mut out = x.to_vec();
        for (gi, pos, _) in &sp.groups {
            let g = &self.groups[*gi];
            let m = pos.len();
            let mut local = DVector::<S>::zeros(m);
            for (l, &p) in pos.iter().enumerate() {
                local[l] = x[p];
            }
            let dual = &g.nullspace * (g.nullspace.transpose() * &local);
            for (l, &p) in pos.iter().enumerate() {
                out[p] = dual[l];
            }
        }
        out
    }

    /// Net-flux violations of dual vectors and their averages
    /// (the no-net-flux condition). Returns the max relative violation.
    pub fn verify_benign(&self, op: &InterfaceOperator<S>, vectors: &[Vec<S>]) -> S {
        let mut worst = S::zero();
        for v in vectors {
            assert_eq!(v.len(), self.n_gamma);
            let locals: Vec<Vec<S>> = self
                .subs
                .iter()
                .map(|sp| {
                    let local: Vec<S> = sp.gamma.iter().map(|&gi| v[gi]).collect();
                    self.project_dual(sp.sub, &local)
                })
                .collect();
            let norm = v
                .iter()
                .fold(S::zero(), |a, &b| a.max(b.abs()))
                .max(lit::<S>(1e-300));
            let averaged = self.average(&locals);
            for sp in &self.subs {
                if let Some(b0) = &op.subs[sp.sub].b0_row {
                    for x in [&locals[sp.sub], &averaged[sp.sub]] {
                        let flux = b0
                            .iter()
                            .zip(x.iter())
                            .fold(S::zero(), |a, (&b, &v)| a + b * v);
                        worst = worst.max(flux.abs() / norm);
                    }
                }
            }
        }
        worst
    }
}
