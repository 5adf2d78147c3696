//! Per-subdomain local blocks, interior factorization and the Schur
//! complement operator.
//!
//! Interior unknowns are the subdomain's interior velocities together with
//! its zero-mean pressure modes; the subdomain constant pressure (when
//! present) is an explicit interface unknown. The pressure basis change is
//! a rank-one row update: each non-constant test row gets
//! row − (μ_j/|Ω_s|)·(net-flux row), and the dropped slot is replaced by the
//! net-flux row itself, which lives on the interface.

use super::interface::InterfaceLayout;
use crate::assembly::SaddleSystem;
use crate::linalg::{CooBuilder, CsrMatrix, LdlSolver};
use crate::mesh::PolyMesh;
use crate::poly::{cell_quadrature, MonomialBasis3d};
use crate::vem::{build_element_ops, DofMap, FaceOps};
use crate::{Result, Scalar};

pub struct SubdomainOps<S: Scalar> {
    pub sub: usize,
    /// Global dof ids of the interior velocities (ascending).
    pub interior: Vec<usize>,
    /// Interface indices covered by this subdomain (ascending).
    pub gamma: Vec<usize>,
    /// Global pressure ids of the local pressure unknowns (the q0 slot,
    /// when present, is excluded).
    pub pressure: Vec<usize>,
    /// Interior saddle factorization over (u_I, p̃).
    pub k_int: LdlSolver<S>,
    /// Raw interior blocks, kept for the preconditioner's Neumann problems.
    pub a_ii: CsrMatrix<S>,
    pub b_ii: CsrMatrix<S>,
    /// A rows at local Γ dofs × interior velocity columns.
    pub a_gi: CsrMatrix<S>,
    /// Transformed pressure rows × local Γ columns.
    pub b_ig: CsrMatrix<S>,
    /// Subdomain-local Γ×Γ viscous block (cell sums of this subdomain only).
    pub a_gg: CsrMatrix<S>,
    /// Net-flux row over local Γ dofs (q0 subdomains only).
    pub b0_row: Option<Vec<S>>,
    /// Raw-pressure reconstruction data: global ids of the per-cell
    /// constant slots, integral μ per local pressure unknown, volume.
    pub m0_slots: Vec<usize>,
    pub mu: Vec<S>,
    pub volume: S,
    pub has_q0: bool,
}

impl<S: Scalar> SubdomainOps<S> {
    pub fn n_interior(&self) -> usize {
        self.interior.len()
    }

    pub fn n_gamma_local(&self) -> usize {
        self.gamma.len()
    }

    /// Schur complement application: one interior solve per call.
    pub fn apply_schur(&self, w: &[S]) -> Vec<S> {
        let ni = self.interior.len();
        let np = self.pressure.len();
        let mut rhs = vec![S::zero(); ni + np];
        // interior momentum rows: −A_IΓ w; pressure rows: −B_IΓ w
        let mut tmp = vec![S::zero(); ni];
        self.a_gi.mul_transpose_vec_add(w, &mut tmp);
        for i in 0..ni {
            rhs[i] = -tmp[i];
        }
        let bw = self.b_ig.mul_vec(w);
        for q in 0..np {
            rhs[ni + q] = -bw[q];
        }
        let z = self.k_int.solve(&rhs);
        let mut out = self.a_gg.mul_vec(w);
        let av = self.a_gi.mul_vec(&z[..ni]);
        for g in 0..w.len() {
            out[g] += av[g];
        }
        self.b_ig.mul_transpose_vec_add(&z[ni..], &mut out);
        out
    }

    /// Interior solve for given interface data and sources; returns
    /// (interior velocities, transformed pressures).
    pub fn interior_solve(&self, w_gamma: &[S], f_i: &[S], g_p: &[S]) -> (Vec<S>, Vec<S>) {
        let ni = self.interior.len();
        let np = self.pressure.len();
        let mut rhs = vec![S::zero(); ni + np];
        let mut tmp = vec![S::zero(); ni];
        self.a_gi.mul_transpose_vec_add(w_gamma, &mut tmp);
        for i in 0..ni {
            rhs[i] = f_i[i] - tmp[i];
        }
        let bw = self.b_ig.mul_vec(w_gamma);
        for q in 0..np {
            rhs[ni + q] = g_p[q] - bw[q];
        }
        let z = self.k_int.solve(&rhs);
        (z[..ni].to_vec(), z[ni..].to_vec())
    }
}

/// Integrals of the pressure monomials over a cell.
fn pressure_integrals<S: Scalar>(
    mesh: &PolyMesh<S>,
    dm: &DofMap,
    cell: usize,
) -> Result<Vec<S>> {
    let k = dm.k;
    let basis = MonomialBasis3d::new(
        k as i64 - 1,
        mesh.cells[cell].centroid,
        mesh.cells[cell].diameter,
    );
    let quad = cell_quadrature(mesh, cell, (k - 1).max(1))?;
    Ok((0..dm.press_per_cell)
        .map(|alpha| quad.integrate(|p| basis.eval(p, alpha)))
        .collect())
}

pub fn build_subdomain_ops<S: Scalar>(
    mesh: &PolyMesh<S>,
    dm: &DofMap,
    face_ops: &[FaceOps<S>],
    sys: &SaddleSystem<S>,
    layout: &InterfaceLayout,
    sub: usize,
    viscosity: &[S],
) -> Result<SubdomainOps<S>> {
    let interior = layout.sub_interior[sub].clone();
    let gamma = layout.sub_gamma[sub].clone();
    let cells = &layout.partition.subdomain_cells[sub];
    let has_q0 = layout.sub_has_q0[sub];

    let ni = interior.len();
    let ngl = gamma.len();

    // free-index lists and local column maps
    let interior_free: Vec<usize> = interior.iter().map(|&g| sys.global_to_free[g]).collect();
    let gamma_free: Vec<usize> = gamma
        .iter()
        .map(|&gi| sys.global_to_free[layout.interface_dofs[gi]])
        .collect();
    let nf = sys.n_free();
    let mut col_int = vec![usize::MAX; nf];
    for (li, &fi) in interior_free.iter().enumerate() {
        col_int[fi] = li;
    }
    let mut col_gam = vec![usize::MAX; nf];
    for (lg, &fg) in gamma_free.iter().enumerate() {
        col_gam[fg] = lg;
    }

    // local pressure unknowns: every pressure dof of the subdomain, minus
    // the first cell's constant slot when the subdomain carries q0
    let mut pressure = Vec::new();
    let mut m0_slots = Vec::new();
    let mut mu_all = std::collections::HashMap::new();
    let mut volume = S::zero();
    for (ci, &c) in cells.iter().enumerate() {
        let ints = pressure_integrals(mesh, dm, c)?;
        volume += mesh.cells[c].volume;
        for alpha in 0..dm.press_per_cell {
            let q = dm.pressure_dof(c, alpha);
            mu_all.insert(q, ints[alpha]);
            if alpha == 0 {
                m0_slots.push(q);
            }
            if has_q0 && ci == 0 && alpha == 0 {
                continue; // the dropped constant slot
            }
            pressure.push(q);
        }
    }
    let mu: Vec<S> = pressure.iter().map(|&q| mu_all[&q]).collect();

    // extract A blocks
    let a_ii = sys.a.extract(&interior_free, &col_int, ni);
    let a_gi = sys.a.extract(&gamma_free, &col_int, ni);

    // raw pressure rows split into interior/interface columns
    let raw_row = |q: usize| sys.b.row(q);
    // net-flux row of the subdomain over both column groups
    let mut flux_int = vec![S::zero(); ni];
    let mut flux_gam = vec![S::zero(); ngl];
    if has_q0 {
        for &q in &m0_slots {
            let (cols, vals) = raw_row(q);
            for (&fj, &v) in cols.iter().zip(vals) {
                if col_int[fj] != usize::MAX {
                    flux_int[col_int[fj]] += v;
                }
                if col_gam[fj] != usize::MAX {
                    flux_gam[col_gam[fj]] += v;
                }
            }
        }
    }

    let np = pressure.len();
    let mut b_ii = CooBuilder::new(np, ni);
    let mut b_ig = CooBuilder::new(np, ngl);
    for (lq, &q) in pressure.iter().enumerate() {
        let (cols, vals) = raw_row(q);
        for (&fj, &v) in cols.iter().zip(vals) {
            if col_int[fj] != usize::MAX {
                b_ii.push(lq, col_int[fj], v);
            }
            if col_gam[fj] != usize::MAX {
                b_ig.push(lq, col_gam[fj], v);
            }
        }
        if has_q0 {
            let scale = mu[lq] / volume;
            for (li, &fv) in flux_int.iter().enumerate() {
                if fv != S::zero() {
                    b_ii.push(lq, li, -scale * fv);
                }
            }
            for (lg, &fv) in flux_gam.iter().enumerate() {
                if fv != S::zero() {
                    b_ig.push(lq, lg, -scale * fv);
                }
            }
        }
    }
    let b_ii = b_ii.build();
    let b_ig = b_ig.build();

    // subdomain-local Γ×Γ viscous block, re-assembled from this
    // subdomain's cells
    let mut coo_gg = CooBuilder::new(ngl, ngl);
    for &c in cells {
        let dofs = dm.cell_dofs(mesh, c);
        // only cells touching the interface contribute
        let touched: Vec<(usize, usize)> = dofs
            .iter()
            .enumerate()
            .filter_map(|(li, &g)| {
                let gi = layout.gamma_index[g];
                if gi == usize::MAX {
                    None
                } else {
                    gamma.binary_search(&gi).ok().map(|lg| (li, lg))
                }
            })
            .collect();
        if touched.is_empty() {
            continue;
        }
        let ops = build_element_ops(mesh, c, dm.k, face_ops)?;
        let ka = crate::assembly::local_viscous(&ops, viscosity[c]);
        for &(li, lg) in &touched {
            for &(lj, lh) in &touched {
                coo_gg.push(lg, lh, ka[(li, lj)]);
            }
        }
    }
    let a_gg = coo_gg.build();

    // interior saddle factorization
    let n_int = ni + np;
    let mut coo = CooBuilder::new(n_int, n_int);
    for (i, j, v) in a_ii.iter() {
        coo.push(i, j, v);
    }
    for (q, j, v) in b_ii.iter() {
        coo.push(ni + q, j, v);
        coo.push(j, ni + q, v);
    }
    let mut signs = vec![1i8; n_int];
    for s in signs.iter_mut().skip(ni) {
        *s = -1;
    }
    let k_int = LdlSolver::new(coo.build(), &signs)?;

    Ok(SubdomainOps {
        sub,
        interior,
        gamma,
        pressure,
        k_int,
        a_ii,
        b_ii,
        a_gi,
        b_ig,
        a_gg,
        b0_row: has_q0.then_some(flux_gam),
        m0_slots,
        mu,
        volume,
        has_q0,
    })
}
