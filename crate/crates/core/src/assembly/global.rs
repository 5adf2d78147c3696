//! Global assembly of the saddle-point system with symmetric Dirichlet
//! elimination and the optional mean-pressure gauge.

use super::local::{local_divergence, local_load, local_viscous};
use super::problem::StokesProblem;
use crate::linalg::{CooBuilder, CsrMatrix, LdlSolver};
use crate::mesh::PolyMesh;
use crate::vem::{
    build_element_ops, interpolate_velocity, DofMap, FaceOps,
};
use crate::{Error, Result, Scalar};
use nalgebra::DVector;
use rayon::prelude::*;

pub struct SaddleSystem<S: Scalar> {
    /// Velocity block on free dofs, symmetric positive definite.
    pub a: CsrMatrix<S>,
    /// Pressure–velocity block on free dofs (rows: pressure dofs).
    pub b: CsrMatrix<S>,
    pub rhs_u: Vec<S>,
    pub rhs_p: Vec<S>,
    /// Free index → global velocity dof.
    pub free_of_global: Vec<usize>,
    /// Global velocity dof → free index or `usize::MAX`.
    pub global_to_free: Vec<usize>,
    /// Dirichlet values on constrained dofs (zero on free ones).
    pub bc_values: Vec<S>,
    /// Mean-pressure gauge row ∫_Ω q, present for pure-Dirichlet problems.
    pub gauge: Option<Vec<S>>,
    pub n_pressure: usize,
}

impl<S: Scalar> SaddleSystem<S> {
    pub fn n_free(&self) -> usize {
        self.free_of_global.len()
    }

    /// Direct sparse solve of the full saddle system (with gauge row when
    /// present); returns the full velocity dof vector and pressure
    /// coefficients.
    pub fn direct_solve(&self) -> Result<(Vec<S>, Vec<S>)> {
        let nf = self.n_free();
        let np = self.n_pressure;
        let gauge = self.gauge.is_some() as usize;
        let n = nf + np + gauge;
        let mut coo = CooBuilder::with_capacity(n, n, self.a.nnz() + 2 * self.b.nnz() + 2 * np);
        for (i, j, v) in self.a.iter() {
            coo.push(i, j, v);
        }
        for (q, j, v) in self.b.iter() {
            coo.push(nf + q, j, v);
            coo.push(j, nf + q, v);
        }
        if let Some(w) = &self.gauge {
            for (q, &v) in w.iter().enumerate() {
                coo.push(nf + np, nf + q, v);
                coo.push(nf + q, nf + np, v);
            }
        }
        let mat = coo.build();
        // velocity block positive, pressure block negative; the gauge
        // multiplier pairs with the singular constant-pressure direction and
        // carries positive inertia
        let mut signs = vec![1i8; n];
        for s in signs.iter_mut().take(nf + np).skip(nf) {
            *s = -1;
        }
        let solver = LdlSolver::new(mat, &signs)?;
        let mut rhs = vec![S::zero(); n];
        rhs[..nf].copy_from_slice(&self.rhs_u);
        rhs[nf..nf + np].copy_from_slice(&self.rhs_p);
        let sol = solver.solve(&rhs);
        Ok(self.expand(&sol[..nf], &sol[nf..nf + np]))
    }

    /// Lift a free-dof velocity solution to the full dof vector and pair it
    /// with the pressure coefficients.
    pub fn expand(&self, u_free: &[S], p: &[S]) -> (Vec<S>, Vec<S>) {
        let mut u = self.bc_values.clone();
        for (fi, &g) in self.free_of_global.iter().enumerate() {
            u[g] = u_free[fi];
        }
        (u, p.to_vec())
    }

    /// Residual of the full constrained system for a candidate solution.
    pub fn residual(&self, u_free: &[S], p: &[S]) -> S {
        let mut ru = self.a.mul_vec(u_free);
        self.b.mul_transpose_vec_add(p, &mut ru);
        let mut s = S::zero();
        for i in 0..ru.len() {
            let d = ru[i] - self.rhs_u[i];
            s += d * d;
        }
        let rp = self.b.mul_vec(u_free);
        for q in 0..rp.len() {
            let d = rp[q] - self.rhs_p[q];
            s += d * d;
        }
        s.sqrt()
    }

    /// Write the symmetric saddle matrix in coordinate text format
    /// (1-based `i j value` lines with a size header).
    pub fn export_matrix(&self, path: &std::path::Path) -> Result<()> {
        use std::io::Write;
        let nf = self.n_free();
        let np = self.n_pressure;
        let gauge = self.gauge.is_some() as usize;
        let n = nf + np + gauge;
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        let nnz = self.a.nnz() + 2 * self.b.nnz() + 2 * self.gauge.as_ref().map_or(0, |g| g.len());
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{n} {n} {nnz}")?;
        for (i, j, v) in self.a.iter() {
            writeln!(w, "{} {} {:.17e}", i + 1, j + 1, v.to_f64_lossy())?;
        }
        for (q, j, v) in self.b.iter() {
            writeln!(w, "{} {} {:.17e}", nf + q + 1, j + 1, v.to_f64_lossy())?;
            writeln!(w, "{} {} {:.17e}", j + 1, nf + q + 1, v.to_f64_lossy())?;
        }
        if let Some(g) = &self.gauge {
            for (q, &v) in g.iter().enumerate() {
                writeln!(w, "{} {} {:.17e}", n, nf + q + 1, v.to_f64_lossy())?;
                writeln!(w, "{} {} {:.17e}", nf + q + 1, n, v.to_f64_lossy())?;
            }
        }
        Ok(())
    }
}

/// Velocity dofs constrained by the Dirichlet faces.
pub fn dirichlet_dofs<S: Scalar>(
    mesh: &PolyMesh<S>,
    dm: &DofMap,
    dirichlet_faces: &[usize],
) -> Vec<bool> {
    let mut constrained = vec![false; dm.n_velocity];
    for &f in dirichlet_faces {
        let face = &mesh.faces[f];
        for &v in &face.vertices {
            for d in 0..3 {
                constrained[dm.vertex_dof(v, d)] = true;
            }
        }
        for &e in &face.edges {
            for pt in 0..dm.pts_per_edge {
                for d in 0..3 {
                    constrained[dm.edge_dof(e, pt, d)] = true;
                }
            }
        }
        for w in 0..3 {
            for alpha in 0..dm.moms_per_face {
                constrained[dm.face_dof(f, w, alpha)] = true;
            }
        }
    }
    constrained
}

pub fn assemble<S: Scalar>(
    mesh: &PolyMesh<S>,
    dm: &DofMap,
    face_ops: &[FaceOps<S>],
    problem: &StokesProblem<S>,
) -> Result<SaddleSystem<S>> {
    problem.validate(mesh)?;
    let k = dm.k;

    let constrained = dirichlet_dofs(mesh, dm, &problem.dirichlet_faces);
    let mut global_to_free = vec![usize::MAX; dm.n_velocity];
    let mut free_of_global = Vec::new();
    for g in 0..dm.n_velocity {
        if !constrained[g] {
            global_to_free[g] = free_of_global.len();
            free_of_global.push(g);
        }
    }

    // boundary data on the constrained dofs
    let data = problem.dirichlet_data.clone();
    let mut bc_values = interpolate_velocity(mesh, dm, face_ops, move |p| data(p))?;
    for (g, bc) in bc_values.iter_mut().enumerate() {
        if !constrained[g] {
            *bc = S::zero();
        }
    }

    // local blocks in parallel, deterministic scatter afterwards
    let locals: Result<Vec<_>> = (0..mesh.cells.len())
        .into_par_iter()
        .map(|c| {
            let ops = build_element_ops(mesh, c, k, face_ops)?;
            let ka = local_viscous(&ops, problem.viscosity[c]);
            let bl = local_divergence(&ops);
            let fl = local_load(&ops, &*problem.body_force);
            let mass_row0: Vec<S> = (0..dm.press_per_cell)
                .map(|alpha| ops.mass[(0, alpha)])
                .collect();
            Ok((c, ka, bl, fl, mass_row0))
        })
        .collect();
    let locals = locals?;

    let nf = free_of_global.len();
    let np = dm.n_pressure;
    let mut coo_a = CooBuilder::new(nf, nf);
    let mut coo_b = CooBuilder::new(np, nf);
    let mut rhs_u = vec![S::zero(); nf];
    let mut rhs_p = vec![S::zero(); np];
    let mut gauge_row = vec![S::zero(); np];

    for (c, ka, bl, fl, mass_row0) in &locals {
        let dofs = dm.cell_dofs(mesh, *c);
        let pdofs = dm.cell_pressure_dofs(*c);
        for (li, &gi) in dofs.iter().enumerate() {
            let fi = global_to_free[gi];
            if fi == usize::MAX {
                continue;
            }
            rhs_u[fi] += fl[li];
            for (lj, &gj) in dofs.iter().enumerate() {
                let fj = global_to_free[gj];
                if fj == usize::MAX {
                    // lift of the Dirichlet data
                    rhs_u[fi] -= ka[(li, lj)] * bc_values[gj];
                } else {
                    coo_a.push(fi, fj, ka[(li, lj)]);
                }
            }
        }
        for (lq, &gq) in pdofs.iter().enumerate() {
            for (lj, &gj) in dofs.iter().enumerate() {
                let fj = global_to_free[gj];
                if fj == usize::MAX {
                    rhs_p[gq] -= bl[(lq, lj)] * bc_values[gj];
                } else {
                    coo_b.push(gq, fj, bl[(lq, lj)]);
                }
            }
            gauge_row[gq] += mass_row0[lq];
        }
    }

    // Neumann traction: ∫_f t·v through the face frame components
    for &fid in &problem.neumann_faces {
        let f = &mesh.faces[fid];
        let fo = &face_ops[fid];
        let frame = [f.normal, f.tangent[0], f.tangent[1]];
        // expand t·w in the 2D basis: τ_w = Hf⁻¹ ∫ (t·w) m2d
        let nb = fo.basis.len();
        let mut tmom = nalgebra::DMatrix::<S>::zeros(nb, 3);
        for (q, p) in fo.quad.nodes.iter().enumerate() {
            let w = fo.quad.weights[q];
            let tv = (problem.traction)(p);
            for (wi, dir) in frame.iter().enumerate() {
                let comp = tv.dot(dir);
                for alpha in 0..nb {
                    tmom[(alpha, wi)] += w * comp * fo.vals2d[(alpha, q)];
                }
            }
        }
        let tau = fo
            .mass
            .clone()
            .lu()
            .solve(&tmom)
            .ok_or(Error::SingularLocal {
                entity: "face",
                index: fid,
                msg: "face mass singular in traction expansion".into(),
            })?;
        // ∫_f (t·w)(v·w) ≈ τ_wᵀ (moments of v·w); moments are exact
        let mut scatter = |row: usize, val: S| {
            let fi = global_to_free[row];
            if fi != usize::MAX {
                rhs_u[fi] += val;
            }
        };
        for (wi, dir) in frame.iter().enumerate() {
            // moments of the w-component of v as functionals of global dofs
            for alpha in 0..nb {
                let t = tau[(alpha, wi)];
                if t == S::zero() {
                    continue;
                }
                // vertex and edge point dofs
                for (lp, &v) in f.vertices.iter().enumerate() {
                    for d in 0..3 {
                        let w3 = dir[d];
                        if w3 != S::zero() {
                            scatter(
                                dm.vertex_dof(v, d),
                                t * w3 * fo.moments[(alpha, lp)],
                            );
                        }
                    }
                }
                for (le, &e) in f.edges.iter().enumerate() {
                    for pt in 0..dm.pts_per_edge {
                        let frow = fo.edge_dof(le, pt);
                        for d in 0..3 {
                            let w3 = dir[d];
                            if w3 != S::zero() {
                                scatter(
                                    dm.edge_dof(e, pt, d),
                                    t * w3 * fo.moments[(alpha, frow)],
                                );
                            }
                        }
                    }
                }
                for beta in 0..dm.moms_per_face {
                    scatter(
                        dm.face_dof(fid, wi, beta),
                        t * fo.moments[(alpha, fo.moment_dof(beta))],
                    );
                }
            }
        }
    }

    let gauge = problem.is_pure_dirichlet().then_some(gauge_row);
    Ok(SaddleSystem {
        a: coo_a.build(),
        b: coo_b.build(),
        rhs_u,
        rhs_p,
        free_of_global,
        global_to_free,
        bc_values,
        gauge,
        n_pressure: np,
    })
}

/// Discretization errors against analytic fields: H¹-seminorm velocity
/// error via Π⁰_{k−1}∇u_h, L² pressure error by quadrature. Returns
/// (err_u, norm_u, err_p, norm_p) as absolute quantities.
pub fn compute_errors<S: Scalar>(
    mesh: &PolyMesh<S>,
    dm: &DofMap,
    face_ops: &[FaceOps<S>],
    u: &[S],
    p: &[S],
    exact: &(dyn Fn(&nalgebra::Point3<S>) -> (nalgebra::Vector3<S>, nalgebra::Matrix3<S>) + Sync),
    exact_p: &(dyn Fn(&nalgebra::Point3<S>) -> S + Sync),
) -> Result<(S, S, S, S)> {
    let k = dm.k;
    let nkm1 = crate::poly::dim_p3(k as i64 - 1);
    let parts: Result<Vec<_>> = (0..mesh.cells.len())
        .into_par_iter()
        .map(|c| {
            let ops = build_element_ops(mesh, c, k, face_ops)?;
            let dofs = dm.cell_dofs(mesh, c);
            let local = DVector::from_fn(dofs.len(), |i, _| u[dofs[i]]);
            let grads: Vec<DVector<S>> =
                ops.grad_proj.iter().map(|g| g * &local).collect();
            let pcoef: Vec<S> = dm.cell_pressure_dofs(c).iter().map(|&q| p[q]).collect();
            let pb = crate::poly::MonomialBasis3d::new(
                k as i64 - 1,
                mesh.cells[c].centroid,
                mesh.cells[c].diameter,
            );
            let mut e_u = S::zero();
            let mut n_u = S::zero();
            let mut e_p = S::zero();
            let mut n_p = S::zero();
            for (q, pt) in ops.quad.nodes.iter().enumerate() {
                let w = ops.quad.weights[q];
                let (_, gex) = exact(pt);
                let pex = exact_p(pt);
                let mut ph = S::zero();
                let vals: Vec<S> = (0..nkm1).map(|j| pb.eval(pt, j)).collect();
                for j in 0..nkm1 {
                    ph += pcoef[j] * vals[j];
                }
                for d in 0..3 {
                    for jd in 0..3 {
                        let mut gh = S::zero();
                        for j in 0..nkm1 {
                            gh += grads[3 * d + jd][j] * vals[j];
                        }
                        let diff = gex[(d, jd)] - gh;
                        e_u += w * diff * diff;
                        n_u += w * gex[(d, jd)] * gex[(d, jd)];
                    }
                }
                let dp = pex - ph;
                e_p += w * dp * dp;
                n_p += w * pex * pex;
            }
            Ok((e_u, n_u, e_p, n_p))
        })
        .collect();
    let mut acc = (S::zero(), S::zero(), S::zero(), S::zero());
    for (a, b, c, d) in parts? {
        acc.0 += a;
        acc.1 += b;
        acc.2 += c;
        acc.3 += d;
    }
    Ok((acc.0.sqrt(), acc.1.sqrt(), acc.2.sqrt(), acc.3.sqrt()))
}
