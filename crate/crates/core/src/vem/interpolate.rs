//! Interpolation of analytic fields onto the velocity and pressure dofs,
//! used for boundary data, patch tests and error measurement.

use super::dof_map::DofMap;
use super::element_ops::xw_dof_basis;
use super::face_ops::FaceOps;
use crate::mesh::PolyMesh;
use crate::poly::{cell_quadrature, dim_p3, lobatto_interior, MonomialBasis3d};
use crate::{lit, Result, Scalar};
use nalgebra::{Matrix3, Point3, Vector3};

/// Velocity dofs of an analytic field; `field` returns the value and the
/// Jacobian (∂u_i/∂x_j in entry (i, j)).
pub fn interpolate_velocity<S, F>(
    mesh: &PolyMesh<S>,
    dm: &DofMap,
    face_ops: &[FaceOps<S>],
    field: F,
) -> Result<Vec<S>>
where
    S: Scalar,
    F: Fn(&Point3<S>) -> (Vector3<S>, Matrix3<S>),
{
    let k = dm.k;
    let mut dofs = vec![S::zero(); dm.n_velocity];

    for (v, p) in mesh.vertices.iter().enumerate() {
        let (val, _) = field(p);
        for d in 0..3 {
            dofs[dm.vertex_dof(v, d)] = val[d];
        }
    }
    let interior = lobatto_interior(k);
    for (e, &[a, b]) in mesh.edges.iter().enumerate() {
        let pa = mesh.vertices[a];
        let pb = mesh.vertices[b];
        for (pt, &t) in interior.iter().enumerate() {
            let s = lit::<S>(0.5 * (t + 1.0));
            let (val, _) = field(&(pa + (pb - pa) * s));
            for d in 0..3 {
                dofs[dm.edge_dof(e, pt, d)] = val[d];
            }
        }
    }
    for (fid, f) in mesh.faces.iter().enumerate() {
        let fo = &face_ops[fid];
        let frame = [f.normal, f.tangent[0], f.tangent[1]];
        for (q, p) in fo.quad.nodes.iter().enumerate() {
            let w = fo.quad.weights[q];
            let (xi, eta) = fo.quad_local[q];
            let (val, _) = field(p);
            for (wi, dir) in frame.iter().enumerate() {
                let comp = val.dot(dir);
                for alpha in 0..dm.moms_per_face {
                    dofs[dm.face_dof(fid, wi, alpha)] +=
                        w * comp * fo.basis.eval(xi, eta, alpha) / f.area;
                }
            }
        }
    }
    for (c, cell) in mesh.cells.iter().enumerate() {
        if dm.xw_per_cell == 0 && dm.d5_per_cell == 0 {
            continue;
        }
        let quad = cell_quadrature(mesh, c, 2 * k)?;
        let nkm2 = dim_p3(k as i64 - 2);
        let nkm1 = dim_p3(k as i64 - 1);
        let xw = if dm.xw_per_cell > 0 {
            Some(xw_dof_basis(mesh, c, k)?)
        } else {
            None
        };
        let basis = MonomialBasis3d::new(k as i64 - 1, cell.centroid, cell.diameter);
        for (q, p) in quad.nodes.iter().enumerate() {
            let w = quad.weights[q];
            let (val, grad) = field(p);
            if let Some(xw) = &xw {
                for r in 0..dm.xw_per_cell {
                    let mut br = Vector3::zeros();
                    for d in 0..3 {
                        for beta in 0..nkm2 {
                            let cfc = xw[(d * nkm2 + beta, r)];
                            if cfc != S::zero() {
                                br[d] += cfc * basis.eval(p, beta);
                            }
                        }
                    }
                    dofs[dm.cell_xw_dof(c, r)] += w * val.dot(&br) / cell.volume;
                }
            }
            let div = grad[(0, 0)] + grad[(1, 1)] + grad[(2, 2)];
            for j in 1..nkm1 {
                dofs[dm.cell_d5_dof(c, j - 1)] += w * div * basis.eval(p, j) / cell.volume;
            }
        }
    }
    Ok(dofs)
}

/// L² projection of an analytic pressure onto the per-cell P_{k−1} basis.
pub fn project_pressure<S, F>(mesh: &PolyMesh<S>, dm: &DofMap, pressure: F) -> Result<Vec<S>>
where
    S: Scalar,
    F: Fn(&Point3<S>) -> S,
{
    let k = dm.k;
    let nkm1 = dim_p3(k as i64 - 1);
    let mut out = vec![S::zero(); dm.n_pressure];
    for (c, cell) in mesh.cells.iter().enumerate() {
        let quad = cell_quadrature(mesh, c, 2 * k)?;
        let basis = MonomialBasis3d::new(k as i64 - 1, cell.centroid, cell.diameter);
        let mut mass = nalgebra::DMatrix::<S>::zeros(nkm1, nkm1);
        let mut rhs = nalgebra::DVector::<S>::zeros(nkm1);
        for (q, p) in quad.nodes.iter().enumerate() {
            let w = quad.weights[q];
            let pv = pressure(p);
            for i in 0..nkm1 {
                let vi = basis.eval(p, i);
                rhs[i] += w * pv * vi;
                for j in 0..=i {
                    mass[(i, j)] += w * vi * basis.eval(p, j);
                }
            }
        }
        for i in 0..nkm1 {
            for j in (i + 1)..nkm1 {
                mass[(i, j)] = mass[(j, i)];
            }
        }
        let sol = mass.lu().solve(&rhs).expect("pressure mass singular");
        for (alpha, v) in sol.iter().enumerate() {
            out[dm.pressure_dof(c, alpha)] = *v;
        }
    }
    Ok(out)
}
