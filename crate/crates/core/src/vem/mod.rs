//! Virtual element spaces: face operators, element operators, the global
//! dof map and interpolation.

mod dof_map;
mod element_ops;
mod face_ops;
mod interpolate;

pub use dof_map::{build_dof_map, DofEntity, DofMap};
pub use element_ops::{build_element_ops, xw_dof_basis, CellDofLayout, ElementOps};
pub use face_ops::{build_face_ops, FaceOps};
pub use interpolate::{interpolate_velocity, project_pressure};

use crate::mesh::PolyMesh;
use crate::{Result, Scalar};

/// Face operators for every face of the mesh.
pub fn build_all_face_ops<S: Scalar>(mesh: &PolyMesh<S>, k: usize) -> Result<Vec<FaceOps<S>>> {
    use rayon::prelude::*;
    (0..mesh.faces.len())
        .into_par_iter()
        .map(|f| build_face_ops(mesh, f, k))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_hex_mesh, truncated_octahedron};
    use crate::poly::{dim_p3, MonomialBasis3d};
    use nalgebra::{DMatrix, DVector, Matrix3, Point3, Vector3};
    use rand::{Rng, SeedableRng};

    fn random_poly_coeffs(k: usize, seed: u64) -> DVector<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        DVector::from_fn(3 * dim_p3(k as i64), |_, _| rng.gen_range(-1.0..1.0))
    }

    fn check_reproduction(mesh: &PolyMesh<f64>, k: usize, tol: f64) {
        let face_ops = build_all_face_ops(mesh, k).unwrap();
        for cell in 0..mesh.cells.len() {
            let ops = build_element_ops(mesh, cell, k, &face_ops).unwrap();
            let nk = dim_p3(k as i64);
            let coeffs = random_poly_coeffs(k, 42 + cell as u64);
            let dofs = &ops.dof_of_poly * &coeffs;
            // H¹ and L² projectors reproduce the polynomial
            let pn = &ops.pi_nabla * &dofs;
            let p0 = &ops.pi0 * &dofs;
            for i in 0..3 * nk {
                assert!(
                    (pn[i] - coeffs[i]).abs() < tol,
                    "cell {cell} pi_nabla coeff {i}: {} vs {}",
                    pn[i],
                    coeffs[i]
                );
                assert!(
                    (p0[i] - coeffs[i]).abs() < tol,
                    "cell {cell} pi0 coeff {i}: {} vs {}",
                    p0[i],
                    coeffs[i]
                );
            }
            // exact divergence coefficients
            let divc = &ops.div_coeff * &dofs;
            let mut expect = vec![0.0; dim_p3(k as i64 - 1)];
            for d in 0..3 {
                for alpha in 0..nk {
                    if let Some((j, c)) = ops.basis.deriv_coeffs(alpha, d) {
                        expect[j] += c * coeffs[d * nk + alpha];
                    }
                }
            }
            for (j, e) in expect.iter().enumerate() {
                assert!(
                    (divc[j] - e).abs() < tol,
                    "cell {cell} div coeff {j}: {} vs {e}",
                    divc[j]
                );
            }
            // tensor gradient projection reproduces ∂_j p_d
            for d in 0..3 {
                for jd in 0..3 {
                    let gp = &ops.grad_proj[3 * d + jd] * &dofs;
                    let mut expect = vec![0.0; dim_p3(k as i64 - 1)];
                    for alpha in 0..nk {
                        if let Some((j, c)) = ops.basis.deriv_coeffs(alpha, jd) {
                            expect[j] += c * coeffs[d * nk + alpha];
                        }
                    }
                    for (j, e) in expect.iter().enumerate() {
                        assert!(
                            (gp[j] - e).abs() < tol,
                            "cell {cell} grad_proj[{d}{jd}] coeff {j}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn polynomial_reproduction_cube_k2() {
        let mesh = generate_hex_mesh::<f64>(1, [0.0; 3], [1.0; 3]).unwrap();
        check_reproduction(&mesh, 2, 1e-9);
    }

    #[test]
    fn polynomial_reproduction_cube_k3() {
        let mesh = generate_hex_mesh::<f64>(1, [0.0; 3], [1.0; 3]).unwrap();
        check_reproduction(&mesh, 3, 1e-9);
    }

    #[test]
    fn polynomial_reproduction_cube_k4() {
        let mesh = generate_hex_mesh::<f64>(1, [0.0; 3], [1.0; 3]).unwrap();
        check_reproduction(&mesh, 4, 1e-8);
    }

    #[test]
    fn polynomial_reproduction_truncated_octahedron() {
        let mesh = truncated_octahedron::<f64>().unwrap();
        check_reproduction(&mesh, 2, 1e-9);
        check_reproduction(&mesh, 3, 1e-9);
    }

    #[test]
    fn constant_field_projects_to_itself_with_zero_strain() {
        let mesh = truncated_octahedron::<f64>().unwrap();
        let k = 2;
        let face_ops = build_all_face_ops(&mesh, k).unwrap();
        let ops = build_element_ops(&mesh, 0, k, &face_ops).unwrap();
        let nk = dim_p3(2);
        let mut coeffs = DVector::zeros(3 * nk);
        coeffs[0] = 1.5; // u_x ≡ 1.5
        coeffs[nk] = -0.5; // u_y ≡ −0.5
        let dofs = &ops.dof_of_poly * &coeffs;
        let pn = &ops.pi_nabla * &dofs;
        for i in 0..3 * nk {
            assert!((pn[i] - coeffs[i]).abs() < 1e-12);
        }
        for gp in &ops.grad_proj {
            let g = gp * &dofs;
            assert!(g.amax() < 1e-12);
        }
    }

    #[test]
    fn interpolation_matches_polynomial_dofs() {
        let mesh = generate_hex_mesh::<f64>(2, [0.0; 3], [1.0; 3]).unwrap();
        let k = 3;
        let dm = build_dof_map(&mesh, k);
        let face_ops = build_all_face_ops(&mesh, k).unwrap();
        // u = (x²y, z³ − xy, x + y²z) has degree ≤ k = 3
        let field = |p: &Point3<f64>| {
            let (x, y, z) = (p.x, p.y, p.z);
            let val = Vector3::new(x * x * y, z * z * z - x * y, x + y * y * z);
            let grad = Matrix3::new(
                2.0 * x * y,
                x * x,
                0.0,
                -y,
                -x,
                3.0 * z * z,
                1.0,
                2.0 * y * z,
                y * y,
            );
            (val, grad)
        };
        let dofs = interpolate_velocity(&mesh, &dm, &face_ops, field).unwrap();

        for cell in 0..mesh.cells.len() {
            let ops = build_element_ops(&mesh, cell, k, &face_ops).unwrap();
            // expand the field in the cell basis to compare dof values
            let nk = dim_p3(3);
            let b = MonomialBasis3d::new(3, mesh.cells[cell].centroid, mesh.cells[cell].diameter);
            let nq = ops.quad.nodes.len();
            let mut a = DMatrix::<f64>::zeros(nq, nk);
            for (q, p) in ops.quad.nodes.iter().enumerate() {
                for i in 0..nk {
                    a[(q, i)] = b.eval(p, i);
                }
            }
            let ata = (a.transpose() * &a).lu();
            let mut coeffs = DVector::zeros(3 * nk);
            for d in 0..3 {
                let vals = DVector::from_fn(nq, |q, _| field(&ops.quad.nodes[q]).0[d]);
                let sol = ata.solve(&(a.transpose() * vals)).unwrap();
                coeffs.rows_mut(d * nk, nk).copy_from(&sol);
            }
            let expect = &ops.dof_of_poly * &coeffs;
            let local = dm.cell_dofs(&mesh, cell);
            for (i, &g) in local.iter().enumerate() {
                assert!(
                    (dofs[g] - expect[i]).abs() < 1e-10,
                    "cell {cell} local dof {i}: interpolated {} vs poly {}",
                    dofs[g],
                    expect[i]
                );
            }
        }
    }

    #[test]
    fn divergence_free_field_has_zero_d5_moments() {
        let mesh = generate_hex_mesh::<f64>(2, [0.0; 3], [1.0; 3]).unwrap();
        let k = 2;
        let dm = build_dof_map(&mesh, k);
        let face_ops = build_all_face_ops(&mesh, k).unwrap();
        let field = |p: &Point3<f64>| {
            let (x, y, z) = (p.x, p.y, p.z);
            let val = Vector3::new(y * y, z * z, x * x);
            let grad = Matrix3::new(0.0, 2.0 * y, 0.0, 0.0, 0.0, 2.0 * z, 2.0 * x, 0.0, 0.0);
            (val, grad)
        };
        let dofs = interpolate_velocity(&mesh, &dm, &face_ops, field).unwrap();
        for c in 0..mesh.cells.len() {
            for j in 0..dm.d5_per_cell {
                assert!(
                    dofs[dm.cell_d5_dof(c, j)].abs() < 1e-12,
                    "cell {c} divergence moment {j}"
                );
            }
        }
    }

    #[test]
    fn face_linear_field_normal_moments_match_analytic() {
        let mesh = generate_hex_mesh::<f64>(1, [0.0; 3], [1.0; 3]).unwrap();
        let k = 2;
        let dm = build_dof_map(&mesh, k);
        let face_ops = build_all_face_ops(&mesh, k).unwrap();
        let field = |p: &Point3<f64>| {
            (
                Vector3::new(p.x, 2.0 * p.y, -p.z),
                Matrix3::from_diagonal(&Vector3::new(1.0, 2.0, -1.0)),
            )
        };
        let dofs = interpolate_velocity(&mesh, &dm, &face_ops, field).unwrap();
        // on the face x = 1 the stored normal is +x, so the zeroth normal
        // moment is the mean of u_x there, i.e. 1
        let fx1 = (0..mesh.faces.len())
            .find(|&f| (mesh.faces[f].centroid.x - 1.0).abs() < 1e-12)
            .unwrap();
        assert!((mesh.faces[fx1].normal.x - 1.0).abs() < 1e-12);
        let m0 = dofs[dm.face_dof(fx1, 0, 0)];
        assert!((m0 - 1.0).abs() < 1e-12, "mean normal moment {m0}");
    }
}
