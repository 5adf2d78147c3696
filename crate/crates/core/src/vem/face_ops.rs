//! Scalar face-space operators.
//!
//! Each face carries the scalar space B̂_k(f): edge-wise P_k boundary
//! traces, Δ_f v ∈ P_{k+1}(f), and the super-enhancement constraint that
//! pins the moments of degree k−1..k+1 to those of the H¹ projection.
//! The degrees of freedom are boundary point values (vertices, then k−1
//! interior Gauss–Lobatto points per edge in global edge orientation) and
//! scaled interior moments against P_{k−2}(f).

use crate::mesh::PolyMesh;
use crate::poly::{
    dim_p2, face_quadrature, gauss_legendre, lobatto_interior, MonomialBasis2d, QuadratureRule,
};
use crate::{lit, Error, Result, Scalar};
use nalgebra::{DMatrix, Point3};

#[derive(Clone, Debug)]
pub struct FaceOps<S: Scalar> {
    pub face: usize,
    pub k: usize,
    /// Scalar dof count: n_v·k + dim P_{k−2}.
    pub n_dof: usize,
    pub n_vertices: usize,
    pub n_moments: usize,
    /// 2D scaled monomials up to degree k+1 in the face frame.
    pub basis: MonomialBasis2d<S>,
    /// H¹-seminorm projection coefficients: dim P_k × n_dof.
    pub pi_nabla: DMatrix<S>,
    /// L² projection onto P_{k+1}: dim P_{k+1} × n_dof.
    pub pi0_kp1: DMatrix<S>,
    /// Exact moments ∫_f v·m_α (α up to degree k+1) as functionals of dofs.
    pub moments: DMatrix<S>,
    /// Face mass matrix of the 2D basis up to degree k+1.
    pub mass: DMatrix<S>,
    /// Face quadrature (3D nodes) with exactness 2k+2.
    pub quad: QuadratureRule<S>,
    /// In-plane scaled coordinates of the quadrature nodes.
    pub quad_local: Vec<(S, S)>,
    /// 2D basis values at the quadrature nodes: dim P_{k+1} × n_q.
    pub vals2d: DMatrix<S>,
    /// Positions of the boundary point dofs in 3D, aligned with dof order.
    pub point_dofs: Vec<Point3<S>>,
}

impl<S: Scalar> FaceOps<S> {
    pub fn n_boundary(&self) -> usize {
        self.n_vertices * self.k
    }

    /// Scalar dof index of the p-th interior point (global edge order) on
    /// loop edge `i`.
    pub fn edge_dof(&self, i: usize, p: usize) -> usize {
        self.n_vertices + i * (self.k - 1) + p
    }

    pub fn moment_dof(&self, alpha: usize) -> usize {
        self.n_vertices * self.k + alpha
    }
}

pub fn build_face_ops<S: Scalar>(mesh: &PolyMesh<S>, fid: usize, k: usize) -> Result<FaceOps<S>> {
    assert!((2..=4).contains(&k), "face spaces support k in 2..=4");
    let f = &mesh.faces[fid];
    let n_v = f.vertices.len();
    let nk = dim_p2(k as i64);
    let nkp1 = dim_p2(k as i64 + 1);
    let n_mom = dim_p2(k as i64 - 2);
    let n_dof = n_v * k + n_mom;
    let basis = MonomialBasis2d::<S>::new(k as i64 + 1, f.diameter);

    let quad = face_quadrature(mesh, fid, 2 * k + 2)?;
    let quad_local: Vec<(S, S)> = quad.nodes.iter().map(|p| f.local_coords(p)).collect();
    let nq = quad.nodes.len();
    let mut vals2d = DMatrix::<S>::zeros(nkp1, nq);
    for (q, &(xi, eta)) in quad_local.iter().enumerate() {
        for i in 0..nkp1 {
            vals2d[(i, q)] = basis.eval(xi, eta, i);
        }
    }

    // mass and H¹ Gram matrices
    let mut mass = DMatrix::<S>::zeros(nkp1, nkp1);
    let mut gram = DMatrix::<S>::zeros(nk, nk);
    for q in 0..nq {
        let w = quad.weights[q];
        let (xi, eta) = quad_local[q];
        for i in 0..nkp1 {
            let vi = vals2d[(i, q)];
            for j in 0..=i {
                mass[(i, j)] += w * vi * vals2d[(j, q)];
            }
        }
        for i in 0..nk {
            let (gx, gy) = basis.grad(xi, eta, i);
            for j in 0..=i {
                let (hx, hy) = basis.grad(xi, eta, j);
                gram[(i, j)] += w * (gx * hx + gy * hy);
            }
        }
    }
    for i in 0..nkp1 {
        for j in (i + 1)..nkp1 {
            mass[(i, j)] = mass[(j, i)];
        }
    }
    for i in 0..nk {
        for j in (i + 1)..nk {
            gram[(i, j)] = gram[(j, i)];
        }
    }

    // boundary machinery: per loop edge, Lagrange interpolation from the
    // k+1 Lobatto nodes to the edge quadrature points
    let interior = lobatto_interior(k);
    let glq = gauss_legendre(k + 3);
    let mut perimeter = S::zero();
    for i in 0..n_v {
        let a = mesh.vertices[f.vertices[i]];
        let b = mesh.vertices[f.vertices[(i + 1) % n_v]];
        perimeter += (b - a).norm();
    }

    // point dof positions (vertices then edge interior points, global order)
    let mut point_dofs: Vec<Point3<S>> = f.vertices.iter().map(|&v| mesh.vertices[v]).collect();
    for i in 0..n_v {
        let va = f.vertices[i];
        let vb = f.vertices[(i + 1) % n_v];
        let (ga, gb) = if va < vb { (va, vb) } else { (vb, va) };
        let pa = mesh.vertices[ga];
        let pb = mesh.vertices[gb];
        for &t in &interior {
            let s = lit::<S>(0.5 * (t + 1.0));
            point_dofs.push(pa + (pb - pa) * s);
        }
    }

    // b_nabla rows: ∫_f ∇m_α·∇v = −∫ Δm_α v + ∮ (∇m_α·n_e) v
    let mut b_nabla = DMatrix::<S>::zeros(nk, n_dof);
    // boundary mean functional of v and of the monomials
    let mut p0_row = nalgebra::RowDVector::<S>::zeros(n_dof);
    let mut p0_mono = nalgebra::RowDVector::<S>::zeros(nk);

    // Lobatto nodes on [-1, 1] in global order: -1, interior, +1
    let mut lobatto: Vec<f64> = Vec::with_capacity(k + 1);
    lobatto.push(-1.0);
    lobatto.extend(&interior);
    lobatto.push(1.0);

    for i in 0..n_v {
        let va = f.vertices[i];
        let vb = f.vertices[(i + 1) % n_v];
        let reversed = va > vb;
        // dof ids in GLOBAL order along the edge: [start vertex, interior.., end vertex]
        let (start_pos, end_pos) = if reversed {
            ((i + 1) % n_v, i)
        } else {
            (i, (i + 1) % n_v)
        };
        let mut node_dofs = Vec::with_capacity(k + 1);
        node_dofs.push(start_pos);
        for p in 0..(k - 1) {
            node_dofs.push(n_v + i * (k - 1) + p);
        }
        node_dofs.push(end_pos);

        let pa = mesh.vertices[f.vertices[i]];
        let pb = mesh.vertices[f.vertices[(i + 1) % n_v]];
        let len = (pb - pa).norm();
        let half = len * lit::<S>(0.5);
        // in-plane outward normal of the edge (loop ccw around the face normal)
        let dir = (pb - pa) / len;
        let ne3 = dir.cross(&f.normal);
        let ne = (
            ne3.dot(&f.tangent[0]),
            ne3.dot(&f.tangent[1]),
        );

        for &(t, wq) in glq {
            // physical point along the loop edge; global parameter flips if
            // the loop runs against the global edge orientation
            let s_loop = lit::<S>(0.5 * (t + 1.0));
            let pq = pa + (pb - pa) * s_loop;
            let (xi, eta) = f.local_coords(&pq);
            let w = half * lit::<S>(wq);
            let t_global = if reversed { -t } else { t };
            // Lagrange values of the k+1 nodal functions at t_global
            let lag = lagrange_values(&lobatto, t_global);

            for alpha in 0..nk {
                let (gx, gy) = basis.grad(xi, eta, alpha);
                let gn = gx * ne.0 + gy * ne.1;
                for (node, &l) in node_dofs.iter().zip(&lag) {
                    b_nabla[(alpha, *node)] += w * gn * lit::<S>(l);
                }
                p0_mono[alpha] += w * basis.eval(xi, eta, alpha);
            }
            for (node, &l) in node_dofs.iter().zip(&lag) {
                p0_row[*node] += w * lit::<S>(l);
            }
        }
    }
    p0_row /= perimeter;
    p0_mono /= perimeter;

    // volume part −∫ Δm_α v through the scaled moment dofs; Δm_α has
    // degree ≤ k−2, inside the moment block
    let area = f.area;
    for alpha in 0..nk {
        for (j, c) in basis.laplacian_coeffs(alpha) {
            b_nabla[(alpha, n_v * k + j)] -= c * area;
        }
    }

    // projector system with the boundary-mean gauge in the constant's slot
    let mut g_tilde = gram.clone();
    let mut b_tilde = b_nabla.clone();
    for beta in 0..nk {
        g_tilde[(0, beta)] = p0_mono[beta];
    }
    b_tilde.set_row(0, &p0_row);
    let lu = g_tilde.lu();
    let pi_nabla = lu.solve(&b_tilde).ok_or(Error::SingularLocal {
        entity: "face",
        index: fid,
        msg: "H1 projector Gram system singular".into(),
    })?;

    // exact moments of v against m_α, α ≤ k+1:
    //   degree ≤ k−2 from the moment dofs, the rest via the enhancement
    let mut moments = DMatrix::<S>::zeros(nkp1, n_dof);
    for alpha in 0..n_mom {
        moments[(alpha, n_v * k + alpha)] = area;
    }
    for alpha in n_mom..nkp1 {
        // ∫ m_α Π∇v = Σ_β mass[α, β] pi_nabla[β, :]
        for beta in 0..nk {
            let m = mass[(alpha, beta)];
            for j in 0..n_dof {
                moments[(alpha, j)] += m * pi_nabla[(beta, j)];
            }
        }
    }

    let pi0_kp1 = mass
        .clone()
        .lu()
        .solve(&moments)
        .ok_or(Error::SingularLocal {
            entity: "face",
            index: fid,
            msg: "face mass matrix singular".into(),
        })?;

    Ok(FaceOps {
        face: fid,
        k,
        n_dof,
        n_vertices: n_v,
        n_moments: n_mom,
        basis,
        pi_nabla,
        pi0_kp1,
        moments,
        mass,
        quad,
        quad_local,
        vals2d,
        point_dofs,
    })
}

/// Values of the Lagrange basis on the given nodes at point t.
fn lagrange_values(nodes: &[f64], t: f64) -> Vec<f64> {
    let n = nodes.len();
    let mut out = vec![1.0; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                out[i] *= (t - nodes[j]) / (nodes[i] - nodes[j]);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_hex_mesh, MeshData};
    use nalgebra::Point3;
    use rand::{Rng, SeedableRng};

    /// Dofs of a 2D polynomial given by coefficients in the face basis.
    fn poly_dofs(ops: &FaceOps<f64>, mesh: &PolyMesh<f64>, coeffs: &[f64]) -> Vec<f64> {
        let f = &mesh.faces[ops.face];
        let eval = |p: &Point3<f64>| {
            let (xi, eta) = f.local_coords(p);
            coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| c * ops.basis.eval(xi, eta, i))
                .sum::<f64>()
        };
        let mut dofs = vec![0.0; ops.n_dof];
        for (i, p) in ops.point_dofs.iter().enumerate() {
            dofs[i] = eval(p);
        }
        for alpha in 0..ops.n_moments {
            let mut m = 0.0;
            for (q, p) in ops.quad.nodes.iter().enumerate() {
                let (xi, eta) = ops.quad_local[q];
                m += ops.quad.weights[q] * eval(p) * ops.basis.eval(xi, eta, alpha);
            }
            dofs[ops.moment_dof(alpha)] = m / f.area;
        }
        dofs
    }

    #[test]
    fn affine_functions_are_reproduced() {
        let mesh = generate_hex_mesh::<f64>(1, [0.0; 3], [1.0; 3]).unwrap();
        let ops = build_face_ops(&mesh, 0, 2).unwrap();
        // v = 1 + 2ξ − 3η in the face frame
        let mut coeffs = vec![0.0; ops.basis.len()];
        coeffs[0] = 1.0;
        coeffs[1] = 2.0;
        coeffs[2] = -3.0;
        let dofs = poly_dofs(&ops, &mesh, &coeffs);
        let proj = &ops.pi_nabla * nalgebra::DVector::from_column_slice(&dofs);
        for beta in 0..dim_p2(2) {
            let expect = if beta < 3 { coeffs[beta] } else { 0.0 };
            assert!(
                (proj[beta] - expect).abs() < 1e-12,
                "beta {beta}: {} vs {expect}",
                proj[beta]
            );
        }
    }

    #[test]
    fn degree_k_reproduction_on_square() {
        let mesh = generate_hex_mesh::<f64>(1, [0.0; 3], [1.0; 3]).unwrap();
        for k in 2..=4usize {
            let ops = build_face_ops(&mesh, 0, k).unwrap();
            let nk = dim_p2(k as i64);
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(k as u64);
            let mut coeffs = vec![0.0; ops.basis.len()];
            for c in coeffs.iter_mut().take(nk) {
                *c = rng.gen_range(-1.0..1.0);
            }
            let dofs = poly_dofs(&ops, &mesh, &coeffs);
            let dv = nalgebra::DVector::from_column_slice(&dofs);
            let pn = &ops.pi_nabla * &dv;
            for beta in 0..nk {
                assert!(
                    (pn[beta] - coeffs[beta]).abs() < 1e-10,
                    "k={k} pi_nabla beta {beta}"
                );
            }
            let p0 = &ops.pi0_kp1 * &dv;
            for beta in 0..ops.basis.len() {
                let expect = if beta < nk { coeffs[beta] } else { 0.0 };
                assert!(
                    (p0[beta] - expect).abs() < 1e-10,
                    "k={k} pi0 beta {beta}: {} vs {expect}",
                    p0[beta]
                );
            }
        }
    }

    #[test]
    fn pentagon_orthogonality_oracle() {
        // pentagon prism cell: only the pentagonal face is used
        let mut verts: Vec<Point3<f64>> = Vec::new();
        for i in 0..5 {
            let a = std::f64::consts::TAU * i as f64 / 5.0 + 0.3;
            verts.push(Point3::new(a.cos(), a.sin(), 0.0));
        }
        for i in 0..5 {
            let p = verts[i];
            verts.push(Point3::new(p.x, p.y, 1.0));
        }
        let mut faces: Vec<Vec<usize>> = vec![vec![4, 3, 2, 1, 0], vec![5, 6, 7, 8, 9]];
        for i in 0..5 {
            let j = (i + 1) % 5;
            faces.push(vec![i, j, j + 5, i + 5]);
        }
        let cells = vec![(0..7).map(|f| (f, true)).collect()];
        let mesh = PolyMesh::build(MeshData {
            vertices: verts,
            faces,
            cells,
        })
        .unwrap();

        let k = 2;
        let ops = build_face_ops(&mesh, 0, k).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let dofs: Vec<f64> = (0..ops.n_dof).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dv = nalgebra::DVector::from_column_slice(&dofs);
        // ∫_f (v − Π⁰_{k+1} v) q = 0 for q ∈ P_{k−2}: moments of Π⁰ must
        // match the moment dofs
        let p0 = &ops.pi0_kp1 * &dv;
        for alpha in 0..ops.n_moments {
            let mut proj_m = 0.0;
            for beta in 0..ops.basis.len() {
                proj_m += ops.mass[(alpha, beta)] * p0[beta];
            }
            let exact = dofs[ops.moment_dof(alpha)] * mesh.faces[0].area;
            assert!(
                (proj_m - exact).abs() <= 1e-10 * exact.abs().max(1.0),
                "alpha {alpha}: {proj_m} vs {exact}"
            );
        }
    }
}
