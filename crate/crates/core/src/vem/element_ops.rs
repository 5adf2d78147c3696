//! Per-cell projector machinery for the velocity space.
//!
//! Everything reduces to exact computations on the degrees of freedom: the
//! local divergence is read off the face normal moments and the interior
//! divergence moments, the H¹ projector integrates by parts against the
//! split [P_{k−2}]³ = ∇P_{k−1} ⊕ x̂∧[P_{k−3}]³ with boundary data recovered
//! from the face L² projections, and the full L² projector uses the
//! super-enhancement constraints on top of that.

use super::face_ops::FaceOps;
use crate::mesh::PolyMesh;
use crate::poly::{
    cell_quadrature, dim_p2, dim_p3, grad_coeffs_3d, xwedge_basis, xwedge_generators,
    MonomialBasis3d, QuadratureRule,
};
use crate::{lit, Error, Result, Scalar};
use nalgebra::DMatrix;

/// Local dof layout of a cell: vertex values, edge point values, face
/// moments (normal, then the two tangential families), interior cross
/// moments, interior divergence moments.
#[derive(Clone, Debug)]
pub struct CellDofLayout {
    pub k: usize,
    pub n_vertices: usize,
    pub n_edges: usize,
    pub n_faces: usize,
    pub n_face_moments: usize,
    pub n_xw: usize,
    pub n_d5: usize,
}

impl CellDofLayout {
    pub fn edge_points(&self) -> usize {
        self.k - 1
    }

    pub fn vertex_dof(&self, iv: usize, d: usize) -> usize {
        3 * iv + d
    }

    pub fn edge_dof(&self, ie: usize, pt: usize, d: usize) -> usize {
        3 * self.n_vertices + ie * 3 * self.edge_points() + 3 * pt + d
    }

    /// `w`: 0 = normal, 1 = first tangent, 2 = second tangent.
    pub fn face_dof(&self, iface: usize, w: usize, alpha: usize) -> usize {
        3 * self.n_vertices
            + 3 * self.edge_points() * self.n_edges
            + iface * 3 * self.n_face_moments
            + w * self.n_face_moments
            + alpha
    }

    pub fn xw_dof(&self, r: usize) -> usize {
        3 * self.n_vertices
            + 3 * self.edge_points() * self.n_edges
            + 3 * self.n_face_moments * self.n_faces
            + r
    }

    pub fn d5_dof(&self, j: usize) -> usize {
        self.xw_dof(self.n_xw) + j
    }

    pub fn n_dof(&self) -> usize {
        self.xw_dof(self.n_xw) + self.n_d5
    }
}

pub struct ElementOps<S: Scalar> {
    pub cell: usize,
    pub k: usize,
    pub layout: CellDofLayout,
    pub n_dof: usize,
    /// 3D scaled monomials up to degree k+1.
    pub basis: MonomialBasis3d<S>,
    /// Cell monomial mass matrix up to degree k+1.
    pub mass: DMatrix<S>,
    /// Coefficients of div v in P_{k−1}: dim P_{k−1} × n_dof, exact.
    pub div_coeff: DMatrix<S>,
    /// H¹ projector coefficients: 3·dim P_k × n_dof (component-blocked).
    pub pi_nabla: DMatrix<S>,
    /// L² projector coefficients: 3·dim P_k × n_dof.
    pub pi0: DMatrix<S>,
    /// Exact component moments ∫_K v_d m_α: 3·dim P_k × n_dof.
    pub moments: DMatrix<S>,
    /// Tensor L² projection of the gradient: entry [3d + j] holds the
    /// coefficients of (Π⁰_{k−1}∇v)_{dj} as dim P_{k−1} × n_dof.
    pub grad_proj: Vec<DMatrix<S>>,
    /// Dofs of vector polynomials: n_dof × 3·dim P_k.
    pub dof_of_poly: DMatrix<S>,
    /// D_V^4 basis fields (x̂∧[P_{k−3}]³, orthonormal): 3·dim P_{k−2} × n_xw.
    pub xw_basis: DMatrix<S>,
    pub quad: QuadratureRule<S>,
}

/// Canonical D_V^4 basis for a cell; interpolation must agree with element
/// construction, so both call this.
pub fn xw_dof_basis<S: Scalar>(
    mesh: &PolyMesh<S>,
    cell: usize,
    k: usize,
) -> Result<DMatrix<S>> {
    let km2 = k as i64 - 2;
    let c = &mesh.cells[cell];
    let basis = MonomialBasis3d::new(km2.max(0), c.centroid, c.diameter);
    if k < 3 {
        return Ok(DMatrix::zeros(3 * basis.len(), 0));
    }
    let quad = cell_quadrature(mesh, cell, 2 * k + 2)?;
    let mass = monomial_mass(&basis, &quad);
    xwedge_basis(cell, &basis, &mass, k as i64 - 3)
}

fn monomial_mass<S: Scalar>(basis: &MonomialBasis3d<S>, quad: &QuadratureRule<S>) -> DMatrix<S> {
    let n = basis.len();
    let nq = quad.nodes.len();
    let mut vals = DMatrix::<S>::zeros(n, nq);
    for (q, p) in quad.nodes.iter().enumerate() {
        let x = basis.local(p);
        for i in 0..n {
            vals[(i, q)] = basis.eval_local(&x, i);
        }
    }
    let mut weighted = vals.clone();
    for (q, &w) in quad.weights.iter().enumerate() {
        for i in 0..n {
            weighted[(i, q)] *= w;
        }
    }
    &weighted * vals.transpose()
}

pub fn build_element_ops<S: Scalar>(
    mesh: &PolyMesh<S>,
    cell_id: usize,
    k: usize,
    face_ops: &[FaceOps<S>],
) -> Result<ElementOps<S>> {
    assert!((2..=4).contains(&k));
    let ki = k as i64;
    let cell = &mesh.cells[cell_id];
    let nk = dim_p3(ki);
    let nkm1 = dim_p3(ki - 1);
    let nkm2 = dim_p3(ki - 2);
    let nkp1 = dim_p3(ki + 1);
    let n_mom_f = dim_p2(ki - 2);

    let xw_basis = xw_dof_basis(mesh, cell_id, k)?;
    let layout = CellDofLayout {
        k,
        n_vertices: cell.vertices.len(),
        n_edges: cell.edges.len(),
        n_faces: cell.faces.len(),
        n_face_moments: n_mom_f,
        n_xw: xw_basis.ncols(),
        n_d5: nkm1 - 1,
    };
    let n_dof = layout.n_dof();

    let basis = MonomialBasis3d::new(ki + 1, cell.centroid, cell.diameter);
    let quad = cell_quadrature(mesh, cell_id, 2 * k + 2)?;
    let mass = monomial_mass(&basis, &quad);
    let volume = cell.volume;

    // gradient Gram of the scalar basis up to degree k
    let mut grad_vals = [
        DMatrix::<S>::zeros(nk, quad.nodes.len()),
        DMatrix::<S>::zeros(nk, quad.nodes.len()),
        DMatrix::<S>::zeros(nk, quad.nodes.len()),
    ];
    for (q, p) in quad.nodes.iter().enumerate() {
        for i in 0..nk {
            let g = basis.grad(p, i);
            grad_vals[0][(i, q)] = g.x;
            grad_vals[1][(i, q)] = g.y;
            grad_vals[2][(i, q)] = g.z;
        }
    }
    let mut gram_h1 = DMatrix::<S>::zeros(nk, nk);
    for gd in &grad_vals {
        let mut wgd = gd.clone();
        for (q, &w) in quad.weights.iter().enumerate() {
            for i in 0..nk {
                wgd[(i, q)] *= w;
            }
        }
        gram_h1 += &wgd * gd.transpose();
    }

    // per-face boundary matrices
    struct FaceData<S: Scalar> {
        sigma: S,
        normal: nalgebra::Vector3<S>,
        /// ∫_f v_n m3d_β rows (stored normal): dim P_{k+1} × n_dof.
        bn: DMatrix<S>,
        /// ∫_f v_d m3d_β rows per Cartesian component d.
        bd: [DMatrix<S>; 3],
        /// Mixed 2D×3D mass on the face.
        x: DMatrix<S>,
    }

    let mut faces: Vec<FaceData<S>> = Vec::with_capacity(cell.faces.len());
    // map mesh entity ids to cell-local positions
    let vert_pos: std::collections::HashMap<usize, usize> = cell
        .vertices
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, i))
        .collect();
    let edge_pos: std::collections::HashMap<usize, usize> = cell
        .edges
        .iter()
        .enumerate()
        .map(|(i, &e)| (e, i))
        .collect();

    for (iface, &(fid, outward)) in cell.faces.iter().enumerate() {
        let fo = &face_ops[fid];
        let f = &mesh.faces[fid];
        debug_assert_eq!(fo.k, k);
        let sigma = if outward { S::one() } else { -S::one() };
        // face-scalar dof → cell dof extraction for the three frame components
        let frame = [f.normal, f.tangent[0], f.tangent[1]];
        let mut r_w = [
            DMatrix::<S>::zeros(fo.n_dof, n_dof),
            DMatrix::<S>::zeros(fo.n_dof, n_dof),
            DMatrix::<S>::zeros(fo.n_dof, n_dof),
        ];
        for (wi, w) in frame.iter().enumerate() {
            // vertex values
            for (lp, &v) in f.vertices.iter().enumerate() {
                let iv = vert_pos[&v];
                for d in 0..3 {
                    r_w[wi][(lp, layout.vertex_dof(iv, d))] = w[d];
                }
            }
            // edge interior values, global order on both sides
            for (le, &eid) in f.edges.iter().enumerate() {
                let ie = edge_pos[&eid];
                for pt in 0..(k - 1) {
                    let row = fo.edge_dof(le, pt);
                    for d in 0..3 {
                        r_w[wi][(row, layout.edge_dof(ie, pt, d))] = w[d];
                    }
                }
            }
            // moments are stored in exactly this frame
            for alpha in 0..n_mom_f {
                r_w[wi][(fo.moment_dof(alpha), layout.face_dof(iface, wi, alpha))] = S::one();
            }
        }

        // mixed mass X[(β2d, α3d)] = ∫_f m2d_β m3d_α
        let nq = fo.quad.nodes.len();
        let mut vals3 = DMatrix::<S>::zeros(nkp1, nq);
        for (q, p) in fo.quad.nodes.iter().enumerate() {
            let x = basis.local(p);
            for i in 0..nkp1 {
                vals3[(i, q)] = basis.eval_local(&x, i);
            }
        }
        let mut w2 = fo.vals2d.clone();
        for (q, &w) in fo.quad.weights.iter().enumerate() {
            for i in 0..w2.nrows() {
                w2[(i, q)] *= w;
            }
        }
        let x_mix = &w2 * vals3.transpose();

        // trace coefficients of the 3D monomials: T = Hf⁻¹ X (exact)
        let t_f = fo
            .mass
            .clone()
            .lu()
            .solve(&x_mix)
            .ok_or(Error::SingularLocal {
                entity: "face",
                index: fid,
                msg: "face mass singular in trace expansion".into(),
            })?;

        let e_w: Vec<DMatrix<S>> = r_w.iter().map(|r| &fo.moments * r).collect();
        let bn = t_f.transpose() * &e_w[0];
        let bd = [0, 1, 2].map(|d| {
            let mut acc = &e_w[0] * frame[0][d];
            acc += &e_w[1] * frame[1][d];
            acc += &e_w[2] * frame[2][d];
            t_f.transpose() * acc
        });
        faces.push(FaceData {
            sigma,
            normal: f.normal,
            bn,
            bd,
            x: x_mix,
        });
    }

    // exact divergence coefficients
    let mass_km1 = mass.view((0, 0), (nkm1, nkm1)).into_owned();
    let mut div_rhs = DMatrix::<S>::zeros(nkm1, n_dof);
    for fd in &faces {
        for j in 0..n_dof {
            div_rhs[(0, j)] += fd.sigma * fd.bn[(0, j)];
        }
    }
    for jm in 1..nkm1 {
        div_rhs[(jm, layout.d5_dof(jm - 1))] = volume;
    }
    let lu_km1 = mass_km1.clone().lu();
    let div_coeff = lu_km1.solve(&div_rhs).ok_or(Error::SingularLocal {
        entity: "cell",
        index: cell_id,
        msg: "P_{k-1} mass singular".into(),
    })?;

    // ∫ v·∇m_β rows for β up to degree k+1
    let mut gradmom = DMatrix::<S>::zeros(nkp1, n_dof);
    for beta in 1..nkp1 {
        for fd in &faces {
            for j in 0..n_dof {
                gradmom[(beta, j)] += fd.sigma * fd.bn[(beta, j)];
            }
        }
        for jm in 0..nkm1 {
            let m = mass[(jm, beta)];
            if m != S::zero() {
                for j in 0..n_dof {
                    gradmom[(beta, j)] -= m * div_coeff[(jm, j)];
                }
            }
        }
    }

    // interior x̂∧ moment machinery (degree ≤ k−3 generators)
    let basis_low = MonomialBasis3d::new((ki - 2).max(0), cell.centroid, cell.diameter);
    let gens_low = xwedge_generators(&basis_low, ki - 3);
    // W[r][g] = (b_r, gen_g)_{L²}
    let w_low = if layout.n_xw > 0 {
        let mg = block_mass_mul(&mass, nkm2, &gens_low);
        xw_basis.transpose() * mg
    } else {
        DMatrix::zeros(0, gens_low.ncols())
    };
    // functional rows of ∫ v·gen_g for the low generators
    let mut gen_rows = DMatrix::<S>::zeros(gens_low.ncols(), n_dof);
    for g in 0..gens_low.ncols() {
        for r in 0..layout.n_xw {
            let w = w_low[(r, g)] * volume;
            if w != S::zero() {
                gen_rows[(g, layout.xw_dof(r))] += w;
            }
        }
    }

    // split solver for Δm_α e_d ∈ [P_{k−2}]³ = ∇P_{k−1} ⊕ x̂∧[P_{k−3}]³;
    // the cross-product part uses the reduced orthonormal basis so the
    // normal equations stay nonsingular
    let basis_km1 = MonomialBasis3d::new(ki - 1, cell.centroid, cell.diameter);
    let grad_low = grad_coeffs_3d(&basis_km1, ki - 2); // columns ↔ m_β, β ≥ 1
    let n_split_cols = grad_low.ncols() + layout.n_xw;
    let mut a_split = DMatrix::<S>::zeros(3 * nkm2, n_split_cols);
    a_split
        .view_mut((0, 0), (3 * nkm2, grad_low.ncols()))
        .copy_from(&grad_low);
    if layout.n_xw > 0 {
        a_split
            .view_mut((0, grad_low.ncols()), (3 * nkm2, layout.n_xw))
            .copy_from(&xw_basis);
    }
    let split_normal = (a_split.transpose() * &a_split).lu();

    // H¹ projector: one scalar Gram, three component right-hand sides
    let surface: S = cell
        .faces
        .iter()
        .map(|&(fid, _)| mesh.faces[fid].area)
        .fold(S::zero(), |a, b| a + b);
    let mut g_tilde = gram_h1.clone();
    for beta in 0..nk {
        let mut s = S::zero();
        for fd in &faces {
            s += fd.x[(0, beta)];
        }
        g_tilde[(0, beta)] = s / surface;
    }
    let lu_g = g_tilde.lu();

    let mut pi_nabla = DMatrix::<S>::zeros(3 * nk, n_dof);
    for d in 0..3 {
        let mut b_d = DMatrix::<S>::zeros(nk, n_dof);
        // gauge row: boundary mean of the component
        for fd in &faces {
            for j in 0..n_dof {
                b_d[(0, j)] += fd.bd[d][(0, j)] / surface;
            }
        }
        for alpha in 1..nk {
            // volume part: −∫ (Δm_α e_d)·v via the split
            let lap = laplacian_coeffs_3d(&basis, alpha);
            if !lap.is_empty() {
                let mut rhs = nalgebra::DVector::<S>::zeros(3 * nkm2);
                for &(j, c) in &lap {
                    rhs[d * nkm2 + j] = c;
                }
                let coef = split_normal
                    .solve(&(a_split.transpose() * rhs))
                    .ok_or(Error::SingularLocal {
                        entity: "cell",
                        index: cell_id,
                        msg: "polynomial split singular".into(),
                    })?;
                for (col, c) in coef.iter().enumerate() {
                    if *c == S::zero() {
                        continue;
                    }
                    if col < grad_low.ncols() {
                        let beta = col + 1;
                        for j in 0..n_dof {
                            b_d[(alpha, j)] -= *c * gradmom[(beta, j)];
                        }
                    } else {
                        // ∫ v·b_r = |K|·(x̂∧ moment dof r)
                        let r = col - grad_low.ncols();
                        b_d[(alpha, layout.xw_dof(r))] -= *c * volume;
                    }
                }
            }
            // boundary part: Σ_f σ_f ∫_f (∇m_α·n_f) v_d
            for fd in &faces {
                for dp in 0..3 {
                    if let Some((jp, c)) = basis.deriv_coeffs(alpha, dp) {
                        let scale = fd.sigma * fd.normal[dp] * c;
                        if scale != S::zero() {
                            for j in 0..n_dof {
                                b_d[(alpha, j)] += scale * fd.bd[d][(jp, j)];
                            }
                        }
                    }
                }
            }
        }
        let sol = lu_g.solve(&b_d).ok_or(Error::SingularLocal {
            entity: "cell",
            index: cell_id,
            msg: "H1 projector singular".into(),
        })?;
        pi_nabla.view_mut((d * nk, 0), (nk, n_dof)).copy_from(&sol);
    }

    // full component moments by least squares over the spanning functionals
    let grad_full = grad_coeffs_3d(&basis, ki); // columns ↔ m_β, β = 1..dim P_{k+1}
    let basis_k = MonomialBasis3d::new(ki, cell.centroid, cell.diameter);
    let gens_full = xwedge_generators(&basis_k, ki - 1);
    let n_low = gens_low.ncols();
    let n_eq = grad_full.ncols() + gens_full.ncols();
    let mut a_mom = DMatrix::<S>::zeros(n_eq, 3 * nk);
    let mut rhs_mom = DMatrix::<S>::zeros(n_eq, n_dof);
    let mut row = 0;
    for col in 0..grad_full.ncols() {
        for i in 0..3 * nk {
            a_mom[(row, i)] = grad_full[(i, col)];
        }
        let beta = col + 1;
        for j in 0..n_dof {
            rhs_mom[(row, j)] = gradmom[(beta, j)];
        }
        row += 1;
    }
    // Π∇-weighted mass for the slice equations
    let mass_k = mass.view((0, 0), (nk, nk));
    let mut mv_pinab = DMatrix::<S>::zeros(3 * nk, n_dof);
    for d in 0..3 {
        let prod = &mass_k * pi_nabla.view((d * nk, 0), (nk, n_dof));
        mv_pinab
            .view_mut((d * nk, 0), (nk, n_dof))
            .copy_from(&prod);
    }
    for g in 0..gens_full.ncols() {
        for i in 0..3 * nk {
            a_mom[(row, i)] = gens_full[(i, g)];
        }
        if g < n_low {
            for j in 0..n_dof {
                rhs_mom[(row, j)] = gen_rows[(g, j)];
            }
        } else {
            // super-enhancement: ∫ v·(x̂∧m̂ e_d) = ∫ Π∇v·(x̂∧m̂ e_d)
            for j in 0..n_dof {
                let mut s = S::zero();
                for i in 0..3 * nk {
                    s += gens_full[(i, g)] * mv_pinab[(i, j)];
                }
                rhs_mom[(row, j)] = s;
            }
        }
        row += 1;
    }
    debug_assert_eq!(row, n_eq);
    let normal_mom = (a_mom.transpose() * &a_mom).lu();
    let moments = normal_mom
        .solve(&(a_mom.transpose() * &rhs_mom))
        .ok_or(Error::SingularLocal {
            entity: "cell",
            index: cell_id,
            msg: "moment reconstruction singular".into(),
        })?;

    // L² projector componentwise
    let lu_k = mass.view((0, 0), (nk, nk)).into_owned().lu();
    let mut pi0 = DMatrix::<S>::zeros(3 * nk, n_dof);
    for d in 0..3 {
        let sol = lu_k
            .solve(&moments.view((d * nk, 0), (nk, n_dof)).into_owned())
            .ok_or(Error::SingularLocal {
                entity: "cell",
                index: cell_id,
                msg: "P_k mass singular".into(),
            })?;
        pi0.view_mut((d * nk, 0), (nk, n_dof)).copy_from(&sol);
    }

    // tensor gradient projection Π⁰_{k−1}∇v
    let mut grad_proj = Vec::with_capacity(9);
    for d in 0..3 {
        for jdir in 0..3 {
            let mut rows = DMatrix::<S>::zeros(nkm1, n_dof);
            for alpha in 0..nkm1 {
                // −∫ v_d ∂_j m_α
                if let Some((jp, c)) = basis.deriv_coeffs(alpha, jdir) {
                    for j in 0..n_dof {
                        rows[(alpha, j)] -= c * moments[(d * nk + jp, j)];
                    }
                }
                // + Σ_f σ_f n_j ∫_f v_d m_α
                for fd in &faces {
                    let scale = fd.sigma * fd.normal[jdir];
                    if scale != S::zero() {
                        for j in 0..n_dof {
                            rows[(alpha, j)] += scale * fd.bd[d][(alpha, j)];
                        }
                    }
                }
            }
            let sol = lu_km1.solve(&rows).ok_or(Error::SingularLocal {
                entity: "cell",
                index: cell_id,
                msg: "P_{k-1} mass singular".into(),
            })?;
            grad_proj.push(sol);
        }
    }

    // dofs of vector polynomials (m_α e_d), columns component-blocked
    let mut dof_of_poly = DMatrix::<S>::zeros(n_dof, 3 * nk);
    for d in 0..3 {
        for alpha in 0..nk {
            let col = d * nk + alpha;
            for (iv, &v) in cell.vertices.iter().enumerate() {
                dof_of_poly[(layout.vertex_dof(iv, d), col)] =
                    basis.eval(&mesh.vertices[v], alpha);
            }
            for (ie, &e) in cell.edges.iter().enumerate() {
                let [a, b] = mesh.edges[e];
                let pa = mesh.vertices[a];
                let pb = mesh.vertices[b];
                for (pt, &t) in crate::poly::lobatto_interior(k).iter().enumerate() {
                    let s = lit::<S>(0.5 * (t + 1.0));
                    let p = pa + (pb - pa) * s;
                    dof_of_poly[(layout.edge_dof(ie, pt, d), col)] = basis.eval(&p, alpha);
                }
            }
            for (iface, &(fid, _)) in cell.faces.iter().enumerate() {
                let f = &mesh.faces[fid];
                let frame = [f.normal, f.tangent[0], f.tangent[1]];
                for (wi, w) in frame.iter().enumerate() {
                    if w[d] == S::zero() {
                        continue;
                    }
                    for beta in 0..n_mom_f {
                        dof_of_poly[(layout.face_dof(iface, wi, beta), col)] +=
                            w[d] * faces[iface].x[(beta, alpha)] / f.area;
                    }
                }
            }
            for r in 0..layout.n_xw {
                // (1/|K|) (b_r, m_α e_d): b_r coefficients live in deg ≤ k−2
                let mut s = S::zero();
                for jb in 0..nkm2 {
                    s += xw_basis[(d * nkm2 + jb, r)] * mass[(jb, alpha)];
                }
                dof_of_poly[(layout.xw_dof(r), col)] = s / volume;
            }
            if let Some((jp, c)) = basis.deriv_coeffs(alpha, d) {
                for jm in 1..nkm1 {
                    dof_of_poly[(layout.d5_dof(jm - 1), col)] = c * mass[(jp, jm)] / volume;
                }
            }
        }
    }

    Ok(ElementOps {
        cell: cell_id,
        k,
        layout,
        n_dof,
        basis,
        mass,
        div_coeff,
        pi_nabla,
        pi0,
        moments,
        grad_proj,
        dof_of_poly,
        xw_basis,
        quad,
    })
}

/// Physical Laplacian of m_α as coefficients in the lower-degree basis.
fn laplacian_coeffs_3d<S: Scalar>(basis: &MonomialBasis3d<S>, alpha: usize) -> Vec<(usize, S)> {
    let e = basis.exps[alpha];
    let h2 = basis.h * basis.h;
    let mut out = Vec::new();
    for d in 0..3 {
        if e[d] >= 2 {
            let mut lo = e;
            lo[d] -= 2;
            out.push((
                basis.index_of(lo),
                S::from_usize(e[d] * (e[d] - 1)).unwrap() / h2,
            ));
        }
    }
    out
}

fn block_mass_mul<S: Scalar>(mass: &DMatrix<S>, n: usize, m: &DMatrix<S>) -> DMatrix<S> {
    let mut out = DMatrix::zeros(m.nrows(), m.ncols());
    let mb = mass.view((0, 0), (n, n));
    for blk in 0..3 {
        let prod = &mb * m.view((blk * n, 0), (n, m.ncols()));
        out.view_mut((blk * n, 0), (n, m.ncols())).copy_from(&prod);
    }
    out
}
