//! Decomposition [P_n(K)]³ = ∇P_{n+1}(K) ⊕ x̂∧[P_{n−1}(K)]³ over a cell,
//! with the rank-deficient cross-product generator set reduced by pivoted
//! Gram orthogonalization against the L²(K) inner product.
//!
//! Vector polynomial coefficients are stored component-blocked: a field
//! q = (q_x, q_y, q_z) with q_d = Σ_α c_{d,α} m_α becomes the column
//! [c_x; c_y; c_z] of length 3·dim P_n.

use super::monomials::{dim_p3, MonomialBasis3d};
use crate::linalg::pivoted_gram_basis;
use crate::{lit, Error, Result, Scalar};
use nalgebra::DMatrix;

/// Expected dimension of x̂∧[P_p]³: 3·dim P_p − dim P_{p−1}.
pub fn xwedge_dim(p: i64) -> usize {
    if p < 0 {
        0
    } else {
        3 * dim_p3(p) - dim_p3(p - 1)
    }
}

/// Raw generators x̂∧(m_α e_d) for |α| ≤ p, as coefficient columns in the
/// degree ≤ p+1 vector monomial basis. Generator order: α-major, then d.
pub fn xwedge_generators<S: Scalar>(basis: &MonomialBasis3d<S>, p: i64) -> DMatrix<S> {
    let np1 = basis.len(); // basis must have degree ≥ p+1
    assert!(basis.degree >= p + 1);
    let n_gen = 3 * dim_p3(p);
    let mut gens = DMatrix::<S>::zeros(3 * np1, n_gen);
    if p < 0 {
        return gens;
    }
    // x̂ ∧ e_x = (0, ẑ, −ŷ), x̂ ∧ e_y = (−ẑ, 0, x̂), x̂ ∧ e_z = (ŷ, −x̂, 0)
    // written with the scaled linear monomials x̂ = m_{100}, ŷ = m_{010},
    // ẑ = m_{001}; multiplying by m_α shifts exponents.
    let lin = [[1usize, 0, 0], [0, 1, 0], [0, 0, 1]];
    let mut col = 0;
    for alpha_idx in 0..dim_p3(p) {
        let alpha = basis.exps[alpha_idx];
        let shifted = |axis: usize| {
            let mut e = alpha;
            e[0] += lin[axis][0];
            e[1] += lin[axis][1];
            e[2] += lin[axis][2];
            basis.index_of(e)
        };
        let (ix, iy, iz) = (shifted(0), shifted(1), shifted(2));
        for d in 0..3 {
            match d {
                0 => {
                    gens[(np1 + iz, col)] = S::one();
                    gens[(2 * np1 + iy, col)] = -S::one();
                }
                1 => {
                    gens[(iz, col)] = -S::one();
                    gens[(2 * np1 + ix, col)] = S::one();
                }
                _ => {
                    gens[(iy, col)] = S::one();
                    gens[(np1 + ix, col)] = -S::one();
                }
            }
            col += 1;
        }
    }
    gens
}

/// Orthonormal (in L²(K)) basis of x̂∧[P_p]³ as columns in the degree ≤ p+1
/// vector monomial basis; errors if the numerical rank disagrees with the
/// generic dimension.
pub fn xwedge_basis<S: Scalar>(
    cell: usize,
    basis: &MonomialBasis3d<S>,
    mass: &DMatrix<S>,
    p: i64,
) -> Result<DMatrix<S>> {
    let expected = xwedge_dim(p);
    if expected == 0 {
        return Ok(DMatrix::zeros(3 * basis.len(), 0));
    }
    let gens = xwedge_generators(basis, p);
    let np1 = basis.len();
    // Gram of generators under the block-diagonal vector mass matrix
    let mut mg = DMatrix::<S>::zeros(3 * np1, gens.ncols());
    for blk in 0..3 {
        let rows = blk * np1;
        let sub = gens.view((rows, 0), (np1, gens.ncols()));
        let prod = mass.view((0, 0), (np1, np1)) * sub;
        mg.view_mut((rows, 0), (np1, gens.ncols())).copy_from(&prod);
    }
    let gram = gens.transpose() * mg;
    let gb = pivoted_gram_basis(&gram, lit::<S>(1e-10));
    if gb.rank() != expected {
        return Err(Error::RankDeficient {
            cell,
            expected,
            found: gb.rank(),
        });
    }
    Ok(&gens * &gb.coeff)
}

/// Coefficient columns of ∇m_α, |α| = 1..n+1, in the degree ≤ n vector basis.
pub fn grad_coeffs_3d<S: Scalar>(basis_hi: &MonomialBasis3d<S>, n: i64) -> DMatrix<S> {
    // basis_hi must extend to degree n+1; output lives in degree ≤ n blocks
    assert!(basis_hi.degree >= n + 1);
    let n_lo = dim_p3(n);
    let n_cols = dim_p3(n + 1) - 1;
    let mut out = DMatrix::<S>::zeros(3 * n_lo, n_cols);
    for (col, alpha_idx) in (1..dim_p3(n + 1)).enumerate() {
        for d in 0..3 {
            if let Some((j, c)) = basis_hi.deriv_coeffs(alpha_idx, d) {
                out[(d * n_lo + j, col)] = c;
            }
        }
    }
    out
}

/// The full split of [P_k]³ used by the velocity space machinery.
pub struct VectorPolySplit<S: Scalar> {
    /// ∇P_{k+1} columns in the degree ≤ k vector basis (dim P_{k+1} − 1 of them).
    pub grad: DMatrix<S>,
    /// Orthonormal basis of x̂∧[P_{k−1}]³.
    pub xwedge: DMatrix<S>,
    /// Raw slice generators x̂∧(m̂ e_d) for |m̂| ∈ {k−2, k−1}
    /// (the super-enhancement test set), degree ≤ k columns.
    pub slice: DMatrix<S>,
}

impl<S: Scalar> VectorPolySplit<S> {
    pub fn build(
        cell: usize,
        basis_kp1: &MonomialBasis3d<S>,
        mass_kp1: &DMatrix<S>,
        k: i64,
    ) -> Result<Self> {
        assert!(k >= 2, "velocity spaces need k ≥ 2");
        let nk = dim_p3(k);
        let basis_k = MonomialBasis3d::new(k, basis_kp1.centroid, basis_kp1.h);
        let grad = grad_coeffs_3d(basis_kp1, k);
        let mass_k = mass_kp1.view((0, 0), (nk, nk)).into_owned();
        let xwedge = xwedge_basis(cell, &basis_k, &mass_k, k - 1)?;
        // slice generators: columns of the full generator set with |α| ≥ k−2
        let gens = xwedge_generators(&basis_k, k - 1);
        let lo = 3 * dim_p3(k - 3);
        let slice = gens.columns(lo, gens.ncols() - lo).into_owned();
        Ok(Self {
            grad,
            xwedge,
            slice,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_hex_mesh;
    use crate::poly::{cell_quadrature, exponents_3d};
    use nalgebra::Point3;

    fn cube_mass(k: i64) -> (MonomialBasis3d<f64>, DMatrix<f64>) {
        let mesh = generate_hex_mesh::<f64>(1, [0.0; 3], [1.0; 3]).unwrap();
        let cell = &mesh.cells[0];
        let basis = MonomialBasis3d::new(k, cell.centroid, cell.diameter);
        let rule = cell_quadrature(&mesh, 0, 2 * k as usize).unwrap();
        let n = basis.len();
        let mut mass = DMatrix::zeros(n, n);
        for (p, &w) in rule.nodes.iter().zip(&rule.weights) {
            for i in 0..n {
                let vi = basis.eval(p, i);
                for j in 0..n {
                    mass[(i, j)] += w * vi * basis.eval(p, j);
                }
            }
        }
        (basis, mass)
    }

    #[test]
    fn grad_p3_has_dimension_19() {
        let (basis, _mass) = cube_mass(3);
        let g = grad_coeffs_3d(&basis, 2);
        assert_eq!(g.ncols(), 19);
        // columns linearly independent: Gram of plain coefficients
        let gram = g.transpose() * &g;
        assert!(gram.determinant() > 1e-12);
    }

    #[test]
    fn xwedge_p1_has_dimension_11_on_cube() {
        let (basis, mass) = cube_mass(2);
        let xw = xwedge_basis(0, &basis, &mass, 1).unwrap();
        assert_eq!(xw.ncols(), 11);
        assert_eq!(xwedge_dim(1), 11);
    }

    #[test]
    fn xwedge_fields_orthogonal_to_radial_with_zero_net_divergence() {
        let (basis, mass) = cube_mass(2);
        let xw = xwedge_basis(0, &basis, &mass, 1).unwrap();
        let n = basis.len();
        // pointwise (x − x_K) ⊥ field, checked at a few sample points
        let samples = [
            Point3::new(0.13, 0.82, 0.44),
            Point3::new(0.91, 0.07, 0.66),
            Point3::new(0.35, 0.52, 0.18),
        ];
        for col in 0..xw.ncols() {
            for p in &samples {
                let xl = basis.local(p) * basis.h; // x − x_K
                let mut field = nalgebra::Vector3::zeros();
                for d in 0..3 {
                    for alpha in 0..n {
                        field[d] += xw[(d * n + alpha, col)] * basis.eval(p, alpha);
                    }
                }
                assert!(xl.dot(&field).abs() < 1e-12, "column {col} at {p:?}");
            }
            // ∫_K div(x̂∧p) dK = 0 for the degree ≤ 1 generator set: the
            // divergence is −x̂·curl p with constant curl, and x̂ is centered
            let mut divc = vec![0.0; n];
            for d in 0..3 {
                for alpha in 0..n {
                    let c = xw[(d * n + alpha, col)];
                    if c != 0.0 {
                        if let Some((j, factor)) = basis.deriv_coeffs(alpha, d) {
                            divc[j] += c * factor;
                        }
                    }
                }
            }
            let mean: f64 = (0..n).map(|j| divc[j] * mass[(0, j)]).sum();
            assert!(mean.abs() < 1e-13, "column {col} net divergence {mean}");
        }
    }

    #[test]
    fn split_dimensions_compose() {
        for k in 2..=4i64 {
            let (basis, mass) = cube_mass(k + 1);
            let split = VectorPolySplit::build(0, &basis, &mass, k).unwrap();
            assert_eq!(split.grad.ncols(), dim_p3(k + 1) - 1);
            assert_eq!(split.xwedge.ncols(), xwedge_dim(k - 1));
            // ∇P_{k+1} ⊕ x̂∧[P_{k−1}]³ spans [P_k]³
            assert_eq!(
                split.grad.ncols() + split.xwedge.ncols(),
                3 * dim_p3(k),
                "decomposition dimensions must add up for k = {k}"
            );
            let exps = exponents_3d(k);
            assert_eq!(exps.len(), dim_p3(k));
        }
    }

    #[test]
    fn rank_error_reports_cell() {
        // degenerate mass (zero) forces rank collapse
        let basis = MonomialBasis3d::<f64>::new(2, Point3::origin(), 1.0);
        let mass = DMatrix::zeros(basis.len(), basis.len());
        match xwedge_basis(7, &basis, &mass, 1) {
            Err(crate::Error::RankDeficient { cell: 7, .. }) => {}
            other => panic!("expected rank error, got {other:?}"),
        }
    }
}
