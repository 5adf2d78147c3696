//! Scaled monomial bases, polynomial space decompositions and quadrature on
//! polygons and polyhedra.

mod monomials;
mod quadrature;
mod split;

pub use monomials::{
    dim_p2, dim_p3, exponents_2d, exponents_3d, gauss_legendre, lobatto_interior,
    MonomialBasis2d, MonomialBasis3d,
};
pub use quadrature::{cell_quadrature, face_quadrature, tet_rule, tri_rule, QuadratureRule};
pub use split::{grad_coeffs_3d, xwedge_basis, xwedge_dim, xwedge_generators, VectorPolySplit};
