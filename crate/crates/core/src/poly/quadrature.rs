//! Composite quadrature on polygons and polyhedra via sub-simplices with
//! collapsed tensor Gauss rules on each simplex.

use super::monomials::gauss_legendre;
use crate::mesh::{subtessellate, PolyMesh};
use crate::{lit, Error, Result, Scalar};
use nalgebra::Point3;

#[derive(Clone, Debug)]
pub struct QuadratureRule<S: Scalar> {
    pub nodes: Vec<Point3<S>>,
    pub weights: Vec<S>,
    pub exactness: usize,
}

impl<S: Scalar> QuadratureRule<S> {
    pub fn total_weight(&self) -> S {
        self.weights.iter().fold(S::zero(), |a, &b| a + b)
    }

    pub fn integrate(&self, f: impl Fn(&Point3<S>) -> S) -> S {
        self.nodes
            .iter()
            .zip(&self.weights)
            .fold(S::zero(), |acc, (p, &w)| acc + f(p) * w)
    }
}

const MAX_DEGREE: usize = 16;

fn gl01<S: Scalar>(n: usize) -> Vec<(S, S)> {
    // map [-1, 1] to [0, 1]
    gauss_legendre(n)
        .iter()
        .map(|&(x, w)| (lit::<S>(0.5 * (x + 1.0)), lit::<S>(0.5 * w)))
        .collect()
}

/// Rule of the requested polynomial exactness on the physical tetrahedron.
pub fn tet_rule<S: Scalar>(pts: &[Point3<S>; 4], degree: usize) -> Result<QuadratureRule<S>> {
    if degree > MAX_DEGREE {
        return Err(Error::Unsupported(format!(
            "tet quadrature exactness {degree} exceeds {MAX_DEGREE}"
        )));
    }
    let nu = gl01::<S>(degree / 2 + 2);
    let nv = gl01::<S>((degree + 2).div_ceil(2));
    let nw = gl01::<S>((degree + 1).div_ceil(2));
    let e1 = pts[1] - pts[0];
    let e2 = pts[2] - pts[0];
    let e3 = pts[3] - pts[0];
    let det = e1.cross(&e2).dot(&e3).abs();
    let mut nodes = Vec::with_capacity(nu.len() * nv.len() * nw.len());
    let mut weights = Vec::with_capacity(nodes.capacity());
    for &(u, wu) in &nu {
        for &(v, wv) in &nv {
            for &(w, ww) in &nw {
                // collapsed map onto the reference tet, Jacobian (1−u)²(1−v)
                let x = u;
                let y = v * (S::one() - u);
                let z = w * (S::one() - u) * (S::one() - v);
                let jac = (S::one() - u) * (S::one() - u) * (S::one() - v);
                nodes.push(pts[0] + e1 * x + e2 * y + e3 * z);
                weights.push(wu * wv * ww * jac * det);
            }
        }
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        exactness: degree,
    })
}

/// Rule on a physical 3D triangle.
pub fn tri_rule<S: Scalar>(pts: &[Point3<S>; 3], degree: usize) -> Result<QuadratureRule<S>> {
    if degree > MAX_DEGREE {
        return Err(Error::Unsupported(format!(
            "triangle quadrature exactness {degree} exceeds {MAX_DEGREE}"
        )));
    }
    let nu = gl01::<S>(degree / 2 + 2);
    let nv = gl01::<S>((degree + 1).div_ceil(2));
    let e1 = pts[1] - pts[0];
    let e2 = pts[2] - pts[0];
    let det = e1.cross(&e2).norm(); // twice the area
    let mut nodes = Vec::with_capacity(nu.len() * nv.len());
    let mut weights = Vec::with_capacity(nodes.capacity());
    for &(u, wu) in &nu {
        for &(v, wv) in &nv {
            let x = u;
            let y = v * (S::one() - u);
            let jac = S::one() - u;
            nodes.push(pts[0] + e1 * x + e2 * y);
            weights.push(wu * wv * jac * det);
        }
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        exactness: degree,
    })
}

/// Composite rule over the tetrahedral subtessellation of a cell.
pub fn cell_quadrature<S: Scalar>(
    mesh: &PolyMesh<S>,
    cell: usize,
    degree: usize,
) -> Result<QuadratureRule<S>> {
    let tets = subtessellate(mesh, cell)?;
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for tet in &tets {
        let r = tet_rule(&tet.points, degree)?;
        nodes.extend(r.nodes);
        weights.extend(r.weights);
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        exactness: degree,
    })
}

/// Composite rule over the triangle fan of a face, with nodes in 3D.
pub fn face_quadrature<S: Scalar>(
    mesh: &PolyMesh<S>,
    face: usize,
    degree: usize,
) -> Result<QuadratureRule<S>> {
    let f = &mesh.faces[face];
    let m = f.vertices.len();
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for i in 0..m {
        let tri = [
            f.centroid,
            mesh.vertices[f.vertices[i]],
            mesh.vertices[f.vertices[(i + 1) % m]],
        ];
        let r = tri_rule(&tri, degree)?;
        nodes.extend(r.nodes);
        weights.extend(r.weights);
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        exactness: degree,
    })
}

#[allow(dead_code)]
pub(crate) fn reference_tet_moment(a: usize, b: usize, c: usize) -> f64 {
    // ∫_T x^a y^b z^c over the unit tet = a! b! c! / (a+b+c+3)!
    fact(a) * fact(b) * fact(c) / fact(a + b + c + 3)
}

#[allow(dead_code)]
pub(crate) fn reference_tri_moment(a: usize, b: usize) -> f64 {
    fact(a) * fact(b) / fact(a + b + 2)
}

fn fact(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_hex_mesh, truncated_octahedron};

    #[test]
    fn tet_rule_exact_for_reference_moments() {
        let pts = [
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(0.0, 0.0, 1.0),
        ];
        for degree in [2usize, 5, 10] {
            let rule = tet_rule::<f64>(&pts, degree).unwrap();
            for a in 0..=degree {
                for b in 0..=(degree - a) {
                    for c in 0..=(degree - a - b) {
                        let num = rule.integrate(|p| {
                            p.x.powi(a as i32) * p.y.powi(b as i32) * p.z.powi(c as i32)
                        });
                        let exact = reference_tet_moment(a, b, c);
                        assert!(
                            (num - exact).abs() <= 1e-12 * exact.max(1e-3),
                            "deg {degree} moment ({a},{b},{c}): {num} vs {exact}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn tri_rule_exact_for_reference_moments() {
        let pts = [
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ];
        for degree in [0usize, 3, 10] {
            let rule = tri_rule::<f64>(&pts, degree).unwrap();
            for a in 0..=degree {
                for b in 0..=(degree - a) {
                    let num = rule.integrate(|p| p.x.powi(a as i32) * p.y.powi(b as i32));
                    let exact = reference_tri_moment(a, b);
                    assert!(
                        (num - exact).abs() <= 1e-12 * exact.max(1e-3),
                        "deg {degree} moment ({a},{b}): {num} vs {exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn unit_cube_second_moment() {
        let mesh = generate_hex_mesh::<f64>(1, [0.0; 3], [1.0; 3]).unwrap();
        let rule = cell_quadrature(&mesh, 0, 2).unwrap();
        let m = rule.integrate(|p| p.x * p.x);
        assert!((m - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn unit_square_face_weight_sum() {
        let mesh = generate_hex_mesh::<f64>(1, [0.0; 3], [1.0; 3]).unwrap();
        let rule = face_quadrature(&mesh, 0, 0).unwrap();
        assert!((rule.total_weight() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn truncated_octahedron_volume_via_quadrature() {
        let mesh = truncated_octahedron::<f64>().unwrap();
        let rule = cell_quadrature(&mesh, 0, 4).unwrap();
        let vol = mesh.cells[0].volume;
        assert!((rule.total_weight() - vol).abs() < 1e-12 * vol);
    }

    #[test]
    fn unsupported_exactness_rejected() {
        let pts = [
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(0.0, 0.0, 1.0),
        ];
        assert!(tet_rule::<f64>(&pts, 25).is_err());
    }
}
