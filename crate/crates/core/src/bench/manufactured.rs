//! Manufactured smooth Stokes solution on the unit cube.
//!
//! The velocity is the curl of the vector potential
//! Φ = (sin²(πx)·sin(πy)·sin(πz), sin(πx)·sin²(πy)·sin(πz),
//!      sin(πx)·sin(πy)·sin²(πz)), hence exactly divergence-free, and the
//! pressure is p = sin(πx)·cos(πy)·cos(πz), which has zero mean. With unit
//! viscosity the body force is f = −div ε(u) − ∇p = −Δu/2 − ∇p. Tractions
//! on the two x-faces come from (ε(u) + pI)·n.

use crate::assembly::StokesProblem;
use crate::mesh::PolyMesh;
use crate::{lit, Scalar};
use nalgebra::{Matrix3, Point3, Vector3};
use std::f64::consts::PI;
use std::sync::Arc;

fn trig(p: f64) -> (f64, f64) {
    ((PI * p).sin(), (PI * p).cos())
}

pub fn exact_velocity(px: f64, py: f64, pz: f64) -> (Vector3<f64>, Matrix3<f64>) {
    let (sx, cx) = trig(px);
    let (sy, cy) = trig(py);
    let (sz, cz) = trig(pz);
    let u0 = PI * sx * (cy * sz.powi(2) - cz * sy.powi(2));
    let u1 = PI * sy * (-cx * sz.powi(2) + cz * sx.powi(2));
    let u2 = PI * sz * (cx * sy.powi(2) - cy * sx.powi(2));
    let g00 = PI.powi(2) * cx * (cy * sz.powi(2) - cz * sy.powi(2));
    let g01 = PI.powi(2) * sx * sy * (-2.0 * cy * cz + cz.powi(2) - 1.0);
    let g02 = PI.powi(2) * sx * sz * (2.0 * cy * cz + sy.powi(2));
    let g10 = PI.powi(2) * sx * sy * (2.0 * cx * cz + sz.powi(2));
    let g11 = PI.powi(2) * cy * (-cx * sz.powi(2) + cz * sx.powi(2));
    let g12 = PI.powi(2) * sy * sz * (cx.powi(2) - 2.0 * cx * cz - 1.0);
    let g20 = PI.powi(2) * sx * sz * (-2.0 * cx * cy + cy.powi(2) - 1.0);
    let g21 = PI.powi(2) * sy * sz * (2.0 * cx * cy + sx.powi(2));
    let g22 = PI.powi(2) * cz * (cx * sy.powi(2) - cy * sx.powi(2));
    (
        Vector3::new(u0, u1, u2),
        Matrix3::new(g00, g01, g02, g10, g11, g12, g20, g21, g22),
    )
}

pub fn exact_pressure(px: f64, py: f64, pz: f64) -> f64 {
    let (sx, _) = trig(px);
    let (_, cy) = trig(py);
    let (_, cz) = trig(pz);
    cy * cz * sx
}

pub fn body_force(px: f64, py: f64, pz: f64) -> Vector3<f64> {
    let (sx, cx) = trig(px);
    let (sy, cy) = trig(py);
    let (sz, cz) = trig(pz);
    let f0 = PI
        * (-cx * cy * cz + 3.0 * PI.powi(2) * cy * sx * sz.powi(2) - PI.powi(2) * cy * sx
            - 3.0 * PI.powi(2) * cz * sx * sy.powi(2)
            + PI.powi(2) * cz * sx);
    let f1 = PI
        * sy
        * (-3.0 * PI.powi(2) * cx * sz.powi(2) + PI.powi(2) * cx + 3.0 * PI.powi(2) * cz * sx.powi(2)
            + cz * sx
            - PI.powi(2) * cz);
    let f2 = PI
        * sz
        * (3.0 * PI.powi(2) * cx * sy.powi(2) - PI.powi(2) * cx - 3.0 * PI.powi(2) * cy * sx.powi(2)
            + cy * sx
            + PI.powi(2) * cy);
    Vector3::new(f0, f1, f2)
}

pub fn exact_velocity_s<S: Scalar>(p: &Point3<S>) -> (Vector3<S>, Matrix3<S>) {
    let (v, g) = exact_velocity(
        p.x.to_f64_lossy(),
        p.y.to_f64_lossy(),
        p.z.to_f64_lossy(),
    );
    (v.map(lit::<S>), g.map(lit::<S>))
}

pub fn exact_pressure_s<S: Scalar>(p: &Point3<S>) -> S {
    lit::<S>(exact_pressure(
        p.x.to_f64_lossy(),
        p.y.to_f64_lossy(),
        p.z.to_f64_lossy(),
    ))
}

/// Traction (ε(u) + pI)·n for unit viscosity.
pub fn traction<S: Scalar>(p: &Point3<S>, n: &Vector3<f64>) -> Vector3<S> {
    let (px, py, pz) = (
        p.x.to_f64_lossy(),
        p.y.to_f64_lossy(),
        p.z.to_f64_lossy(),
    );
    let (_, g) = exact_velocity(px, py, pz);
    let eps = (g + g.transpose()) * 0.5;
    let t = eps * n + n * exact_pressure(px, py, pz);
    t.map(lit::<S>)
}

/// The paper-style benchmark: Neumann data on the two x-faces, Dirichlet
/// data from the exact solution elsewhere.
pub fn manufactured_problem<S: Scalar>(mesh: &PolyMesh<S>) -> StokesProblem<S> {
    let mut dirichlet = Vec::new();
    let mut neumann = Vec::new();
    for f in mesh.boundary_faces() {
        let n = mesh.faces[f].normal;
        if n.x.abs().to_f64_lossy() > 0.99 {
            neumann.push(f);
        } else {
            dirichlet.push(f);
        }
    }
    StokesProblem {
        viscosity: vec![S::one(); mesh.cells.len()],
        body_force: Arc::new(|p: &Point3<S>| {
            body_force(
                p.x.to_f64_lossy(),
                p.y.to_f64_lossy(),
                p.z.to_f64_lossy(),
            )
            .map(lit::<S>)
        }),
        dirichlet_faces: dirichlet,
        dirichlet_data: Arc::new(exact_velocity_s::<S>),
        neumann_faces: neumann,
        traction: Arc::new(|p: &Point3<S>| {
            // the outward normal on x = 0 is −e_x, on x = 1 it is +e_x
            let n = if p.x.to_f64_lossy() < 0.5 {
                Vector3::new(-1.0, 0.0, 0.0)
            } else {
                Vector3::new(1.0, 0.0, 0.0)
            };
            traction(p, &n)
        }),
    }
}

/// Pure-Dirichlet variant of the same exact solution (used by the solver
/// benchmarks, where the pressure gauge is handled by the coarse space).
pub fn manufactured_dirichlet<S: Scalar>(mesh: &PolyMesh<S>) -> StokesProblem<S> {
    StokesProblem {
        viscosity: vec![S::one(); mesh.cells.len()],
        body_force: Arc::new(|p: &Point3<S>| {
            body_force(
                p.x.to_f64_lossy(),
                p.y.to_f64_lossy(),
                p.z.to_f64_lossy(),
            )
            .map(lit::<S>)
        }),
        dirichlet_faces: mesh.boundary_faces().collect(),
        dirichlet_data: Arc::new(exact_velocity_s::<S>),
        neumann_faces: vec![],
        traction: Arc::new(|_: &Point3<S>| Vector3::zeros()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn velocity_is_pointwise_divergence_free() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let (x, y, z) = (rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>());
            let (_, g) = exact_velocity(x, y, z);
            let div = g[(0, 0)] + g[(1, 1)] + g[(2, 2)];
            assert!(div.abs() < 1e-12, "div = {div} at ({x},{y},{z})");
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(6);
        let h = 1e-6;
        for _ in 0..50 {
            let (x, y, z) = (rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>());
            let (_, g) = exact_velocity(x, y, z);
            for j in 0..3 {
                let mut hi = [x, y, z];
                let mut lo = [x, y, z];
                hi[j] += h;
                lo[j] -= h;
                let (uh, _) = exact_velocity(hi[0], hi[1], hi[2]);
                let (ul, _) = exact_velocity(lo[0], lo[1], lo[2]);
                for i in 0..3 {
                    let fd = (uh[i] - ul[i]) / (2.0 * h);
                    assert!((fd - g[(i, j)]).abs() < 1e-5, "entry ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn force_matches_finite_difference_oracle() {
        // f = −Δu/2 − ∇p recomputed by central differences (step 1e-4)
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let h = 1e-4;
        for _ in 0..30 {
            let pt = [
                0.1 + 0.8 * rng.gen::<f64>(),
                0.1 + 0.8 * rng.gen::<f64>(),
                0.1 + 0.8 * rng.gen::<f64>(),
            ];
            let mut lap = Vector3::zeros();
            let (u0, _) = exact_velocity(pt[0], pt[1], pt[2]);
            for j in 0..3 {
                let mut hi = pt;
                let mut lo = pt;
                hi[j] += h;
                lo[j] -= h;
                let (uh, _) = exact_velocity(hi[0], hi[1], hi[2]);
                let (ul, _) = exact_velocity(lo[0], lo[1], lo[2]);
                lap += (uh + ul - u0 * 2.0) / (h * h);
            }
            let mut gp = Vector3::zeros();
            for j in 0..3 {
                let mut hi = pt;
                let mut lo = pt;
                hi[j] += h;
                lo[j] -= h;
                gp[j] = (exact_pressure(hi[0], hi[1], hi[2])
                    - exact_pressure(lo[0], lo[1], lo[2]))
                    / (2.0 * h);
            }
            let fd = -lap / 2.0 - gp;
            let f = body_force(pt[0], pt[1], pt[2]);
            for i in 0..3 {
                assert!(
                    (fd[i] - f[i]).abs() < 1e-5 * f.norm().max(1.0),
                    "component {i}: {} vs {}",
                    fd[i],
                    f[i]
                );
            }
        }
    }
}
