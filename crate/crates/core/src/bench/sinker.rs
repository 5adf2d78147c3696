//! Multi-sinker benchmark: randomly placed smooth high-viscosity inclusions
//! in the unit cube.
//!
//! Each sinker contributes a flat-core modified Gaussian bump
//! χ_i(x) = exp(−max(0, ‖x−c_i‖ − r)² / (2ω²)), so χ_i ≡ 1 inside the core
//! radius r. The bumps accumulate as χ_n = 1 − Π_i (1 − χ_i) and the
//! viscosity is ν(x) = ν_min + (ν_max − ν_min)·χ_n(x), evaluated at cell
//! centroids. The body force is a downward pull weighted by the indicator:
//! f = (0, 0, −χ_n).

use crate::assembly::StokesProblem;
use crate::mesh::PolyMesh;
use crate::{lit, Scalar};
use nalgebra::{Point3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

pub const SINKER_RADIUS: f64 = 0.1;
pub const SINKER_WIDTH: f64 = 0.05;

#[derive(Clone, Debug)]
pub struct SinkerField {
    pub centers: Vec<Point3<f64>>,
    pub radius: f64,
    pub omega: f64,
    pub nu_min: f64,
    pub nu_max: f64,
}

impl SinkerField {
    pub fn new(n: usize, dynamic_ratio: f64, seed: u64) -> Self {
        assert!(n >= 1 && dynamic_ratio >= 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let centers = (0..n)
            .map(|_| Point3::new(rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()))
            .collect();
        SinkerField {
            centers,
            radius: SINKER_RADIUS,
            omega: SINKER_WIDTH,
            nu_min: 1.0,
            nu_max: dynamic_ratio,
        }
    }

    /// Smooth indicator χ_n ∈ [0, 1].
    pub fn indicator(&self, p: &Point3<f64>) -> f64 {
        let mut prod = 1.0;
        for c in &self.centers {
            let d = ((p - c).norm() - self.radius).max(0.0);
            let chi = (-d * d / (2.0 * self.omega * self.omega)).exp();
            prod *= 1.0 - chi;
        }
        1.0 - prod
    }

    pub fn viscosity(&self, p: &Point3<f64>) -> f64 {
        self.nu_min + (self.nu_max - self.nu_min) * self.indicator(p)
    }

    pub fn cell_viscosities<S: Scalar>(&self, mesh: &PolyMesh<S>) -> Vec<S> {
        mesh.cells
            .iter()
            .map(|c| {
                let p = Point3::new(
                    c.centroid.x.to_f64_lossy(),
                    c.centroid.y.to_f64_lossy(),
                    c.centroid.z.to_f64_lossy(),
                );
                lit::<S>(self.viscosity(&p))
            })
            .collect()
    }
}

/// Homogeneous-Dirichlet Stokes problem with the sinker viscosity field.
pub fn multi_sinker_problem<S: Scalar>(
    mesh: &PolyMesh<S>,
    n: usize,
    dynamic_ratio: f64,
    seed: u64,
) -> (StokesProblem<S>, SinkerField) {
    let field = SinkerField::new(n, dynamic_ratio, seed);
    let force_field = field.clone();
    let problem = StokesProblem {
        viscosity: field.cell_viscosities(mesh),
        body_force: Arc::new(move |p: &Point3<S>| {
            let q = Point3::new(
                p.x.to_f64_lossy(),
                p.y.to_f64_lossy(),
                p.z.to_f64_lossy(),
            );
            Vector3::new(S::zero(), S::zero(), lit::<S>(-force_field.indicator(&q)))
        }),
        dirichlet_faces: mesh.boundary_faces().collect(),
        dirichlet_data: Arc::new(|_: &Point3<S>| {
            (Vector3::zeros(), nalgebra::Matrix3::zeros())
        }),
        neumann_faces: vec![],
        traction: Arc::new(|_: &Point3<S>| Vector3::zeros()),
    };
    (problem, field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_hex_mesh;

    #[test]
    fn viscosity_stays_in_range_and_hits_extremes() {
        let mesh = generate_hex_mesh::<f64>(8, [0.0; 3], [1.0; 3]).unwrap();
        let field = SinkerField::new(1, 1e6, 42);
        let nus = field.cell_viscosities(&mesh);
        for &nu in &nus {
            assert!((1.0..=1e6).contains(&nu));
        }
        // a centroid inside the sinker core sees ν_max to within 1%
        let closest = mesh
            .cells
            .iter()
            .map(|c| (c.centroid - field.centers[0]).norm())
            .fold(f64::MAX, f64::min);
        if closest <= field.radius {
            let max = nus.iter().cloned().fold(0.0f64, f64::max);
            assert!(max >= 0.99 * 1e6, "core max {max}");
        }
        // the measured dynamic ratio stays within the configured decade
        let max = nus.iter().cloned().fold(0.0f64, f64::max);
        let min = nus.iter().cloned().fold(f64::MAX, f64::min);
        assert!(max / min <= 1e6);
        assert!(max / min >= 1e5, "field too flat: {}", max / min);
    }

    #[test]
    fn dr_one_is_constant_viscosity() {
        let mesh = generate_hex_mesh::<f64>(4, [0.0; 3], [1.0; 3]).unwrap();
        let (problem, _) = multi_sinker_problem(&mesh, 5, 1.0, 7);
        assert!(problem.viscosity.iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn seeded_fields_are_reproducible() {
        let a = SinkerField::new(10, 1e4, 123);
        let b = SinkerField::new(10, 1e4, 123);
        assert_eq!(a.centers, b.centers);
        let c = SinkerField::new(10, 1e4, 124);
        assert_ne!(a.centers, c.centers);
    }
}
