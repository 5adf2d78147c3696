//! Stokes problem data: per-cell viscosity, body force and the boundary
//! partition into Dirichlet and Neumann faces.

use crate::mesh::PolyMesh;
use crate::{Error, Result, Scalar};
use nalgebra::{Matrix3, Point3, Vector3};
use std::sync::Arc;

pub type VecFn<S> = Arc<dyn Fn(&Point3<S>) -> Vector3<S> + Send + Sync>;
/// Field with Jacobian (entry (i, j) = ∂u_i/∂x_j), used wherever dofs of
/// the data must be taken.
pub type FieldFn<S> = Arc<dyn Fn(&Point3<S>) -> (Vector3<S>, Matrix3<S>) + Send + Sync>;

#[derive(Clone)]
pub struct StokesProblem<S: Scalar> {
    /// Piecewise-constant viscosity, one value per cell (Pa·s).
    pub viscosity: Vec<S>,
    pub body_force: VecFn<S>,
    pub dirichlet_faces: Vec<usize>,
    pub dirichlet_data: FieldFn<S>,
    pub neumann_faces: Vec<usize>,
    /// Traction (ν ε(u) + p I)·n on the Neumann part.
    pub traction: VecFn<S>,
}

impl<S: Scalar> StokesProblem<S> {
    /// Homogeneous Dirichlet problem with constant viscosity.
    pub fn dirichlet_homogeneous(mesh: &PolyMesh<S>, viscosity: S, body_force: VecFn<S>) -> Self {
        StokesProblem {
            viscosity: vec![viscosity; mesh.cells.len()],
            body_force,
            dirichlet_faces: mesh.boundary_faces().collect(),
            dirichlet_data: Arc::new(|_: &Point3<S>| (Vector3::zeros(), Matrix3::zeros())),
            neumann_faces: Vec::new(),
            traction: Arc::new(|_: &Point3<S>| Vector3::zeros()),
        }
    }

    pub fn validate(&self, mesh: &PolyMesh<S>) -> Result<()> {
        if self.viscosity.len() != mesh.cells.len() {
            return Err(Error::InvalidArgument(
                "viscosity must hold one value per cell".into(),
            ));
        }
        if self.viscosity.iter().any(|&v| v <= S::zero()) {
            return Err(Error::InvalidArgument("viscosity must be positive".into()));
        }
        let mut seen = vec![0u8; mesh.faces.len()];
        for &f in self.dirichlet_faces.iter().chain(&self.neumann_faces) {
            if f >= mesh.faces.len() || !mesh.faces[f].is_boundary() {
                return Err(Error::InvalidArgument(format!(
                    "face {f} is not a boundary face"
                )));
            }
            seen[f] += 1;
        }
        for f in mesh.boundary_faces() {
            if seen[f] != 1 {
                return Err(Error::InvalidArgument(format!(
                    "boundary face {f} must appear in exactly one of the Dirichlet/Neumann lists"
                )));
            }
        }
        Ok(())
    }

    pub fn is_pure_dirichlet(&self) -> bool {
        self.neumann_faces.is_empty()
    }
}
