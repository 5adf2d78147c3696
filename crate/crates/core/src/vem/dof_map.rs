//! Global enumeration of velocity and pressure degrees of freedom,
//! entity-type-major with arithmetic offsets.

use crate::mesh::PolyMesh;
use crate::poly::{dim_p2, dim_p3, xwedge_dim};
use crate::Scalar;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DofEntity {
    Vertex(usize),
    Edge(usize),
    Face(usize),
    Cell(usize),
}

#[derive(Clone, Debug)]
pub struct DofMap {
    pub k: usize,
    pub n_vertices: usize,
    pub n_edges: usize,
    pub n_faces: usize,
    pub n_cells: usize,
    /// Interior Gauss–Lobatto points per edge.
    pub pts_per_edge: usize,
    /// Scalar moments per face and frame direction.
    pub moms_per_face: usize,
    pub xw_per_cell: usize,
    pub d5_per_cell: usize,
    pub n_velocity: usize,
    pub n_pressure: usize,
    /// Pressure monomials per cell.
    pub press_per_cell: usize,
}

impl DofMap {
    pub fn edge_base(&self) -> usize {
        3 * self.n_vertices
    }

    pub fn face_base(&self) -> usize {
        self.edge_base() + 3 * self.pts_per_edge * self.n_edges
    }

    pub fn cell_base(&self) -> usize {
        self.face_base() + 3 * self.moms_per_face * self.n_faces
    }

    pub fn vertex_dof(&self, v: usize, d: usize) -> usize {
        3 * v + d
    }

    pub fn edge_dof(&self, e: usize, pt: usize, d: usize) -> usize {
        self.edge_base() + 3 * self.pts_per_edge * e + 3 * pt + d
    }

    /// `w`: 0 = stored normal, 1/2 = face tangent frame.
    pub fn face_dof(&self, f: usize, w: usize, alpha: usize) -> usize {
        self.face_base() + 3 * self.moms_per_face * f + w * self.moms_per_face + alpha
    }

    pub fn cell_xw_dof(&self, c: usize, r: usize) -> usize {
        self.cell_base() + (self.xw_per_cell + self.d5_per_cell) * c + r
    }

    pub fn cell_d5_dof(&self, c: usize, j: usize) -> usize {
        self.cell_xw_dof(c, self.xw_per_cell) + j
    }

    pub fn pressure_dof(&self, c: usize, alpha: usize) -> usize {
        self.press_per_cell * c + alpha
    }

    /// The mesh entity a velocity dof is attached to.
    pub fn dof_entity(&self, dof: usize) -> DofEntity {
        if dof < self.edge_base() {
            DofEntity::Vertex(dof / 3)
        } else if dof < self.face_base() {
            DofEntity::Edge((dof - self.edge_base()) / (3 * self.pts_per_edge))
        } else if dof < self.cell_base() {
            DofEntity::Face((dof - self.face_base()) / (3 * self.moms_per_face))
        } else {
            DofEntity::Cell((dof - self.cell_base()) / (self.xw_per_cell + self.d5_per_cell))
        }
    }

    /// Cell-local velocity dof ids in element-operator layout order.
    pub fn cell_dofs<S: Scalar>(&self, mesh: &PolyMesh<S>, c: usize) -> Vec<usize> {
        let cell = &mesh.cells[c];
        let mut out = Vec::new();
        for &v in &cell.vertices {
            for d in 0..3 {
                out.push(self.vertex_dof(v, d));
            }
        }
        for &e in &cell.edges {
            for pt in 0..self.pts_per_edge {
                for d in 0..3 {
                    out.push(self.edge_dof(e, pt, d));
                }
            }
        }
        for &(f, _) in &cell.faces {
            for w in 0..3 {
                for alpha in 0..self.moms_per_face {
                    out.push(self.face_dof(f, w, alpha));
                }
            }
        }
        for r in 0..self.xw_per_cell {
            out.push(self.cell_xw_dof(c, r));
        }
        for j in 0..self.d5_per_cell {
            out.push(self.cell_d5_dof(c, j));
        }
        out
    }

    pub fn cell_pressure_dofs(&self, c: usize) -> Vec<usize> {
        (0..self.press_per_cell)
            .map(|alpha| self.pressure_dof(c, alpha))
            .collect()
    }
}

pub fn build_dof_map<S: Scalar>(mesh: &PolyMesh<S>, k: usize) -> DofMap {
    assert!((2..=4).contains(&k));
    let ki = k as i64;
    let pts_per_edge = k - 1;
    let moms_per_face = dim_p2(ki - 2);
    let xw_per_cell = xwedge_dim(ki - 3);
    let d5_per_cell = dim_p3(ki - 1) - 1;
    let press_per_cell = dim_p3(ki - 1);
    let n_velocity = 3 * mesh.vertices.len()
        + 3 * pts_per_edge * mesh.edges.len()
        + 3 * moms_per_face * mesh.faces.len()
        + (xw_per_cell + d5_per_cell) * mesh.cells.len();
    DofMap {
        k,
        n_vertices: mesh.vertices.len(),
        n_edges: mesh.edges.len(),
        n_faces: mesh.faces.len(),
        n_cells: mesh.cells.len(),
        pts_per_edge,
        moms_per_face,
        xw_per_cell,
        d5_per_cell,
        n_velocity,
        n_pressure: press_per_cell * mesh.cells.len(),
        press_per_cell,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_hex_mesh;

    #[test]
    fn single_cube_k2_counts() {
        let mesh = generate_hex_mesh::<f64>(1, [0.0; 3], [1.0; 3]).unwrap();
        let dm = build_dof_map(&mesh, 2);
        // 3·8 vertices + 3·12 edges + 3·6 faces + 0 + 3 divergence moments
        assert_eq!(dm.n_velocity, 24 + 36 + 18 + 3);
        assert_eq!(dm.n_pressure, 4);
    }

    #[test]
    fn paper_dof_count_at_n16_k2() {
        let mesh = generate_hex_mesh::<f64>(16, [0.0; 3], [1.0; 3]).unwrap();
        let dm = build_dof_map(&mesh, 2);
        assert_eq!(dm.n_velocity + dm.n_pressure, 124_195);
    }

    #[test]
    fn totals_equal_per_entity_sums() {
        let mesh = generate_hex_mesh::<f64>(3, [0.0; 3], [1.0; 3]).unwrap();
        for k in 2..=4 {
            let dm = build_dof_map(&mesh, k);
            let per_entity = 3 * mesh.vertices.len()
                + 3 * dm.pts_per_edge * mesh.edges.len()
                + 3 * dm.moms_per_face * mesh.faces.len()
                + (dm.xw_per_cell + dm.d5_per_cell) * mesh.cells.len();
            assert_eq!(dm.n_velocity, per_entity);
            // every dof classifies back to a unique entity range
            assert!(matches!(dm.dof_entity(0), DofEntity::Vertex(0)));
            assert!(matches!(
                dm.dof_entity(dm.n_velocity - 1),
                DofEntity::Cell(c) if c == mesh.cells.len() - 1
            ));
        }
    }
}
