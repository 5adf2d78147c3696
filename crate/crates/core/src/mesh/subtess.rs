//! Tetrahedral subtessellation of star-shaped cells: a fan over each face
//! triangle (face centroid × boundary edge) with the cell centroid as apex.

use super::PolyMesh;
use crate::{lit, Error, Result, Scalar};
use nalgebra::Point3;

#[derive(Clone, Debug)]
pub struct Tetrahedron<S: Scalar> {
    pub points: [Point3<S>; 4],
    pub volume: S,
}

pub fn subtessellate<S: Scalar>(mesh: &PolyMesh<S>, cell_id: usize) -> Result<Vec<Tetrahedron<S>>> {
    let cell = &mesh.cells[cell_id];
    let apex = cell.centroid;
    let mut tets = Vec::new();
    for &(fid, outward) in &cell.faces {
        let f = &mesh.faces[fid];
        let m = f.vertices.len();
        for i in 0..m {
            // traverse so the triangle normal points out of the cell
            let (a, b) = if outward {
                (f.vertices[i], f.vertices[(i + 1) % m])
            } else {
                (f.vertices[(i + 1) % m], f.vertices[i])
            };
            let pa = mesh.vertices[a];
            let pb = mesh.vertices[b];
            let volume = (f.centroid - apex)
                .dot(&(pa - apex).cross(&(pb - apex)))
                / lit::<S>(6.0);
            if volume <= S::zero() {
                return Err(Error::Geometry {
                    cell: cell_id,
                    msg: format!("inverted tetrahedron under face {fid}"),
                });
            }
            tets.push(Tetrahedron {
                points: [apex, f.centroid, pa, pb],
                volume,
            });
        }
    }
    Ok(tets)
}

#[cfg(test)]
mod tests {
    use super::super::{generate_hex_mesh, generate_octa_mesh, load_mesh, truncated_octahedron};
    use super::*;

    #[test]
    fn cube_splits_into_24_tets() {
        let mesh = generate_hex_mesh::<f64>(1, [0.0; 3], [1.0; 3]).unwrap();
        let tets = subtessellate(&mesh, 0).unwrap();
        assert_eq!(tets.len(), 24);
        let total: f64 = tets.iter().map(|t| t.volume).sum();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn tetrahedral_cell_partition() {
        let text = "polymesh\n4 4 1\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n\
                    3 0 2 1\n3 0 1 3\n3 0 3 2\n3 1 2 3\n4 1 2 3 4\n";
        let dir = std::env::temp_dir().join("polystokes_subtess");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("tet.mesh");
        std::fs::write(&path, text).unwrap();
        let mesh = load_mesh::<f64>(&path).unwrap();
        let tets = subtessellate(&mesh, 0).unwrap();
        let total: f64 = tets.iter().map(|t| t.volume).sum();
        assert!((total - mesh.cells[0].volume).abs() < 1e-12 * mesh.cells[0].volume);
    }

    #[test]
    fn truncated_octahedron_volumes_match_divergence_theorem() {
        let mesh = truncated_octahedron::<f64>().unwrap();
        let tets = subtessellate(&mesh, 0).unwrap();
        let total: f64 = tets.iter().map(|t| t.volume).sum();
        let dv = mesh.cells[0].volume;
        assert!((total - dv).abs() < 1e-12 * dv);
    }

    #[test]
    fn random_cells_partition_to_divergence_volume() {
        let mesh = generate_octa_mesh::<f64>(3).unwrap();
        // deterministic stride through the cells stands in for sampling
        for cid in (0..mesh.cells.len()).step_by(3) {
            let tets = subtessellate(&mesh, cid).unwrap();
            let total: f64 = tets.iter().map(|t| t.volume).sum();
            let dv = mesh.cells[cid].volume;
            assert!(
                (total - dv).abs() < 1e-12 * dv,
                "cell {cid}: {total} vs {dv}"
            );
        }
    }
}
