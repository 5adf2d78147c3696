//! Axis-aligned box partitions of a mesh into subdomains.

use crate::mesh::PolyMesh;
use crate::{Error, Result, Scalar};

#[derive(Clone, Debug)]
pub struct Partition {
    pub grid: [usize; 3],
    pub n_subdomains: usize,
    pub cell_subdomain: Vec<usize>,
    pub subdomain_cells: Vec<Vec<usize>>,
    /// Characteristic size per subdomain (bounding-box diagonal).
    pub h_sub: Vec<f64>,
}

/// Assign cells to an N_x×N_y×N_z grid of boxes by centroid.
pub fn partition_structured<S: Scalar>(
    mesh: &PolyMesh<S>,
    nx: usize,
    ny: usize,
    nz: usize,
) -> Result<Partition> {
    if nx == 0 || ny == 0 || nz == 0 {
        return Err(Error::InvalidPartition("box counts must be ≥ 1".into()));
    }
    let mut lo = [f64::MAX; 3];
    let mut hi = [f64::MIN; 3];
    for v in &mesh.vertices {
        for d in 0..3 {
            let c = v[d].to_f64_lossy();
            lo[d] = lo[d].min(c);
            hi[d] = hi[d].max(c);
        }
    }
    let grid = [nx, ny, nz];
    let n_subdomains = nx * ny * nz;
    let mut cell_subdomain = Vec::with_capacity(mesh.cells.len());
    let mut subdomain_cells = vec![Vec::new(); n_subdomains];
    for (c, cell) in mesh.cells.iter().enumerate() {
        let mut idx = [0usize; 3];
        for d in 0..3 {
            let t = (cell.centroid[d].to_f64_lossy() - lo[d]) / (hi[d] - lo[d]);
            idx[d] = ((t * grid[d] as f64).floor() as usize).min(grid[d] - 1);
        }
        let s = idx[0] + nx * (idx[1] + ny * idx[2]);
        cell_subdomain.push(s);
        subdomain_cells[s].push(c);
    }
    if let Some(empty) = subdomain_cells.iter().position(|l| l.is_empty()) {
        return Err(Error::InvalidPartition(format!(
            "subdomain {empty} received no cells"
        )));
    }
    let mut h_sub = Vec::with_capacity(n_subdomains);
    for cells in &subdomain_cells {
        let mut slo = [f64::MAX; 3];
        let mut shi = [f64::MIN; 3];
        for &c in cells {
            for &v in &mesh.cells[c].vertices {
                for d in 0..3 {
                    let x = mesh.vertices[v][d].to_f64_lossy();
                    slo[d] = slo[d].min(x);
                    shi[d] = shi[d].max(x);
                }
            }
        }
        let diag: f64 = (0..3).map(|d| (shi[d] - slo[d]).powi(2)).sum::<f64>().sqrt();
        h_sub.push(diag);
    }
    Ok(Partition {
        grid,
        n_subdomains,
        cell_subdomain,
        subdomain_cells,
        h_sub,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_hex_mesh, generate_octa_mesh};

    #[test]
    fn eight_boxes_of_eight_cells() {
        let mesh = generate_hex_mesh::<f64>(4, [0.0; 3], [1.0; 3]).unwrap();
        let p = partition_structured(&mesh, 2, 2, 2).unwrap();
        assert_eq!(p.n_subdomains, 8);
        for cells in &p.subdomain_cells {
            assert_eq!(cells.len(), 8);
        }
    }

    #[test]
    fn h_over_h_ratio() {
        // n=8 mesh, 2×2×2 partition: 4 cells per subdomain edge
        let mesh = generate_hex_mesh::<f64>(8, [0.0; 3], [1.0; 3]).unwrap();
        let p = partition_structured(&mesh, 2, 2, 2).unwrap();
        let h = mesh.h_max();
        // H/h in box-edge units: (0.5·√3) / (0.125·√3) = 4
        assert!((p.h_sub[0] / h - 4.0).abs() < 1e-12);
    }

    #[test]
    fn octa_cells_all_assigned() {
        let mesh = generate_octa_mesh::<f64>(4).unwrap();
        let p = partition_structured(&mesh, 2, 2, 2).unwrap();
        let total: usize = p.subdomain_cells.iter().map(|c| c.len()).sum();
        assert_eq!(total, mesh.cells.len());
    }

    #[test]
    fn empty_subdomain_is_rejected() {
        let mesh = generate_hex_mesh::<f64>(2, [0.0; 3], [1.0; 3]).unwrap();
        assert!(partition_structured(&mesh, 5, 1, 1).is_err());
    }
}
