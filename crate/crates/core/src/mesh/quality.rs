//! Shape-regularity report.
//!
//! Star-shapedness of cells and faces is checked through a convex-case
//! proxy: the inscribed-ball (resp. inscribed-disk) radius measured from
//! the centroid. For non-convex cells the proxy is a lower bound of
//! nothing in particular, so such cells are flagged instead of rejected.

use super::PolyMesh;
use crate::{lit, Scalar};

#[derive(Clone, Debug)]
pub struct CellQuality<S> {
    pub cell: usize,
    /// Inscribed-ball proxy radius over the cell diameter.
    pub rho_ball: S,
    /// Worst face inscribed-disk proxy radius over the cell diameter.
    pub rho_disk: S,
    /// Shortest edge length over the cell diameter.
    pub edge_ratio: S,
    /// Whether every vertex lies on the inner side of every face plane.
    pub convex: bool,
}

#[derive(Clone, Debug)]
pub struct MeshQualityReport<S> {
    pub cells: Vec<CellQuality<S>>,
    pub min_rho_ball: S,
    pub min_rho_disk: S,
    pub min_edge_ratio: S,
    pub gamma: S,
    /// All three minima reach `gamma`.
    pub pass: bool,
    pub n_nonconvex: usize,
}

pub fn check_regularity<S: Scalar>(mesh: &PolyMesh<S>, gamma: S) -> MeshQualityReport<S> {
    let mut cells = Vec::with_capacity(mesh.cells.len());
    let tol = lit::<S>(1e-12);
    for (cid, cell) in mesh.cells.iter().enumerate() {
        let h = cell.diameter;
        let mut rho_ball = S::one();
        let mut rho_disk = S::one();
        let mut convex = true;
        for &(fid, outward) in &cell.faces {
            let f = &mesh.faces[fid];
            let n = if outward { f.normal } else { -f.normal };
            let dist = (f.centroid - cell.centroid).dot(&n);
            rho_ball = rho_ball.min((dist / h).max(S::zero()));
            for &v in &cell.vertices {
                if (mesh.vertices[v] - f.centroid).dot(&n) > tol * h {
                    convex = false;
                }
            }
            // inscribed-disk proxy on the face, from the face centroid
            let mut r_disk = f.diameter;
            let m = f.vertices.len();
            for i in 0..m {
                let a = mesh.vertices[f.vertices[i]];
                let b = mesh.vertices[f.vertices[(i + 1) % m]];
                let ab = b - a;
                let d = (f.centroid - a).cross(&ab).norm() / ab.norm();
                r_disk = r_disk.min(d);
            }
            rho_disk = rho_disk.min(r_disk / h);
        }
        let mut edge_ratio = S::one();
        for &e in &cell.edges {
            edge_ratio = edge_ratio.min(mesh.edge_length(e) / h);
        }
        cells.push(CellQuality {
            cell: cid,
            rho_ball,
            rho_disk,
            edge_ratio,
            convex,
        });
    }
    let fold_min = |f: fn(&CellQuality<S>) -> S| {
        cells.iter().map(f).fold(S::one(), |a, b| a.min(b))
    };
    let min_rho_ball = fold_min(|c| c.rho_ball);
    let min_rho_disk = fold_min(|c| c.rho_disk);
    let min_edge_ratio = fold_min(|c| c.edge_ratio);
    let n_nonconvex = cells.iter().filter(|c| !c.convex).count();
    MeshQualityReport {
        pass: min_rho_ball >= gamma && min_rho_disk >= gamma && min_edge_ratio >= gamma,
        cells,
        min_rho_ball,
        min_rho_disk,
        min_edge_ratio,
        gamma,
        n_nonconvex,
    }
}
