//! Polyhedral tessellations: construction, validation and geometry.
//!
//! A [`PolyMesh`] stores full vertex/edge/face/cell incidence with oriented
//! face loops. Faces are required to be planar simple polygons, every cell
//! boundary must close up (its signed face-area vectors sum to zero), and
//! cell volumes computed via the divergence theorem must be positive. The
//! validation tolerances are relative to the local entity size.

mod generate;
mod io;
mod quality;
mod subtess;

pub use generate::{generate_hex_mesh, generate_octa_mesh, truncated_octahedron};
pub use io::{load_mesh, save_mesh};
pub use quality::{check_regularity, CellQuality, MeshQualityReport};
pub use subtess::{subtessellate, Tetrahedron};

use crate::{lit, Error, Result, Scalar};
use nalgebra::{Point3, Vector3};

/// Planarity tolerance, relative to the face diameter.
pub const PLANARITY_TOL: f64 = 1e-10;
/// Cell-closedness tolerance, relative to h_K².
pub const CLOSEDNESS_TOL: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct Face<S: Scalar> {
    /// Oriented vertex loop.
    pub vertices: Vec<usize>,
    /// Edge ids aligned with the loop: edge `i` joins `vertices[i]` and
    /// `vertices[(i+1) % len]`.
    pub edges: Vec<usize>,
    /// Incident cells: `cells[0]` sees the stored normal as outward,
    /// `cells[1]` as inward.
    pub cells: [Option<usize>; 2],
    pub normal: Vector3<S>,
    pub centroid: Point3<S>,
    pub area: S,
    pub diameter: S,
    /// Orthonormal in-plane frame; `tangent[0]` follows the first edge.
    pub tangent: [Vector3<S>; 2],
}

impl<S: Scalar> Face<S> {
    pub fn is_boundary(&self) -> bool {
        self.cells[0].is_none() || self.cells[1].is_none()
    }

    /// In-plane coordinates of a 3D point, scaled by the face diameter.
    pub fn local_coords(&self, p: &Point3<S>) -> (S, S) {
        let d = p - self.centroid;
        (
            d.dot(&self.tangent[0]) / self.diameter,
            d.dot(&self.tangent[1]) / self.diameter,
        )
    }
}

#[derive(Clone, Debug)]
pub struct Cell<S: Scalar> {
    /// Faces with orientation flags; `true` means the stored face normal
    /// points out of this cell.
    pub faces: Vec<(usize, bool)>,
    /// Unique incident vertices, ascending.
    pub vertices: Vec<usize>,
    /// Unique incident edges, ascending.
    pub edges: Vec<usize>,
    pub centroid: Point3<S>,
    pub volume: S,
    pub diameter: S,
}

#[derive(Clone, Debug)]
pub struct PolyMesh<S: Scalar> {
    pub vertices: Vec<Point3<S>>,
    /// Vertex pairs, each sorted ascending; list sorted lexicographically.
    pub edges: Vec<[usize; 2]>,
    pub faces: Vec<Face<S>>,
    pub cells: Vec<Cell<S>>,
}

/// Raw connectivity accepted by [`PolyMesh::build`].
#[derive(Clone, Debug, Default)]
pub struct MeshData<S: Scalar> {
    pub vertices: Vec<Point3<S>>,
    /// Faces as oriented vertex loops.
    pub faces: Vec<Vec<usize>>,
    /// Cells as `(face id, stored-normal-is-outward)` lists.
    pub cells: Vec<Vec<(usize, bool)>>,
}

impl<S: Scalar> PolyMesh<S> {
    pub fn build(data: MeshData<S>) -> Result<Self> {
        let MeshData {
            vertices,
            faces: face_loops,
            cells: cell_lists,
        } = data;

        // derive the edge list from the face loops
        let mut edge_ids = std::collections::BTreeMap::new();
        for loop_ in &face_loops {
            if loop_.len() < 3 {
                return Err(Error::InvalidArgument(
                    "face with fewer than 3 vertices".into(),
                ));
            }
            for i in 0..loop_.len() {
                let a = loop_[i];
                let b = loop_[(i + 1) % loop_.len()];
                if a == b || a >= vertices.len() || b >= vertices.len() {
                    return Err(Error::InvalidArgument(format!(
                        "face references bad vertex pair ({a}, {b})"
                    )));
                }
                edge_ids.entry([a.min(b), a.max(b)]).or_insert(0usize);
            }
        }
        let edges: Vec<[usize; 2]> = edge_ids.keys().cloned().collect();
        for (i, e) in edges.iter().enumerate() {
            *edge_ids.get_mut(e).unwrap() = i;
        }

        let mut faces: Vec<Face<S>> = Vec::with_capacity(face_loops.len());
        for (fid, loop_) in face_loops.iter().enumerate() {
            faces.push(build_face(fid, loop_, &vertices, &edge_ids)?);
        }

        // attach cells to faces
        for (cid, list) in cell_lists.iter().enumerate() {
            for &(fid, outward) in list {
                if fid >= faces.len() {
                    return Err(Error::InvalidArgument(format!(
                        "cell {cid} references missing face {fid}"
                    )));
                }
                let slot = if outward { 0 } else { 1 };
                if faces[fid].cells[slot].is_some() {
                    return Err(Error::InvalidArgument(format!(
                        "face {fid} claimed twice with the same orientation"
                    )));
                }
                faces[fid].cells[slot] = Some(cid);
            }
        }
        for (fid, f) in faces.iter().enumerate() {
            if f.cells[0].is_none() && f.cells[1].is_none() {
                return Err(Error::InvalidArgument(format!("face {fid} has no cell")));
            }
        }

        let mut cells: Vec<Cell<S>> = Vec::with_capacity(cell_lists.len());
        for (cid, list) in cell_lists.iter().enumerate() {
            cells.push(build_cell(cid, list, &vertices, &faces, &edge_ids)?);
        }

        Ok(PolyMesh {
            vertices,
            edges,
            faces,
            cells,
        })
    }

    pub fn total_volume(&self) -> S {
        self.cells.iter().fold(S::zero(), |acc, c| acc + c.volume)
    }

    pub fn edge_length(&self, e: usize) -> S {
        let [a, b] = self.edges[e];
        (self.vertices[a] - self.vertices[b]).norm()
    }

    pub fn h_max(&self) -> S {
        self.cells
            .iter()
            .fold(S::zero(), |acc, c| acc.max(c.diameter))
    }

    /// Outward unit normal of face `fid` as seen from cell `cid`.
    pub fn outward_normal(&self, fid: usize, cid: usize) -> Vector3<S> {
        if self.faces[fid].cells[0] == Some(cid) {
            self.faces[fid].normal
        } else {
            -self.faces[fid].normal
        }
    }

    pub fn boundary_faces(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.faces.len()).filter(|&f| self.faces[f].is_boundary())
    }
}

fn build_face<S: Scalar>(
    fid: usize,
    loop_: &[usize],
    vertices: &[Point3<S>],
    edge_ids: &std::collections::BTreeMap<[usize; 2], usize>,
) -> Result<Face<S>> {
    let pts: Vec<Point3<S>> = loop_.iter().map(|&v| vertices[v]).collect();
    let n_v = pts.len();

    // Newell area vector; exact for planar loops
    let mut area_vec = Vector3::zeros();
    for i in 0..n_v {
        let a = pts[i].coords;
        let b = pts[(i + 1) % n_v].coords;
        area_vec += a.cross(&b);
    }
    area_vec *= lit::<S>(0.5);
    let area = area_vec.norm();
    if area <= S::zero() {
        return Err(Error::BadFace { face: fid });
    }
    let normal = area_vec / area;

    let mut diameter = S::zero();
    for i in 0..n_v {
        for j in (i + 1)..n_v {
            diameter = diameter.max((pts[i] - pts[j]).norm());
        }
    }

    // area centroid from a fan around the vertex mean
    let mut mean = Vector3::zeros();
    for p in &pts {
        mean += p.coords;
    }
    mean /= S::from_usize(n_v).unwrap();
    let mut centroid = Vector3::zeros();
    let mut area_sum = S::zero();
    for i in 0..n_v {
        let a = pts[i].coords - mean;
        let b = pts[(i + 1) % n_v].coords - mean;
        let tri2 = a.cross(&b).dot(&normal); // signed double area
        let c = (pts[i].coords + pts[(i + 1) % n_v].coords + mean) / lit::<S>(3.0);
        centroid += c * tri2;
        area_sum += tri2;
    }
    let centroid = Point3::from(centroid / area_sum);

    // planarity relative to the face diameter
    let mut deviation = S::zero();
    for p in &pts {
        deviation = deviation.max((p - centroid).dot(&normal).abs());
    }
    let tol = lit::<S>(PLANARITY_TOL) * diameter;
    if deviation > tol {
        return Err(Error::NonPlanarFace {
            face: fid,
            deviation: deviation.to_f64_lossy(),
            tolerance: tol.to_f64_lossy(),
        });
    }

    // simplicity: repeated vertices or crossing edges reject the face
    {
        let mut sorted = loop_.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != n_v {
            return Err(Error::BadFace { face: fid });
        }
    }
    let t1 = {
        let d = pts[1] - pts[0];
        let d = d - normal * d.dot(&normal);
        d / d.norm()
    };
    let t2 = normal.cross(&t1);
    let plane: Vec<(S, S)> = pts
        .iter()
        .map(|p| ((p - centroid).dot(&t1), (p - centroid).dot(&t2)))
        .collect();
    if segments_cross(&plane) {
        return Err(Error::BadFace { face: fid });
    }

    let edges = (0..n_v)
        .map(|i| {
            let a = loop_[i];
            let b = loop_[(i + 1) % n_v];
            edge_ids[&[a.min(b), a.max(b)]]
        })
        .collect();

    Ok(Face {
        vertices: loop_.to_vec(),
        edges,
        cells: [None, None],
        normal,
        centroid,
        area,
        diameter,
        tangent: [t1, t2],
    })
}

/// Any pair of non-adjacent polygon edges intersecting marks the loop as
/// self-intersecting.
fn segments_cross<S: Scalar>(poly: &[(S, S)]) -> bool {
    let n = poly.len();
    let seg = |i: usize| (poly[i], poly[(i + 1) % n]);
    for i in 0..n {
        for j in (i + 1)..n {
            // skip adjacent segments (shared endpoint)
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (a, b) = seg(i);
            let (c, d) = seg(j);
            if proper_intersect(a, b, c, d) {
                return true;
            }
        }
    }
    false
}

fn proper_intersect<S: Scalar>(a: (S, S), b: (S, S), c: (S, S), d: (S, S)) -> bool {
    let orient =
        |p: (S, S), q: (S, S), r: (S, S)| (q.0 - p.0) * (r.1 - p.1) - (q.1 - p.1) * (r.0 - p.0);
    let d1 = orient(a, b, c);
    let d2 = orient(a, b, d);
    let d3 = orient(c, d, a);
    let d4 = orient(c, d, b);
    d1 * d2 < S::zero() && d3 * d4 < S::zero()
}

fn build_cell<S: Scalar>(
    cid: usize,
    list: &[(usize, bool)],
    vertices: &[Point3<S>],
    faces: &[Face<S>],
    edge_ids: &std::collections::BTreeMap<[usize; 2], usize>,
) -> Result<Cell<S>> {
    if list.is_empty() {
        return Err(Error::InvalidArgument(format!("cell {cid} has no faces")));
    }
    let mut vset = std::collections::BTreeSet::new();
    let mut eset = std::collections::BTreeSet::new();
    for &(fid, _) in list {
        for &v in &faces[fid].vertices {
            vset.insert(v);
        }
        let loop_ = &faces[fid].vertices;
        for i in 0..loop_.len() {
            let a = loop_[i];
            let b = loop_[(i + 1) % loop_.len()];
            eset.insert(edge_ids[&[a.min(b), a.max(b)]]);
        }
    }
    let vlist: Vec<usize> = vset.into_iter().collect();

    let mut diameter = S::zero();
    for i in 0..vlist.len() {
        for j in (i + 1)..vlist.len() {
            diameter = diameter.max((vertices[vlist[i]] - vertices[vlist[j]]).norm());
        }
    }

    // closedness: signed area vectors must cancel
    let mut closure = Vector3::zeros();
    for &(fid, outward) in list {
        let sign = if outward { S::one() } else { -S::one() };
        closure += faces[fid].normal * (faces[fid].area * sign);
    }
    let defect = closure.norm();
    if defect > lit::<S>(CLOSEDNESS_TOL) * diameter * diameter {
        return Err(Error::OpenCell {
            cell: cid,
            defect: defect.to_f64_lossy(),
        });
    }

    // divergence-theorem volume and volume centroid from the tet fan
    let mut origin = Vector3::zeros();
    for &v in &vlist {
        origin += vertices[v].coords;
    }
    origin /= S::from_usize(vlist.len()).unwrap();
    let mut volume = S::zero();
    let mut centroid = Vector3::zeros();
    for &(fid, outward) in list {
        let f = &faces[fid];
        let sign = if outward { S::one() } else { -S::one() };
        let cf = f.centroid.coords - origin;
        let n_v = f.vertices.len();
        for i in 0..n_v {
            let a = vertices[f.vertices[i]].coords - origin;
            let b = vertices[f.vertices[(i + 1) % n_v]].coords - origin;
            // tet (origin, cf, a, b); sign folds in the face orientation
            let v6 = cf.dot(&a.cross(&b)) * sign;
            let v = v6 / lit::<S>(6.0);
            volume += v;
            centroid += (cf + a + b) * (v / lit::<S>(4.0));
        }
    }
    if volume <= S::zero() {
        return Err(Error::BadVolume {
            cell: cid,
            volume: volume.to_f64_lossy(),
        });
    }
    let centroid = Point3::from(origin + centroid / volume);

    Ok(Cell {
        faces: list.to_vec(),
        vertices: vlist,
        edges: eset.into_iter().collect(),
        centroid,
        volume,
        diameter,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cube_counts_and_geometry() {
        let mesh: PolyMesh<f64> = generate_hex_mesh(1, [0.0; 3], [1.0; 3]).unwrap();
        assert_eq!(mesh.cells.len(), 1);
        assert_eq!(mesh.faces.len(), 6);
        assert_eq!(mesh.edges.len(), 12);
        assert_eq!(mesh.vertices.len(), 8);
        let c = &mesh.cells[0];
        assert!((c.volume - 1.0).abs() < 1e-14);
        assert!((c.diameter - 3.0f64.sqrt()).abs() < 1e-14);
        assert!((c.centroid - Point3::new(0.5, 0.5, 0.5)).norm() < 1e-14);
    }

    #[test]
    fn two_cubed_mesh_counts_and_volume() {
        // 2×2×2 grid: faces = 3·n²·(n+1) = 36, hand count
        let mesh: PolyMesh<f64> = generate_hex_mesh(2, [0.0; 3], [1.0; 3]).unwrap();
        assert_eq!(mesh.cells.len(), 8);
        assert_eq!(mesh.faces.len(), 36);
        assert!((mesh.total_volume() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn paper_scale_hex_count() {
        let mesh: PolyMesh<f64> = generate_hex_mesh(24, [0.0; 3], [1.0; 3]).unwrap();
        assert_eq!(mesh.cells.len(), 13824);
        assert!((mesh.total_volume() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn generic_scalar_instantiation() {
        let mesh: PolyMesh<f32> = generate_hex_mesh(2, [0.0; 3], [1.0; 3]).unwrap();
        assert_eq!(mesh.cells.len(), 8);
        assert!((mesh.total_volume() - 1.0).abs() < 1e-5);
    }

    #[test]
    fn closedness_invariant_on_all_cells() {
        let mesh: PolyMesh<f64> = generate_hex_mesh(3, [0.0; 3], [2.0; 3]).unwrap();
        for cell in &mesh.cells {
            let mut s = Vector3::<f64>::zeros();
            for &(f, outward) in &cell.faces {
                let sign = if outward { 1.0 } else { -1.0 };
                s += mesh.faces[f].normal * mesh.faces[f].area * sign;
            }
            assert!(s.norm() <= 1e-12 * cell.diameter * cell.diameter);
        }
    }

    #[test]
    fn rejects_self_intersecting_face() {
        // bow-tie quad in the z=0 plane
        let data = MeshData::<f64> {
            vertices: vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
                Point3::new(1.0, 1.0, 0.0),
                Point3::new(0.5, 0.5, 1.0),
            ],
            faces: vec![vec![0, 1, 2, 3], vec![0, 1, 4], vec![1, 3, 4]],
            cells: vec![vec![(0, true), (1, false), (2, false)]],
        };
        assert!(matches!(
            PolyMesh::build(data),
            Err(Error::BadFace { face: 0 })
        ));
    }
}
