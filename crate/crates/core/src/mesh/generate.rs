//! Built-in mesh generators: structured hexahedral grids and a
//! body-centered-cubic tessellation by truncated octahedra clipped to the
//! unit cube.

use super::{MeshData, PolyMesh};
use crate::{lit, Error, Result, Scalar};
use nalgebra::{Point3, Vector3};
use std::collections::HashMap;

/// `n³` congruent hexahedra tiling the axis-aligned box `[lo, hi]`.
pub fn generate_hex_mesh<S: Scalar>(n: usize, lo: [f64; 3], hi: [f64; 3]) -> Result<PolyMesh<S>> {
    if n == 0 {
        return Err(Error::InvalidArgument("hex mesh needs n ≥ 1".into()));
    }
    let np = n + 1;
    let coord = |axis: usize, i: usize| -> S {
        let t = i as f64 / n as f64;
        lit::<S>(lo[axis] + t * (hi[axis] - lo[axis]))
    };
    let vid = |i: usize, j: usize, k: usize| i + np * (j + np * k);
    let mut vertices = Vec::with_capacity(np * np * np);
    for k in 0..np {
        for j in 0..np {
            for i in 0..np {
                vertices.push(Point3::new(coord(0, i), coord(1, j), coord(2, k)));
            }
        }
    }

    let mut faces = Vec::new();
    let mut fx = HashMap::new();
    let mut fy = HashMap::new();
    let mut fz = HashMap::new();
    // x-normal faces
    for i in 0..np {
        for j in 0..n {
            for k in 0..n {
                fx.insert((i, j, k), faces.len());
                faces.push(vec![
                    vid(i, j, k),
                    vid(i, j + 1, k),
                    vid(i, j + 1, k + 1),
                    vid(i, j, k + 1),
                ]);
            }
        }
    }
    // y-normal faces
    for j in 0..np {
        for i in 0..n {
            for k in 0..n {
                fy.insert((i, j, k), faces.len());
                faces.push(vec![
                    vid(i, j, k),
                    vid(i, j, k + 1),
                    vid(i + 1, j, k + 1),
                    vid(i + 1, j, k),
                ]);
            }
        }
    }
    // z-normal faces
    for k in 0..np {
        for i in 0..n {
            for j in 0..n {
                fz.insert((i, j, k), faces.len());
                faces.push(vec![
                    vid(i, j, k),
                    vid(i + 1, j, k),
                    vid(i + 1, j + 1, k),
                    vid(i, j + 1, k),
                ]);
            }
        }
    }

    let mut cells = Vec::with_capacity(n * n * n);
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                cells.push(vec![
                    (fx[&(i, j, k)], false),
                    (fx[&(i + 1, j, k)], true),
                    (fy[&(i, j, k)], false),
                    (fy[&(i, j + 1, k)], true),
                    (fz[&(i, j, k)], false),
                    (fz[&(i, j, k + 1)], true),
                ]);
            }
        }
    }

    PolyMesh::build(MeshData {
        vertices,
        faces,
        cells,
    })
}

/// Body-centered-cubic Voronoi tessellation of the unit cube with lattice
/// constant `1/n`: interior cells are truncated octahedra, boundary cells
/// are the same cells clipped by the cube walls.
pub fn generate_octa_mesh<S: Scalar>(n: usize) -> Result<PolyMesh<S>> {
    if n == 0 {
        return Err(Error::InvalidArgument("octa mesh needs n ≥ 1".into()));
    }
    let a = 1.0 / n as f64;
    let corner = |i: i64, j: i64, k: i64| Vector3::new(i as f64 * a, j as f64 * a, k as f64 * a);
    let center = |i: i64, j: i64, k: i64| {
        Vector3::new(
            (i as f64 + 0.5) * a,
            (j as f64 + 0.5) * a,
            (k as f64 + 0.5) * a,
        )
    };
    let ni = n as i64;
    let in_corner = |i: i64, j: i64, k: i64| (0..=ni).contains(&i) && (0..=ni).contains(&j) && (0..=ni).contains(&k);
    let in_center = |i: i64, j: i64, k: i64| (0..ni).contains(&i) && (0..ni).contains(&j) && (0..ni).contains(&k);

    let mut sites: Vec<Vector3<f64>> = Vec::new();
    let mut neighbor_lists: Vec<Vec<Vector3<f64>>> = Vec::new();
    let axis_offsets: [(i64, i64, i64); 6] = [
        (1, 0, 0),
        (-1, 0, 0),
        (0, 1, 0),
        (0, -1, 0),
        (0, 0, 1),
        (0, 0, -1),
    ];
    for k in 0..=ni {
        for j in 0..=ni {
            for i in 0..=ni {
                sites.push(corner(i, j, k));
                let mut nb = Vec::new();
                for &(di, dj, dk) in &axis_offsets {
                    if in_corner(i + di, j + dj, k + dk) {
                        nb.push(corner(i + di, j + dj, k + dk));
                    }
                }
                for di in -1..=0 {
                    for dj in -1..=0 {
                        for dk in -1..=0 {
                            if in_center(i + di, j + dj, k + dk) {
                                nb.push(center(i + di, j + dj, k + dk));
                            }
                        }
                    }
                }
                neighbor_lists.push(nb);
            }
        }
    }
    for k in 0..ni {
        for j in 0..ni {
            for i in 0..ni {
                sites.push(center(i, j, k));
                let mut nb = Vec::new();
                for &(di, dj, dk) in &axis_offsets {
                    if in_center(i + di, j + dj, k + dk) {
                        nb.push(center(i + di, j + dj, k + dk));
                    }
                }
                for di in 0..=1 {
                    for dj in 0..=1 {
                        for dk in 0..=1 {
                            nb.push(corner(i + di, j + dj, k + dk));
                        }
                    }
                }
                neighbor_lists.push(nb);
            }
        }
    }

    let eps = 1e-9 * a;
    let mut assembler = CellAssembler::new(1e-7 * a);
    for (site, nbs) in sites.iter().zip(&neighbor_lists) {
        let mut cell = ConvexCell::cube([0.0; 3], [1.0; 3]);
        for q in nbs {
            let d = q - site;
            let len = d.norm();
            let normal = d / len;
            let offset = normal.dot(&(site + q)) * 0.5;
            if !cell.clip(&normal, offset, eps) {
                break;
            }
        }
        if !cell.faces.is_empty() {
            assembler.add_cell(&cell);
        }
    }
    let mesh = assembler.build::<S>()?;
    let vol = mesh.total_volume().to_f64_lossy();
    if (vol - 1.0).abs() > 1e-10 {
        return Err(Error::Geometry {
            cell: usize::MAX,
            msg: format!("octa tessellation volume {vol} differs from 1"),
        });
    }
    Ok(mesh)
}

/// A single truncated octahedron (the interior BCC Voronoi cell), usable as
/// a one-cell mesh for patch tests.
pub fn truncated_octahedron<S: Scalar>() -> Result<PolyMesh<S>> {
    let site = Vector3::new(0.0, 0.0, 0.0);
    let mut nbs: Vec<Vector3<f64>> = Vec::new();
    for &(i, j, k) in &[
        (1.0, 0.0, 0.0),
        (-1.0, 0.0, 0.0),
        (0.0, 1.0, 0.0),
        (0.0, -1.0, 0.0),
        (0.0, 0.0, 1.0),
        (0.0, 0.0, -1.0),
    ] {
        nbs.push(Vector3::new(i, j, k));
    }
    for i in [-0.5, 0.5] {
        for j in [-0.5, 0.5] {
            for k in [-0.5, 0.5] {
                nbs.push(Vector3::new(i, j, k));
            }
        }
    }
    let mut cell = ConvexCell::cube([-1.0; 3], [1.0; 3]);
    for q in &nbs {
        let d = q - site;
        let normal = d / d.norm();
        let offset = normal.dot(&(site + q)) * 0.5;
        cell.clip(&normal, offset, 1e-12);
    }
    let mut assembler = CellAssembler::new(1e-9);
    assembler.add_cell(&cell);
    assembler.build::<S>()
}

/// Convex polyhedron under successive half-space clipping. Geometry is kept
/// in `f64`; generated meshes convert on assembly.
struct ConvexCell {
    verts: Vec<Vector3<f64>>,
    /// Outward-oriented vertex loops.
    faces: Vec<Vec<usize>>,
}

impl ConvexCell {
    fn cube(lo: [f64; 3], hi: [f64; 3]) -> Self {
        let v = |i: usize| {
            Vector3::new(
                if i & 1 == 0 { lo[0] } else { hi[0] },
                if i & 2 == 0 { lo[1] } else { hi[1] },
                if i & 4 == 0 { lo[2] } else { hi[2] },
            )
        };
        ConvexCell {
            verts: (0..8).map(v).collect(),
            // outward loops of the axis-aligned box
            faces: vec![
                vec![0, 4, 6, 2], // x = lo
                vec![1, 3, 7, 5], // x = hi
                vec![0, 1, 5, 4], // y = lo
                vec![2, 6, 7, 3], // y = hi
                vec![0, 2, 3, 1], // z = lo
                vec![4, 5, 7, 6], // z = hi
            ],
        }
    }

    /// Clip to the half-space `n·x ≤ d`; returns false if the cell vanished.
    fn clip(&mut self, n: &Vector3<f64>, d: f64, eps: f64) -> bool {
        let side: Vec<f64> = self.verts.iter().map(|v| n.dot(v) - d).collect();
        if side.iter().all(|&s| s <= eps) {
            return true;
        }
        if side.iter().all(|&s| s >= -eps) {
            self.faces.clear();
            self.verts.clear();
            return false;
        }

        let mut cut_ids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut new_faces: Vec<Vec<usize>> = Vec::new();
        let mut cut_ring: Vec<usize> = Vec::new();
        let old_faces = std::mem::take(&mut self.faces);
        for loop_ in &old_faces {
            let m = loop_.len();
            let mut out: Vec<usize> = Vec::with_capacity(m + 2);
            for i in 0..m {
                let va = loop_[i];
                let vb = loop_[(i + 1) % m];
                let (sa, sb) = (side[va], side[vb]);
                if sa <= eps {
                    out.push(va);
                }
                let crosses = (sa < -eps && sb > eps) || (sa > eps && sb < -eps);
                if crosses {
                    let key = (va.min(vb), va.max(vb));
                    let id = match cut_ids.get(&key) {
                        Some(&id) => id,
                        None => {
                            let t = sa / (sa - sb);
                            let p = self.verts[va] + (self.verts[vb] - self.verts[va]) * t;
                            self.verts.push(p);
                            let id = self.verts.len() - 1;
                            cut_ids.insert(key, id);
                            id
                        }
                    };
                    out.push(id);
                }
            }
            dedupe_loop(&mut out, &self.verts, eps);
            if out.len() >= 3 {
                new_faces.push(out);
            }
        }
        for (_, &id) in cut_ids.iter() {
            cut_ring.push(id);
        }
        // original vertices sitting on the cut plane join the cap ring
        for (v, &s) in side.iter().enumerate() {
            if s.abs() <= eps && new_faces.iter().any(|f| f.contains(&v)) {
                cut_ring.push(v);
            }
        }
        if cut_ring.len() >= 3 {
            let mut ring_pts: Vec<(usize, Vector3<f64>)> = cut_ring
                .iter()
                .map(|&id| (id, self.verts[id]))
                .collect();
            // deduplicate coincident ring points
            ring_pts.sort_by(|a, b| a.0.cmp(&b.0));
            ring_pts.dedup_by(|a, b| (a.1 - b.1).norm() <= eps);
            if ring_pts.len() >= 3 {
                let c = ring_pts
                    .iter()
                    .fold(Vector3::zeros(), |acc, (_, p)| acc + p)
                    / ring_pts.len() as f64;
                let t1 = {
                    let seed = if n.x.abs() < 0.9 {
                        Vector3::x()
                    } else {
                        Vector3::y()
                    };
                    let t = seed - n * n.dot(&seed);
                    t / t.norm()
                };
                let t2 = n.cross(&t1);
                ring_pts.sort_by(|a, b| {
                    let pa = a.1 - c;
                    let pb = b.1 - c;
                    let aa = pa.dot(&t2).atan2(pa.dot(&t1));
                    let ab = pb.dot(&t2).atan2(pb.dot(&t1));
                    aa.partial_cmp(&ab).unwrap()
                });
                let mut cap: Vec<usize> = ring_pts.iter().map(|(id, _)| *id).collect();
                // outward normal of the cap is +n
                let mut newell = Vector3::zeros();
                for i in 0..cap.len() {
                    let a = self.verts[cap[i]];
                    let b = self.verts[cap[(i + 1) % cap.len()]];
                    newell += a.cross(&b);
                }
                if newell.dot(n) < 0.0 {
                    cap.reverse();
                }
                new_faces.push(cap);
            }
        }
        self.faces = new_faces;
        self.compact();
        !self.faces.is_empty()
    }

    fn compact(&mut self) {
        let mut map = vec![usize::MAX; self.verts.len()];
        let mut new_verts = Vec::new();
        for f in &mut self.faces {
            for v in f.iter_mut() {
                if map[*v] == usize::MAX {
                    map[*v] = new_verts.len();
                    new_verts.push(self.verts[*v]);
                }
                *v = map[*v];
            }
        }
        self.verts = new_verts;
    }
}

fn dedupe_loop(loop_: &mut Vec<usize>, verts: &[Vector3<f64>], eps: f64) {
    if loop_.is_empty() {
        return;
    }
    let mut out: Vec<usize> = Vec::with_capacity(loop_.len());
    for &v in loop_.iter() {
        if let Some(&last) = out.last() {
            if last == v || (verts[last] - verts[v]).norm() <= eps {
                continue;
            }
        }
        out.push(v);
    }
    while out.len() >= 2 {
        let first = out[0];
        let last = *out.last().unwrap();
        if first == last || (verts[first] - verts[last]).norm() <= eps {
            out.pop();
        } else {
            break;
        }
    }
    *loop_ = out;
}

/// Merges clipped cells into shared-vertex mesh data, matching faces by
/// their quantized vertex sets.
struct CellAssembler {
    quantum: f64,
    vert_ids: HashMap<[i64; 3], usize>,
    vertices: Vec<Vector3<f64>>,
    face_ids: HashMap<Vec<usize>, usize>,
    faces: Vec<Vec<usize>>,
    cells: Vec<Vec<(usize, bool)>>,
}

impl CellAssembler {
    fn new(quantum: f64) -> Self {
        CellAssembler {
            quantum,
            vert_ids: HashMap::new(),
            vertices: Vec::new(),
            face_ids: HashMap::new(),
            faces: Vec::new(),
            cells: Vec::new(),
        }
    }

    fn vertex(&mut self, p: &Vector3<f64>) -> usize {
        let key = [
            (p.x / self.quantum).round() as i64,
            (p.y / self.quantum).round() as i64,
            (p.z / self.quantum).round() as i64,
        ];
        if let Some(&id) = self.vert_ids.get(&key) {
            return id;
        }
        let id = self.vertices.len();
        // snap to the quantized representative so shared vertices agree
        self.vertices.push(Vector3::new(
            key[0] as f64 * self.quantum,
            key[1] as f64 * self.quantum,
            key[2] as f64 * self.quantum,
        ));
        self.vert_ids.insert(key, id);
        id
    }

    fn add_cell(&mut self, cell: &ConvexCell) {
        let mut list = Vec::with_capacity(cell.faces.len());
        for loop_ in &cell.faces {
            let global: Vec<usize> = loop_.iter().map(|&v| self.vertex(&cell.verts[v])).collect();
            let mut key = global.clone();
            key.sort_unstable();
            key.dedup();
            if key.len() < 3 {
                continue;
            }
            if let Some(&fid) = self.face_ids.get(&key) {
                list.push((fid, false));
            } else {
                let fid = self.faces.len();
                self.face_ids.insert(key, fid);
                self.faces.push(global);
                list.push((fid, true));
            }
        }
        self.cells.push(list);
    }

    fn build<S: Scalar>(self) -> Result<PolyMesh<S>> {
        let vertices = self
            .vertices
            .iter()
            .map(|v| Point3::new(lit::<S>(v.x), lit::<S>(v.y), lit::<S>(v.z)))
            .collect();
        PolyMesh::build(MeshData {
            vertices,
            faces: self.faces,
            cells: self.cells,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn octa_n1_partitions_unit_cube() {
        let mesh: PolyMesh<f64> = generate_octa_mesh(1).unwrap();
        assert!(mesh.cells.len() >= 1);
        assert!((mesh.total_volume() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn octa_n4_interior_cells_are_truncated_octahedra() {
        let mesh: PolyMesh<f64> = generate_octa_mesh(4).unwrap();
        assert!((mesh.total_volume() - 1.0).abs() < 1e-10);
        // a cell well inside the cube must have the full 14 faces
        let interior = mesh
            .cells
            .iter()
            .find(|c| {
                let d = c.centroid - Point3::new(0.5, 0.5, 0.5);
                d.norm() < 0.05
            })
            .expect("no central cell");
        assert_eq!(interior.faces.len(), 14);
    }

    #[test]
    fn octa_n12_count_recorded() {
        // construction-specific count; logged for comparison, not pinned
        let mesh: PolyMesh<f64> = generate_octa_mesh(12).unwrap();
        assert!((mesh.total_volume() - 1.0).abs() < 1e-10);
        let expected = 13usize.pow(3) + 12usize.pow(3);
        assert_eq!(mesh.cells.len(), expected);
    }

    #[test]
    fn single_truncated_octahedron() {
        let mesh: PolyMesh<f64> = truncated_octahedron().unwrap();
        assert_eq!(mesh.cells.len(), 1);
        assert_eq!(mesh.cells[0].faces.len(), 14);
        // BCC Voronoi cell with lattice constant 1 has volume 1/2
        assert!((mesh.cells[0].volume - 0.5).abs() < 1e-10);
        assert_eq!(mesh.cells[0].vertices.len(), 24);
    }

    #[test]
    fn zero_resolution_is_rejected() {
        assert!(generate_hex_mesh::<f64>(0, [0.0; 3], [1.0; 3]).is_err());
        assert!(generate_octa_mesh::<f64>(0).is_err());
    }
}
