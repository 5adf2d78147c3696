//! Plain-text polyhedral mesh format.
//!
//! ```text
//! # comment lines start with '#'
//! polymesh
//! <n_vertices> <n_faces> <n_cells>
//! x y z                       (one line per vertex)
//! k v0 v1 ... v(k-1)          (one line per face: oriented vertex loop)
//! m s0 s1 ... s(m-1)          (one line per cell: signed 1-based face ids;
//!                              +f means the stored face normal is outward)
//! ```
//!
//! All validation of [`PolyMesh::build`] applies on load; violations are
//! rejected with the offending entity index.

use super::{MeshData, PolyMesh};
use crate::{lit, Error, Result, Scalar};
use nalgebra::Point3;
use std::io::{BufRead, BufWriter, Write};
use std::path::Path;

pub fn save_mesh<S: Scalar>(mesh: &PolyMesh<S>, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    let mut w = BufWriter::new(file);
    writeln!(w, "polymesh")?;
    writeln!(
        w,
        "{} {} {}",
        mesh.vertices.len(),
        mesh.faces.len(),
        mesh.cells.len()
    )?;
    for v in &mesh.vertices {
        writeln!(
            w,
            "{:.17e} {:.17e} {:.17e}",
            v.x.to_f64_lossy(),
            v.y.to_f64_lossy(),
            v.z.to_f64_lossy()
        )?;
    }
    for f in &mesh.faces {
        write!(w, "{}", f.vertices.len())?;
        for v in &f.vertices {
            write!(w, " {v}")?;
        }
        writeln!(w)?;
    }
    for c in &mesh.cells {
        write!(w, "{}", c.faces.len())?;
        for &(f, outward) in &c.faces {
            let signed = (f + 1) as i64 * if outward { 1 } else { -1 };
            write!(w, " {signed}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn load_mesh<S: Scalar>(path: &Path) -> Result<PolyMesh<S>> {
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    let mut lines = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim().to_string();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        lines.push((idx + 1, trimmed));
    }
    let mut cursor = lines.into_iter();
    let mut next = |what: &str| {
        cursor
            .next()
            .ok_or_else(|| Error::MeshParse {
                line: 0,
                msg: format!("unexpected end of file, expected {what}"),
            })
    };

    let (line_no, header) = next("header")?;
    if header != "polymesh" {
        return Err(Error::MeshParse {
            line: line_no,
            msg: format!("expected 'polymesh' header, found '{header}'"),
        });
    }
    let (line_no, counts) = next("counts")?;
    let counts: Vec<usize> = parse_fields(&counts, line_no)?;
    if counts.len() != 3 {
        return Err(Error::MeshParse {
            line: line_no,
            msg: "counts line must hold <n_vertices> <n_faces> <n_cells>".into(),
        });
    }
    let (nv, nf, nc) = (counts[0], counts[1], counts[2]);

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line_no, line) = next("vertex coordinates")?;
        let xyz: Vec<f64> = parse_fields(&line, line_no)?;
        if xyz.len() != 3 {
            return Err(Error::MeshParse {
                line: line_no,
                msg: "vertex line must hold three coordinates".into(),
            });
        }
        vertices.push(Point3::new(
            lit::<S>(xyz[0]),
            lit::<S>(xyz[1]),
            lit::<S>(xyz[2]),
        ));
    }

    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (line_no, line) = next("face loop")?;
        let ids: Vec<usize> = parse_fields(&line, line_no)?;
        if ids.is_empty() || ids[0] + 1 != ids.len() || ids[0] < 3 {
            return Err(Error::MeshParse {
                line: line_no,
                msg: "face line must be '<k> v0 .. v(k-1)' with k ≥ 3".into(),
            });
        }
        faces.push(ids[1..].to_vec());
    }

    let mut cells = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (line_no, line) = next("cell face list")?;
        let ids: Vec<i64> = parse_fields(&line, line_no)?;
        if ids.is_empty() || ids[0] <= 0 || ids[0] as usize + 1 != ids.len() {
            return Err(Error::MeshParse {
                line: line_no,
                msg: "cell line must be '<m> ±f1 .. ±fm' (1-based faces)".into(),
            });
        }
        let mut list = Vec::with_capacity(ids[0] as usize);
        for &s in &ids[1..] {
            if s == 0 || s.unsigned_abs() as usize > nf {
                return Err(Error::MeshParse {
                    line: line_no,
                    msg: format!("face reference {s} out of range"),
                });
            }
            list.push((s.unsigned_abs() as usize - 1, s > 0));
        }
        cells.push(list);
    }

    PolyMesh::build(MeshData {
        vertices,
        faces,
        cells,
    })
}

fn parse_fields<T: std::str::FromStr>(line: &str, line_no: usize) -> Result<Vec<T>> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<T>().map_err(|_| Error::MeshParse {
                line: line_no,
                msg: format!("cannot parse token '{tok}'"),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::generate_hex_mesh;
    use super::*;

    #[test]
    fn roundtrip_preserves_connectivity() {
        let mesh: PolyMesh<f64> = generate_hex_mesh(1, [0.0; 3], [1.0; 3]).unwrap();
        let dir = std::env::temp_dir().join("polystokes_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("hex1.mesh");
        save_mesh(&mesh, &path).unwrap();
        let loaded: PolyMesh<f64> = load_mesh(&path).unwrap();
        assert_eq!(loaded.vertices.len(), mesh.vertices.len());
        assert_eq!(loaded.edges, mesh.edges);
        for (a, b) in loaded.faces.iter().zip(&mesh.faces) {
            assert_eq!(a.vertices, b.vertices);
            assert_eq!(a.cells, b.cells);
        }
        for (a, b) in loaded.cells.iter().zip(&mesh.cells) {
            assert_eq!(a.faces, b.faces);
        }
    }

    #[test]
    fn loads_hand_written_tetrahedron() {
        let text = "# one tet\npolymesh\n4 4 1\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n\
                    3 0 2 1\n3 0 1 3\n3 0 3 2\n3 1 2 3\n4 1 2 3 4\n";
        let dir = std::env::temp_dir().join("polystokes_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("tet.mesh");
        std::fs::write(&path, text).unwrap();
        let mesh: PolyMesh<f64> = load_mesh(&path).unwrap();
        assert_eq!(mesh.cells.len(), 1);
        assert_eq!(mesh.faces.len(), 4);
        assert!((mesh.total_volume() - 1.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_nonplanar_face_naming_it() {
        // quad warped out of plane by 1e-3
        let text = "polymesh\n5 5 1\n0 0 0\n1 0 0\n1 1 0\n0 1 1e-3\n0.5 0.5 1\n\
                    4 0 3 2 1\n3 0 1 4\n3 1 2 4\n3 2 3 4\n3 3 0 4\n\
                    5 1 2 3 4 5\n";
        let dir = std::env::temp_dir().join("polystokes_io_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("warped.mesh");
        std::fs::write(&path, text).unwrap();
        match load_mesh::<f64>(&path) {
            Err(Error::NonPlanarFace { face: 0, .. }) => {}
            other => panic!("expected NonPlanarFace for face 0, got {other:?}"),
        }
    }
}
