//! Primal constraint selection.
//!
//! The minimal space makes every macro vertex primal and adds one normal
//! flux average per macro face plus the per-(edge, incident face) normal
//! flux averages. With face moments among the dofs those edge rows are
//! identically zero (the net flux through a face is carried by the lowest
//! normal moment alone) and the SVD filter removes them. The fully-primal
//! mode checks each face's functionals against the six rigid modes with a
//! rank test and adds edge averages until the face controls all of them.

use crate::decomp::{InterfaceLayout, MacroKind, Site};
use crate::mesh::PolyMesh;
use crate::poly::{gauss_legendre, lobatto_interior};
use crate::vem::{DofEntity, DofMap};
use crate::{lit, Scalar};
use nalgebra::{DMatrix, Point3, Vector3};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CoarseMode {
    Minimal,
    FullyPrimal,
    /// Minimal constraints plus deluxe GEVP enrichment at the given
    /// tolerance (∞ = no enrichment).
    Adaptive { nu_tol: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScalingMode {
    Multiplicity,
    Deluxe,
}

/// Raw (unfiltered) constraint rows per macro entity, in the group's dof
/// ordering.
#[derive(Clone, Debug)]
pub struct PrimalRows<S> {
    /// rows[g] has one row per constraint over macros[g].dofs.
    pub rows: Vec<DMatrix<S>>,
}

/// Normal flux average over a macro face as a row over its dofs: the face
/// integral of v·n_ij is exactly Σ_f ±|f|·(lowest normal moment dof).
fn face_flux_row<S: Scalar>(
    mesh: &PolyMesh<S>,
    dm: &DofMap,
    layout: &InterfaceLayout,
    mi: usize,
) -> DMatrix<S> {
    let m = &layout.macros[mi];
    let side_i = m.subdomains[0];
    let mut row = DMatrix::<S>::zeros(1, m.dofs.len());
    for site in &m.sites {
        if let Site::Face(f) = site {
            let face = &mesh.faces[*f];
            let dof = dm.face_dof(*f, 0, 0);
            if let Ok(pos) = m.dofs.binary_search(&dof) {
                // stored normal points out of cells[0]'s subdomain
                let out_sub = face.cells[0]
                    .map(|c| layout.partition.cell_subdomain[c])
                    .unwrap_or(usize::MAX);
                let sign = if out_sub == side_i { S::one() } else { -S::one() };
                row[(0, pos)] = sign * face.area;
            }
        }
    }
    row
}

/// Edge-per-face normal flux rows: the literal functionals
/// ∫_{F} (θ_E v)·n_ij. With the dof set used here they vanish identically
/// (θ_E zeroes every face moment), so these rows only feed the SVD filter.
fn edge_face_flux_rows<S: Scalar>(layout: &InterfaceLayout, mi: usize) -> DMatrix<S> {
    let m = &layout.macros[mi];
    let n_faces = layout
        .macros
        .iter()
        .filter(|o| {
            o.kind == MacroKind::Face && o.subdomains.iter().all(|s| m.subdomains.contains(s))
        })
        .count();
    DMatrix::zeros(n_faces, m.dofs.len())
}

/// Average of the velocity over a macro edge, one row per direction in
/// `dirs`, using the θ_E cutoff (vertex endpoints excluded).
fn edge_average_rows<S: Scalar>(
    mesh: &PolyMesh<S>,
    dm: &DofMap,
    layout: &InterfaceLayout,
    mi: usize,
    dirs: &[Vector3<S>],
) -> DMatrix<S> {
    let m = &layout.macros[mi];
    let k = dm.k;
    let mut rows = DMatrix::<S>::zeros(dirs.len(), m.dofs.len());
    let interior = lobatto_interior(k);
    let glq = gauss_legendre(k + 2);
    for site in &m.sites {
        let Site::Edge(e) = *site else { continue };
        let [a, b] = mesh.edges[e];
        let pa = mesh.vertices[a];
        let pb = mesh.vertices[b];
        let half = (pb - pa).norm() * lit::<S>(0.5);
        // Lobatto nodes in global order; endpoint dofs may live outside the
        // group (macro vertices) or inside it (interior vertices of E)
        let mut nodes: Vec<(f64, Option<usize>)> = Vec::new();
        nodes.push((-1.0, Some(dm.vertex_dof(a, 0))));
        for (pt, &t) in interior.iter().enumerate() {
            nodes.push((t, Some(dm.edge_dof(e, pt, 0))));
        }
        nodes.push((1.0, Some(dm.vertex_dof(b, 0))));
        let ts: Vec<f64> = nodes.iter().map(|n| n.0).collect();
        for &(t, w) in glq {
            let lag = lagrange(&ts, t);
            for (node, (_, dof0)) in nodes.iter().enumerate() {
                let Some(dof0) = dof0 else { continue };
                for d in 0..3 {
                    let dof = dof0 + d;
                    // θ_E: only dofs belonging to this group contribute
                    if let Ok(pos) = m.dofs.binary_search(&dof) {
                        for (ri, dir) in dirs.iter().enumerate() {
                            rows[(ri, pos)] +=
                                half * lit::<S>(w) * lit::<S>(lag[node]) * dir[d];
                        }
                    }
                }
            }
        }
    }
    rows
}

fn lagrange(nodes: &[f64], t: f64) -> Vec<f64> {
    let n = nodes.len();
    let mut out = vec![1.0; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                out[i] *= (t - nodes[j]) / (nodes[i] - nodes[j]);
            }
        }
    }
    out
}

/// Unit tangent of a macro edge from its extreme points.
fn edge_direction<S: Scalar>(mesh: &PolyMesh<S>, layout: &InterfaceLayout, mi: usize) -> Vector3<S> {
    let m = &layout.macros[mi];
    let mut pts: Vec<Point3<S>> = Vec::new();
    for site in &m.sites {
        match site {
            Site::Vertex(v) => pts.push(mesh.vertices[*v]),
            Site::Edge(e) => {
                let [a, b] = mesh.edges[*e];
                pts.push(mesh.vertices[a]);
                pts.push(mesh.vertices[b]);
            }
            Site::Face(_) => {}
        }
    }
    let mut best = (S::zero(), Vector3::x());
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let d = pts[j] - pts[i];
            let n = d.norm();
            if n > best.0 {
                best = (n, d / n);
            }
        }
    }
    best.1
}

/// Values of the velocity dofs on the six rigid modes, used by the
/// fully-primal rank check.
pub fn rigid_mode_dofs<S: Scalar>(
    mesh: &PolyMesh<S>,
    dm: &DofMap,
    face_ops: &[crate::vem::FaceOps<S>],
    dofs: &[usize],
) -> DMatrix<S> {
    let modes: [Box<dyn Fn(&Point3<S>) -> Vector3<S>>; 6] = [
        Box::new(|_| Vector3::new(S::one(), S::zero(), S::zero())),
        Box::new(|_| Vector3::new(S::zero(), S::one(), S::zero())),
        Box::new(|_| Vector3::new(S::zero(), S::zero(), S::one())),
        Box::new(|p: &Point3<S>| Vector3::new(S::zero(), -p.z, p.y)),
        Box::new(|p: &Point3<S>| Vector3::new(p.z, S::zero(), -p.x)),
        Box::new(|p: &Point3<S>| Vector3::new(-p.y, p.x, S::zero())),
    ];
    let mut out = DMatrix::<S>::zeros(dofs.len(), 6);
    for (row, &g) in dofs.iter().enumerate() {
        for (mcol, mode) in modes.iter().enumerate() {
            out[(row, mcol)] = match dm.dof_entity(g) {
                DofEntity::Vertex(v) => {
                    let d = (g - dm.vertex_dof(v, 0)) % 3;
                    mode(&mesh.vertices[v])[d]
                }
                DofEntity::Edge(e) => {
                    let local = g - dm.edge_dof(e, 0, 0);
                    let pt = local / 3;
                    let d = local % 3;
                    let [a, b] = mesh.edges[e];
                    let t = lobatto_interior(dm.k)[pt];
                    let s = lit::<S>(0.5 * (t + 1.0));
                    let p = mesh.vertices[a] + (mesh.vertices[b] - mesh.vertices[a]) * s;
                    mode(&p)[d]
                }
                DofEntity::Face(f) => {
                    let local = g - dm.face_dof(f, 0, 0);
                    let wdir = local / dm.moms_per_face;
                    let alpha = local % dm.moms_per_face;
                    let face = &mesh.faces[f];
                    let dir = [face.normal, face.tangent[0], face.tangent[1]][wdir];
                    let fo = &face_ops[f];
                    let mut s = S::zero();
                    for (q, p) in fo.quad.nodes.iter().enumerate() {
                        let (xi, eta) = fo.quad_local[q];
                        s += fo.quad.weights[q]
                            * mode(p).dot(&dir)
                            * fo.basis.eval(xi, eta, alpha);
                    }
                    s / face.area
                }
                DofEntity::Cell(_) => S::zero(),
            };
        }
    }
    out
}

/// Builds the raw constraint rows for every macro entity.
pub fn build_primal_rows<S: Scalar>(
    mesh: &PolyMesh<S>,
    dm: &DofMap,
    face_ops: &[crate::vem::FaceOps<S>],
    layout: &InterfaceLayout,
    mode: CoarseMode,
) -> PrimalRows<S> {
    let mut rows: Vec<DMatrix<S>> = Vec::with_capacity(layout.macros.len());
    for (mi, m) in layout.macros.iter().enumerate() {
        let r = match m.kind {
            MacroKind::Vertex => DMatrix::identity(m.dofs.len(), m.dofs.len()),
            MacroKind::Face => face_flux_row(mesh, dm, layout, mi),
            MacroKind::Edge => edge_face_flux_rows(layout, mi),
        };
        rows.push(r);
    }

    if matches!(mode, CoarseMode::FullyPrimal) {
        // rank-complete each macro face against the rigid modes
        for (mi, m) in layout.macros.iter().enumerate() {
            if m.kind != MacroKind::Face {
                continue;
            }
            // functionals available on the closure of F: its own rows plus
            // the rows of adjacent vertex/edge macros
            let adjacent: Vec<usize> = layout
                .macros
                .iter()
                .enumerate()
                .filter(|(_, other)| {
                    other.kind != MacroKind::Face
                        && m.subdomains.iter().all(|s| other.subdomains.contains(s))
                })
                .map(|(i, _)| i)
                .collect();
            let rank = |extra: &[(usize, DMatrix<S>)]| -> usize {
                let mut funcs: Vec<(usize, DMatrix<S>)> = vec![(mi, rows[mi].clone())];
                for &ai in &adjacent {
                    funcs.push((ai, rows[ai].clone()));
                }
                funcs.extend_from_slice(extra);
                let total: usize = funcs.iter().map(|(_, r)| r.nrows()).sum();
                let mut eval = DMatrix::<S>::zeros(total, 6);
                let mut at = 0;
                for (gi, r) in &funcs {
                    let rm = rigid_mode_dofs(mesh, dm, face_ops, &layout.macros[*gi].dofs);
                    let block = r * rm;
                    eval.view_mut((at, 0), (r.nrows(), 6)).copy_from(&block);
                    at += r.nrows();
                }
                let svd = eval.svd(false, false);
                let max = svd.singular_values.iter().fold(S::zero(), |a, &b| a.max(b));
                svd.singular_values
                    .iter()
                    .filter(|&&s| s > max * lit::<S>(1e-8))
                    .count()
            };
            if rank(&[]) >= 6 {
                continue;
            }
            // add tangential edge averages on the adjacent macro edges
            let mut extra: Vec<(usize, DMatrix<S>)> = Vec::new();
            for &ai in &adjacent {
                if layout.macros[ai].kind != MacroKind::Edge {
                    continue;
                }
                let t = edge_direction(mesh, layout, ai);
                extra.push((ai, edge_average_rows(mesh, dm, layout, ai, &[t])));
                if rank(&extra) >= 6 {
                    break;
                }
            }
            if rank(&extra) < 6 {
                // fall back to full component averages per edge
                extra.clear();
                for &ai in &adjacent {
                    if layout.macros[ai].kind != MacroKind::Edge {
                        continue;
                    }
                    extra.push((
                        ai,
                        edge_average_rows(
                            mesh,
                            dm,
                            layout,
                            ai,
                            &[Vector3::x(), Vector3::y(), Vector3::z()],
                        ),
                    ));
                }
            }
            for (ai, r) in extra {
                let combined = DMatrix::from_fn(
                    rows[ai].nrows() + r.nrows(),
                    rows[ai].ncols(),
                    |i, j| {
                        if i < rows[ai].nrows() {
                            rows[ai][(i, j)]
                        } else {
                            r[(i - rows[ai].nrows(), j)]
                        }
                    },
                );
                rows[ai] = combined;
            }
        }
    }
    PrimalRows { rows }
}
