//! Interface classification: interior vs interface dofs, macro entities of
//! the subdomain skeleton, and the per-subdomain pressure split.
//!
//! Classification is combinatorial: a dof site's sharing set is the set of
//! subdomains owning a cell incident to its mesh entity. Sites shared by
//! exactly two subdomains form macro faces; sites shared by more form macro
//! edges, except isolated single vertices, which are macro vertices. The
//! interior divergence and cross moments (D_V^4/D_V^5) are always interior.

use super::partition::Partition;
use crate::mesh::PolyMesh;
use crate::vem::DofMap;
use crate::Scalar;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Site {
    Vertex(usize),
    Edge(usize),
    Face(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MacroKind {
    Face,
    Edge,
    Vertex,
}

#[derive(Clone, Debug)]
pub struct MacroEntity {
    pub kind: MacroKind,
    /// Sharing subdomains, ascending; macro faces have exactly two.
    pub subdomains: Vec<usize>,
    pub sites: Vec<Site>,
    /// Free velocity dofs on the entity (global ids, ascending).
    pub dofs: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DofClass {
    Constrained,
    Interior(usize),
    /// Interface dof with its macro entity index.
    Interface(usize),
}

#[derive(Clone, Debug)]
pub struct InterfaceLayout {
    pub partition: Partition,
    pub macros: Vec<MacroEntity>,
    pub dof_class: Vec<DofClass>,
    /// Global interface numbering: ascending global dof ids.
    pub interface_dofs: Vec<usize>,
    /// Global dof → interface index or MAX.
    pub gamma_index: Vec<usize>,
    /// card(I_x) per interface dof.
    pub multiplicity: Vec<usize>,
    /// Per subdomain: interior free velocity dofs (ascending global ids).
    pub sub_interior: Vec<Vec<usize>>,
    /// Per subdomain: interface indices on its boundary (ascending).
    pub sub_gamma: Vec<Vec<usize>>,
    /// Per subdomain: whether the constant pressure is a separate coarse
    /// unknown (true unless the subdomain touches a free boundary).
    pub sub_has_q0: Vec<bool>,
    /// p0 unknown index per subdomain (MAX when absent).
    pub q0_index: Vec<usize>,
    pub n_q0: usize,
}

pub fn classify<S: Scalar>(
    mesh: &PolyMesh<S>,
    dm: &DofMap,
    partition: Partition,
    constrained: &[bool],
    neumann_faces: &[usize],
) -> InterfaceLayout {
    let nsub = partition.n_subdomains;
    // entity → incident cells
    let mut vertex_cells: Vec<Vec<usize>> = vec![Vec::new(); mesh.vertices.len()];
    let mut edge_cells: Vec<Vec<usize>> = vec![Vec::new(); mesh.edges.len()];
    for (c, cell) in mesh.cells.iter().enumerate() {
        for &v in &cell.vertices {
            vertex_cells[v].push(c);
        }
        for &e in &cell.edges {
            edge_cells[e].push(c);
        }
    }

    let subs_of = |cells: &[usize]| -> BTreeSet<usize> {
        cells
            .iter()
            .map(|&c| partition.cell_subdomain[c])
            .collect()
    };

    // per-site sharing sets
    let mut site_subs: BTreeMap<Site, BTreeSet<usize>> = BTreeMap::new();
    for v in 0..mesh.vertices.len() {
        site_subs.insert(Site::Vertex(v), subs_of(&vertex_cells[v]));
    }
    for e in 0..mesh.edges.len() {
        site_subs.insert(Site::Edge(e), subs_of(&edge_cells[e]));
    }
    for (f, face) in mesh.faces.iter().enumerate() {
        let cells: Vec<usize> = face.cells.iter().flatten().copied().collect();
        site_subs.insert(Site::Face(f), subs_of(&cells));
    }

    // free dofs per site
    let site_dofs = |site: Site| -> Vec<usize> {
        let mut out = Vec::new();
        match site {
            Site::Vertex(v) => {
                for d in 0..3 {
                    out.push(dm.vertex_dof(v, d));
                }
            }
            Site::Edge(e) => {
                for pt in 0..dm.pts_per_edge {
                    for d in 0..3 {
                        out.push(dm.edge_dof(e, pt, d));
                    }
                }
            }
            Site::Face(f) => {
                for w in 0..3 {
                    for alpha in 0..dm.moms_per_face {
                        out.push(dm.face_dof(f, w, alpha));
                    }
                }
            }
        }
        out.retain(|&g| !constrained[g]);
        out
    };

    // group interface sites by sharing set, then split into connected
    // components so two subdomains touching in separate patches get
    // separate macro faces
    let mut groups: BTreeMap<Vec<usize>, Vec<Site>> = BTreeMap::new();
    for (&site, subs) in &site_subs {
        if subs.len() >= 2 && !site_dofs(site).is_empty() {
            groups
                .entry(subs.iter().copied().collect())
                .or_default()
                .push(site);
        }
    }

    // site adjacency within a group via mesh incidence
    let mut edge_of_vertex: Vec<Vec<usize>> = vec![Vec::new(); mesh.vertices.len()];
    for (e, &[a, b]) in mesh.edges.iter().enumerate() {
        edge_of_vertex[a].push(e);
        edge_of_vertex[b].push(e);
    }
    let mut face_of_edge: Vec<Vec<usize>> = vec![Vec::new(); mesh.edges.len()];
    for (f, face) in mesh.faces.iter().enumerate() {
        for &e in &face.edges {
            face_of_edge[e].push(f);
        }
    }

    let mut macros: Vec<MacroEntity> = Vec::new();
    for (subs, sites) in groups {
        let set: BTreeSet<Site> = sites.iter().copied().collect();
        let mut remaining = set.clone();
        while let Some(&start) = remaining.iter().next() {
            // BFS over sites connected through shared vertices/edges
            let mut comp = Vec::new();
            let mut queue = vec![start];
            remaining.remove(&start);
            while let Some(s) = queue.pop() {
                comp.push(s);
                let push = |n: Site, remaining: &mut BTreeSet<Site>, queue: &mut Vec<Site>| {
                    if remaining.remove(&n) {
                        queue.push(n);
                    }
                };
                match s {
                    Site::Vertex(v) => {
                        for &e in &edge_of_vertex[v] {
                            push(Site::Edge(e), &mut remaining, &mut queue);
                            for &f in &face_of_edge[e] {
                                push(Site::Face(f), &mut remaining, &mut queue);
                            }
                        }
                    }
                    Site::Edge(e) => {
                        let [a, b] = mesh.edges[e];
                        push(Site::Vertex(a), &mut remaining, &mut queue);
                        push(Site::Vertex(b), &mut remaining, &mut queue);
                        for &f in &face_of_edge[e] {
                            push(Site::Face(f), &mut remaining, &mut queue);
                        }
                    }
                    Site::Face(f) => {
                        for &v in &mesh.faces[f].vertices {
                            push(Site::Vertex(v), &mut remaining, &mut queue);
                        }
                        for &e in &mesh.faces[f].edges {
                            push(Site::Edge(e), &mut remaining, &mut queue);
                        }
                    }
                }
            }
            comp.sort();
            let kind = if subs.len() == 2 {
                MacroKind::Face
            } else if comp.len() == 1 && matches!(comp[0], Site::Vertex(_)) {
                MacroKind::Vertex
            } else {
                MacroKind::Edge
            };
            let mut dofs: Vec<usize> = comp.iter().flat_map(|&s| site_dofs(s)).collect();
            dofs.sort_unstable();
            macros.push(MacroEntity {
                kind,
                subdomains: subs.clone(),
                sites: comp,
                dofs,
            });
        }
    }
    // deterministic macro ordering: by subdomain set, then first site
    macros.sort_by(|a, b| (&a.subdomains, &a.sites).cmp(&(&b.subdomains, &b.sites)));

    // dof classification
    let mut dof_class = vec![DofClass::Constrained; dm.n_velocity];
    for g in 0..dm.n_velocity {
        if constrained[g] {
            continue;
        }
        let site = match dm.dof_entity(g) {
            crate::vem::DofEntity::Vertex(v) => Site::Vertex(v),
            crate::vem::DofEntity::Edge(e) => Site::Edge(e),
            crate::vem::DofEntity::Face(f) => Site::Face(f),
            crate::vem::DofEntity::Cell(c) => {
                dof_class[g] = DofClass::Interior(partition.cell_subdomain[c]);
                continue;
            }
        };
        let subs = &site_subs[&site];
        if subs.len() == 1 {
            dof_class[g] = DofClass::Interior(*subs.iter().next().unwrap());
        }
        // interface dofs get their macro index below
    }
    for (mi, m) in macros.iter().enumerate() {
        for &g in &m.dofs {
            dof_class[g] = DofClass::Interface(mi);
        }
    }

    let mut interface_dofs = Vec::new();
    let mut gamma_index = vec![usize::MAX; dm.n_velocity];
    for g in 0..dm.n_velocity {
        if matches!(dof_class[g], DofClass::Interface(_)) {
            gamma_index[g] = interface_dofs.len();
            interface_dofs.push(g);
        }
    }
    let multiplicity: Vec<usize> = interface_dofs
        .iter()
        .map(|&g| match dof_class[g] {
            DofClass::Interface(mi) => macros[mi].subdomains.len(),
            _ => unreachable!(),
        })
        .collect();

    let mut sub_interior = vec![Vec::new(); nsub];
    for g in 0..dm.n_velocity {
        if let DofClass::Interior(s) = dof_class[g] {
            sub_interior[s].push(g);
        }
    }
    let mut sub_gamma_sets: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); nsub];
    for m in &macros {
        for &s in &m.subdomains {
            for &g in &m.dofs {
                sub_gamma_sets[s].insert(gamma_index[g]);
            }
        }
    }
    let sub_gamma: Vec<Vec<usize>> = sub_gamma_sets
        .into_iter()
        .map(|s| s.into_iter().collect())
        .collect();

    // a subdomain keeps its coarse constant pressure unless some of its
    // boundary carries free non-interface dofs (a Neumann wall)
    let mut sub_has_q0 = vec![true; nsub];
    for &f in neumann_faces {
        for c in mesh.faces[f].cells.iter().flatten() {
            sub_has_q0[partition.cell_subdomain[*c]] = false;
        }
    }
    let mut q0_index = vec![usize::MAX; nsub];
    let mut n_q0 = 0;
    for s in 0..nsub {
        if sub_has_q0[s] {
            q0_index[s] = n_q0;
            n_q0 += 1;
        }
    }

    InterfaceLayout {
        partition,
        macros,
        dof_class,
        interface_dofs,
        gamma_index,
        multiplicity,
        sub_interior,
        sub_gamma,
        sub_has_q0,
        q0_index,
        n_q0,
    }
}

impl InterfaceLayout {
    pub fn n_gamma(&self) -> usize {
        self.interface_dofs.len()
    }

    /// Total size of the interface saddle vector (Γ dofs + p0 unknowns).
    pub fn n_interface_system(&self) -> usize {
        self.n_gamma() + self.n_q0
    }
}
