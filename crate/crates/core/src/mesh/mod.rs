//! Closed triangulated surfaces and their validation.
//!
//! Every mesh entering the solver goes through the same pipeline: edge
//! deduplication, manifold check (each edge borders exactly two triangles),
//! orientation repair by flood fill, and outward-normal normalization per
//! connected component via the signed-volume criterion.

mod gen;
mod io;
mod rt;

pub use gen::{icosphere, two_cubes};
pub use io::{load_mesh, write_off, MeshFormat};
pub use rt::{assemble_pairing, PairingMatrix, RTSpace};

use crate::error::{Error, Result};
use nalgebra::Vector3;
use std::collections::HashMap;

pub type Point = Vector3<f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    /// Vertex indices with `v[0] < v[1]`; the global edge direction runs from
    /// the lower to the higher index.
    pub v: [usize; 2],
    /// The two adjacent triangles; `tris[0]` traverses the edge in its global
    /// direction (the "plus" triangle of the DOF sign convention).
    pub tris: [usize; 2],
}

#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
    pub edges: Vec<Edge>,
    /// Outward unit normal per triangle.
    pub normals: Vec<Point>,
    pub areas: Vec<f64>,
    /// Connected-component id per triangle.
    pub component: Vec<usize>,
    pub n_components: usize,
    /// Mesh width: maximum circumscribed-circle diameter over all triangles.
    pub h: f64,
}

impl SurfaceMesh {
    /// Validate and orient a triangle soup.  Fails on non-manifold or
    /// unorientable input; repairs inconsistent winding and inward normals.
    pub fn new(vertices: Vec<Point>, mut triangles: Vec<[usize; 3]>) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::Mesh("mesh has no triangles".into()));
        }
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= vertices.len() {
                    return Err(Error::Mesh(format!("triangle {t} references missing vertex {v}")));
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(Error::Mesh(format!("triangle {t} is degenerate: {tri:?}")));
            }
        }

        // edge -> incident triangles
        let mut edge_map: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                edge_map.entry(key).or_default().push(t);
            }
        }
        for (&(a, b), ts) in &edge_map {
            if ts.len() != 2 {
                return Err(Error::Mesh(format!(
                    "edge ({a}, {b}) borders {} triangle(s), expected 2 (non-manifold or open surface)",
                    ts.len()
                )));
            }
        }

        // orientation flood fill: neighbors must traverse the shared edge in
        // opposite directions
        let n_tri = triangles.len();
        let mut component = vec![usize::MAX; n_tri];
        let mut n_components = 0;
        let mut flipped = vec![false; n_tri];
        for seed in 0..n_tri {
            if component[seed] != usize::MAX {
                continue;
            }
            let comp = n_components;
            n_components += 1;
            let mut stack = vec![seed];
            component[seed] = comp;
            while let Some(t) = stack.pop() {
                let tri = triangles[t];
                for k in 0..3 {
                    let (a, b) = (tri[k], tri[(k + 1) % 3]);
                    let key = (a.min(b), a.max(b));
                    for &u in &edge_map[&key] {
                        if u == t {
                            continue;
                        }
                        let same_dir = traverses(&triangles[u], a, b);
                        if component[u] == usize::MAX {
                            if same_dir {
                                triangles[u].swap(1, 2);
                                flipped[u] = true;
                            }
                            component[u] = comp;
                            stack.push(u);
                        } else if traverses(&triangles[u], a, b) {
                            return Err(Error::Mesh(format!(
                                "surface is unorientable near edge ({a}, {b})"
                            )));
                        }
                    }
                }
            }
        }

        // outward orientation per component: flip if the signed volume is negative
        let mut signed = vec![0.0f64; n_components];
        for (t, tri) in triangles.iter().enumerate() {
            let (v0, v1, v2) = (vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            signed[component[t]] += v0.cross(&v1).dot(&v2) / 6.0;
        }
        for (t, tri) in triangles.iter_mut().enumerate() {
            if signed[component[t]] < 0.0 {
                tri.swap(1, 2);
            }
        }

        // final edge table with the plus-triangle first
        let mut edges = Vec::with_capacity(edge_map.len());
        let mut keys: Vec<(usize, usize)> = edge_map.keys().copied().collect();
        keys.sort_unstable();
        for key in keys {
            let ts = &edge_map[&key];
            let (a, b) = key;
            let plus_first = traverses(&triangles[ts[0]], a, b);
            let tris = if plus_first { [ts[0], ts[1]] } else { [ts[1], ts[0]] };
            debug_assert!(traverses(&triangles[tris[0]], a, b));
            edges.push(Edge { v: [a, b], tris });
        }

        let mut normals = Vec::with_capacity(n_tri);
        let mut areas = Vec::with_capacity(n_tri);
        let mut h = 0.0f64;
        for tri in &triangles {
            let (v0, v1, v2) = (vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            let cr = (v1 - v0).cross(&(v2 - v0));
            let area2 = cr.norm();
            if area2 <= 0.0 {
                return Err(Error::Mesh(format!("zero-area triangle {tri:?}")));
            }
            normals.push(cr / area2);
            areas.push(area2 / 2.0);
            let (la, lb, lc) = ((v1 - v0).norm(), (v2 - v1).norm(), (v0 - v2).norm());
            h = h.max(la * lb * lc / area2);
        }

        Ok(Self {
            vertices,
            triangles,
            edges,
            normals,
            areas,
            component,
            n_components,
            h,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    /// Euler characteristic `V - E + F` per connected component.
    pub fn euler_characteristics(&self) -> Vec<i64> {
        let mut vset: Vec<std::collections::HashSet<usize>> =
            vec![Default::default(); self.n_components];
        let mut fcount = vec![0i64; self.n_components];
        for (t, tri) in self.triangles.iter().enumerate() {
            fcount[self.component[t]] += 1;
            for &v in tri {
                vset[self.component[t]].insert(v);
            }
        }
        let mut ecount = vec![0i64; self.n_components];
        for e in &self.edges {
            ecount[self.component[e.tris[0]]] += 1;
        }
        (0..self.n_components)
            .map(|c| vset[c].len() as i64 - ecount[c] + fcount[c])
            .collect()
    }

    /// Total signed volume enclosed by the surface (positive for outward
    /// orientation).
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|tri| {
                let (v0, v1, v2) = (
                    self.vertices[tri[0]],
                    self.vertices[tri[1]],
                    self.vertices[tri[2]],
                );
                v0.cross(&v1).dot(&v2) / 6.0
            })
            .sum()
    }

    pub fn centroid(&self, t: usize) -> Point {
        let tri = self.triangles[t];
        (self.vertices[tri[0]] + self.vertices[tri[1]] + self.vertices[tri[2]]) / 3.0
    }

    /// Distance between the closest pair of vertices in different components.
    pub fn component_gap(&self) -> Option<f64> {
        if self.n_components < 2 {
            return None;
        }
        let mut vcomp = vec![usize::MAX; self.vertices.len()];
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                vcomp[v] = self.component[t];
            }
        }
        let mut best = f64::INFINITY;
        for i in 0..self.vertices.len() {
            for j in (i + 1)..self.vertices.len() {
                if vcomp[i] != vcomp[j] {
                    best = best.min((self.vertices[i] - self.vertices[j]).norm());
                }
            }
        }
        Some(best)
    }
}

/// Does `tri` traverse the directed edge (a, b) in this order?
fn traverses(tri: &[usize; 3], a: usize, b: usize) -> bool {
    (0..3).any(|k| tri[k] == a && tri[(k + 1) % 3] == b)
}
