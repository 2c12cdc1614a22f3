//! Structured triangulations of the unit square and their uniform refinements.
//!
//! The coarsest level is a 4×4 grid of squares, each cut along its
//! positive-slope diagonal (32 triangles, 25 vertices, 56 edges). Finer
//! levels come from red refinement: every triangle is split into four by
//! joining its edge midpoints. Vertex numbering is nested: the vertices of
//! level ℓ keep their indices on level ℓ+1 and the midpoint of coarse edge
//! `e` becomes vertex `n_vertices + e`.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Coefficient region of a triangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    /// Highly-bending island, coefficient `m`.
    High,
    /// Lowly-bending background, coefficient 1.
    Low,
}

/// Axis-aligned box of the highly-bending island.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IslandSpec {
    pub min: Point,
    pub max: Point,
}

impl Default for IslandSpec {
    fn default() -> Self {
        Self { min: [0.25, 0.25], max: [0.5, 0.5] }
    }
}

impl IslandSpec {
    pub fn new(min: Point, max: Point) -> Self {
        Self { min, max }
    }

    pub fn whole_square() -> Self {
        Self { min: [0.0, 0.0], max: [1.0, 1.0] }
    }

    fn contains(&self, p: Point) -> bool {
        p[0] >= self.min[0] && p[0] <= self.max[0] && p[1] >= self.min[1] && p[1] <= self.max[1]
    }

    fn validate(&self) -> Result<()> {
        for c in [self.min[0], self.min[1], self.max[0], self.max[1]] {
            let scaled = c * COARSE_CELLS as f64;
            if !(0.0..=COARSE_CELLS as f64).contains(&scaled) || (scaled - scaled.round()).abs() > 1e-12 {
                return Err(Error::Alignment(c));
            }
        }
        if self.max[0] <= self.min[0] || self.max[1] <= self.min[1] {
            return Err(Error::Alignment(self.max[0].min(self.max[1])));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    /// Endpoints, `vertices[0] < vertices[1]`.
    pub vertices: [usize; 2],
    pub midpoint: Point,
    /// Unit normal: the tangent from the lower- to the higher-index vertex
    /// rotated clockwise by 90°.
    pub normal: Point,
    pub length: f64,
}

/// Where a vertex of a refined level comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexOrigin {
    Vertex(usize),
    Midpoint(usize),
}

/// Where an edge of a refined level comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeOrigin {
    /// Half of a coarse edge; `from_vertex` is the coarse endpoint it touches.
    Half { edge: usize, from_vertex: usize },
    /// Edge joining two midpoints inside a coarse triangle, parallel to the
    /// coarse triangle's local edge `local_edge`.
    Interior { triangle: usize, local_edge: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Refinement {
    pub vertex_origin: Vec<VertexOrigin>,
    pub edge_origin: Vec<EdgeOrigin>,
    /// Child triangle → parent triangle.
    pub parent: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshLevel {
    pub vertices: Vec<Point>,
    pub edges: Vec<Edge>,
    /// Counter-clockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    /// Local edge `k` of a triangle is opposite its local vertex `k`.
    pub triangle_edges: Vec<[usize; 3]>,
    pub triangle_region: Vec<Region>,
    pub refinement: Option<Refinement>,
    pub island: IslandSpec,
}

const COARSE_CELLS: usize = 4;

pub fn build_coarse(island: IslandSpec) -> Result<MeshLevel> {
    island.validate()?;
    let n = COARSE_CELLS;
    let h = 1.0 / n as f64;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([i as f64 * h, j as f64 * h]);
        }
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut triangles = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    MeshLevel::from_triangles(vertices, triangles, island, None)
}

fn signed_area(a: Point, b: Point, c: Point) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

impl MeshLevel {
    fn from_triangles(
        vertices: Vec<Point>,
        triangles: Vec<[usize; 3]>,
        island: IslandSpec,
        refinement: Option<Refinement>,
    ) -> Result<Self> {
        let mut edge_ids: HashMap<(usize, usize), usize> = HashMap::new();
        let mut edges = Vec::new();
        let mut triangle_edges = Vec::with_capacity(triangles.len());
        let mut triangle_region = Vec::with_capacity(triangles.len());
        for t in &triangles {
            let area = signed_area(vertices[t[0]], vertices[t[1]], vertices[t[2]]);
            if area <= 0.0 {
                return Err(Error::Geometry(area));
            }
            let mut te = [0; 3];
            for (k, slot) in te.iter_mut().enumerate() {
                let (a, b) = (t[(k + 1) % 3], t[(k + 2) % 3]);
                let key = (a.min(b), a.max(b));
                *slot = *edge_ids.entry(key).or_insert_with(|| {
                    edges.push(make_edge(&vertices, key.0, key.1));
                    edges.len() - 1
                });
            }
            triangle_edges.push(te);
            let c = centroid(&vertices, t);
            triangle_region.push(if island.contains(c) { Region::High } else { Region::Low });
        }
        Ok(Self { vertices, edges, triangles, triangle_edges, triangle_region, refinement, island })
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

    pub fn triangle_points(&self, t: usize) -> [Point; 3] {
        let tri = self.triangles[t];
        [self.vertices[tri[0]], self.vertices[tri[1]], self.vertices[tri[2]]]
    }

    pub fn count_region(&self, region: Region) -> usize {
        self.triangle_region.iter().filter(|&&r| r == region).count()
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        on_boundary(self.vertices[v])
    }

    pub fn is_boundary_edge(&self, e: usize) -> bool {
        let [a, b] = self.edges[e].vertices;
        let (p, q) = (self.vertices[a], self.vertices[b]);
        (0..2).any(|d| (p[d] == 0.0 && q[d] == 0.0) || (p[d] == 1.0 && q[d] == 1.0))
    }

    /// Per-vertex / per-edge membership in the closure of the highly-bending region.
    pub fn closure_of(&self, region: Region) -> (Vec<bool>, Vec<bool>) {
        let mut vs = vec![false; self.n_vertices()];
        let mut es = vec![false; self.n_edges()];
        for (t, tri) in self.triangles.iter().enumerate() {
            if self.triangle_region[t] == region {
                tri.iter().for_each(|&v| vs[v] = true);
                self.triangle_edges[t].iter().for_each(|&e| es[e] = true);
            }
        }
        (vs, es)
    }

    /// Edges shared by a highly- and a lowly-bending triangle.
    pub fn interface_edges(&self) -> Vec<usize> {
        let mut seen: Vec<[bool; 2]> = vec![[false; 2]; self.n_edges()];
        for (t, te) in self.triangle_edges.iter().enumerate() {
            let slot = (self.triangle_region[t] == Region::Low) as usize;
            te.iter().for_each(|&e| seen[e][slot] = true);
        }
        (0..self.n_edges()).filter(|&e| seen[e] == [true, true]).collect()
    }

    /// Uniform red refinement.
    pub fn refine(&self) -> MeshLevel {
        let nv = self.n_vertices();
        let mut vertices = self.vertices.clone();
        vertices.extend(self.edges.iter().map(|e| e.midpoint));
        let mut triangles = Vec::with_capacity(4 * self.n_triangles());
        let mut parent = Vec::with_capacity(4 * self.n_triangles());
        for (t, tri) in self.triangles.iter().enumerate() {
            let te = self.triangle_edges[t];
            // midpoint opposite local vertex k
            let mid = |k: usize| nv + te[k];
            let [a, b, c] = *tri;
            triangles.push([a, mid(2), mid(1)]);
            triangles.push([mid(2), b, mid(0)]);
            triangles.push([mid(1), mid(0), c]);
            triangles.push([mid(0), mid(1), mid(2)]);
            parent.extend([t; 4]);
        }
        let mut fine = MeshLevel::from_triangles(vertices, triangles, self.island, None)
            .expect("red refinement preserves orientation");
        // regions are inherited, which agrees with the centroid test for grid-aligned islands
        fine.triangle_region = parent.iter().map(|&p| self.triangle_region[p]).collect();

        let vertex_origin = (0..fine.n_vertices())
            .map(|v| if v < nv { VertexOrigin::Vertex(v) } else { VertexOrigin::Midpoint(v - nv) })
            .collect();
        let edge_origin = fine
            .edges
            .iter()
            .map(|e| {
                let [a, b] = e.vertices;
                // a < b, so a coarse vertex (if any) comes first
                if a < nv {
                    EdgeOrigin::Half { edge: b - nv, from_vertex: a }
                } else {
                    let (ea, eb) = (a - nv, b - nv);
                    let t = (0..self.n_triangles())
                        .find(|&t| {
                            let te = self.triangle_edges[t];
                            te.contains(&ea) && te.contains(&eb)
                        })
                        .expect("interior edge joins midpoints of one coarse triangle");
                    let te = self.triangle_edges[t];
                    let local_edge = (0..3).find(|&k| te[k] != ea && te[k] != eb).unwrap();
                    EdgeOrigin::Interior { triangle: t, local_edge }
                }
            })
            .collect();
        fine.refinement = Some(Refinement { vertex_origin, edge_origin, parent });
        fine
    }

    /// Plain-text node/edge/element listing, one entity per line.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        writeln!(s, "vertices {}", self.n_vertices()).unwrap();
        for (i, p) in self.vertices.iter().enumerate() {
            writeln!(s, "{i} {} {}", p[0], p[1]).unwrap();
        }
        writeln!(s, "edges {}", self.n_edges()).unwrap();
        for (i, e) in self.edges.iter().enumerate() {
            writeln!(s, "{i} {} {}", e.vertices[0], e.vertices[1]).unwrap();
        }
        writeln!(s, "triangles {}", self.n_triangles()).unwrap();
        for (i, t) in self.triangles.iter().enumerate() {
            let r = match self.triangle_region[i] {
                Region::High => 'H',
                Region::Low => 'L',
            };
            writeln!(s, "{i} {} {} {} {r}", t[0], t[1], t[2]).unwrap();
        }
        s
    }
}

fn on_boundary(p: Point) -> bool {
    p[0] == 0.0 || p[0] == 1.0 || p[1] == 0.0 || p[1] == 1.0
}

fn centroid(vertices: &[Point], t: &[usize; 3]) -> Point {
    let mut c = [0.0; 2];
    for &v in t {
        c[0] += vertices[v][0] / 3.0;
        c[1] += vertices[v][1] / 3.0;
    }
    c
}

fn make_edge(vertices: &[Point], a: usize, b: usize) -> Edge {
    let (p, q) = (vertices[a], vertices[b]);
    let d = [q[0] - p[0], q[1] - p[1]];
    let length = (d[0] * d[0] + d[1] * d[1]).sqrt();
    Edge {
        vertices: [a, b],
        midpoint: [0.5 * (p[0] + q[0]), 0.5 * (p[1] + q[1])],
        normal: [d[1] / length, -d[0] / length],
        length,
    }
}

/// Levels `1..=levels`, coarsest first.
pub fn build_hierarchy(island: IslandSpec, levels: usize) -> Result<Vec<MeshLevel>> {
    let mut out = vec![build_coarse(island)?];
    while out.len() < levels {
        let next = out.last().unwrap().refine();
        out.push(next);
    }
    Ok(out)
}
