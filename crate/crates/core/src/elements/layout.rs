use super::{ElementGeometry, ElementKind};
use crate::mesh::MeshLevel;

/// What a global degree of freedom measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofDescriptor {
    Value { vertex: usize },
    DerivX { vertex: usize },
    DerivY { vertex: usize },
    Normal { edge: usize },
}

/// Global numbering of one discretization on one mesh level.
///
/// HCT: vertex `v` owns DOF `3v..3v+3` (value, ∂x, ∂y) and edge `e` owns
/// `3·V + e`. Morley: vertex `v` owns `v`, edge `e` owns `V + e`. DOF on the
/// boundary of the unit square are clamped (`u = ∂ₙu = 0`); they stay in the
/// numbering and are decoupled from the system during assembly.
#[derive(Debug, Clone)]
pub struct DofLayout {
    pub kind: ElementKind,
    pub dofs: Vec<DofDescriptor>,
    pub constrained: Vec<bool>,
    n_vertices: usize,
}

impl DofLayout {
    pub fn len(&self) -> usize {
        self.dofs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dofs.is_empty()
    }

    pub fn n_constrained(&self) -> usize {
        self.constrained.iter().filter(|&&c| c).count()
    }

    pub fn vertex_dof(&self, vertex: usize, component: usize) -> usize {
        self.kind.dofs_per_vertex() * vertex + component
    }

    pub fn edge_dof(&self, edge: usize) -> usize {
        self.kind.dofs_per_vertex() * self.n_vertices + edge
    }

    /// Global indices of the local DOF of triangle `t`, in local order.
    pub fn element_dofs(&self, mesh: &MeshLevel, t: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.kind.local_dofs());
        for &v in &mesh.triangles[t] {
            for c in 0..self.kind.dofs_per_vertex() {
                out.push(self.vertex_dof(v, c));
            }
        }
        out.extend(mesh.triangle_edges[t].iter().map(|&e| self.edge_dof(e)));
        out
    }

    /// Element geometry with the global edge normals.
    pub fn geometry(&self, mesh: &MeshLevel, t: usize) -> ElementGeometry {
        let te = mesh.triangle_edges[t];
        ElementGeometry {
            vertices: mesh.triangle_points(t),
            normals: std::array::from_fn(|k| mesh.edges[te[k]].normal),
        }
    }

    /// Values of the linear function `c0 + cx·x + cy·y` in every DOF functional.
    pub fn interpolate_linear(&self, mesh: &MeshLevel, c: [f64; 3]) -> Vec<f64> {
        self.dofs
            .iter()
            .map(|d| match *d {
                DofDescriptor::Value { vertex } => {
                    let p = mesh.vertices[vertex];
                    c[0] + c[1] * p[0] + c[2] * p[1]
                }
                DofDescriptor::DerivX { .. } => c[1],
                DofDescriptor::DerivY { .. } => c[2],
                DofDescriptor::Normal { edge } => {
                    let n = mesh.edges[edge].normal;
                    c[1] * n[0] + c[2] * n[1]
                }
            })
            .collect()
    }
}

pub fn dof_layout(kind: ElementKind, mesh: &MeshLevel) -> DofLayout {
    let mut dofs = Vec::new();
    let mut constrained = Vec::new();
    for v in 0..mesh.n_vertices() {
        let bnd = mesh.is_boundary_vertex(v);
        dofs.push(DofDescriptor::Value { vertex: v });
        constrained.push(bnd);
        if kind == ElementKind::Hct {
            dofs.push(DofDescriptor::DerivX { vertex: v });
            dofs.push(DofDescriptor::DerivY { vertex: v });
            constrained.extend([bnd, bnd]);
        }
    }
    for e in 0..mesh.n_edges() {
        dofs.push(DofDescriptor::Normal { edge: e });
        constrained.push(mesh.is_boundary_edge(e));
    }
    DofLayout { kind, dofs, constrained, n_vertices: mesh.n_vertices() }
}
