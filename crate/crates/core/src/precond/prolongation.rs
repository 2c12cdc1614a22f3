use crate::elements::{DofDescriptor, DofLayout, ElementBasis, ElementKind};
use crate::error::{Error, Result};
use crate::mesh::{EdgeOrigin, MeshLevel, Point, Region, VertexOrigin};
use crate::sparse::{CsrMatrix, TripletBuilder};

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// How coarse-level functions are transferred to the refined level.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum Transfer {
    /// Fine DOF sample the coarse finite element function itself, averaged
    /// over the coarse triangles sharing the sample point.
    #[default]
    Nodal,
    /// Vertex data averaged along edges, normal derivatives from the
    /// linearly interpolated gradient.
    Linear,
}

impl std::str::FromStr for Transfer {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "nodal" => Ok(Transfer::Nodal),
            "linear" => Ok(Transfer::Linear),
            _ => Err(format!("unknown transfer `{s}` (expected nodal or linear)")),
        }
    }
}

/// Prolongation from `coarse` to its red refinement `fine`.
///
/// Either transfer reproduces discrete linear functions. Clamped rows only
/// read clamped columns and free rows never read clamped columns, so
/// Galerkin products keep the clamped DOF decoupled.
pub fn prolongation(
    transfer: Transfer,
    kind: ElementKind,
    coarse: &MeshLevel,
    coarse_layout: &DofLayout,
    fine: &MeshLevel,
    fine_layout: &DofLayout,
) -> Result<CsrMatrix> {
    let p = match transfer {
        Transfer::Nodal => nodal(kind, coarse, coarse_layout, fine, fine_layout)?,
        Transfer::Linear => linear(kind, coarse, coarse_layout, fine, fine_layout)?,
    };
    let mut t = TripletBuilder::new(p.nrows(), p.ncols());
    for (row, col, w) in p.triplets() {
        if fine_layout.constrained[row] == coarse_layout.constrained[col] && w.abs() > 1e-13 {
            t.push(row, col, w);
        }
    }
    Ok(t.build())
}

fn nodal(
    kind: ElementKind,
    coarse: &MeshLevel,
    coarse_layout: &DofLayout,
    fine: &MeshLevel,
    fine_layout: &DofLayout,
) -> Result<CsrMatrix> {
    let refinement = fine
        .refinement
        .as_ref()
        .ok_or_else(|| Error::Prolongation("fine level carries no refinement map".into()))?;
    let bases = (0..coarse.n_triangles())
        .map(|t| ElementBasis::new(kind, &coarse_layout.geometry(coarse, t)))
        .collect::<Result<Vec<_>>>()?;
    let mut edge_triangles = vec![Vec::new(); coarse.n_edges()];
    for (t, te) in coarse.triangle_edges.iter().enumerate() {
        te.iter().for_each(|&e| edge_triangles[e].push(t));
    }
    let mut vertex_triangles = vec![Vec::new(); coarse.n_vertices()];
    for (t, tri) in coarse.triangles.iter().enumerate() {
        tri.iter().for_each(|&v| vertex_triangles[v].push(t));
    }
    // Fine DOF in the closure of the island read the coarse function from
    // island triangles only, so the block P_HH keeps the same reproduction
    // properties as P.
    let (high_vertices, high_edges) = fine.closure_of(Region::High);
    let pick = |tris: &[usize], high: bool| -> Vec<usize> {
        let kept: Vec<usize> = tris.iter().copied().filter(|&t| !high || coarse.triangle_region[t] == Region::High).collect();
        if kept.is_empty() { tris.to_vec() } else { kept }
    };

    let mut out = TripletBuilder::new(fine_layout.len(), coarse_layout.len());
    for (row, dof) in fine_layout.dofs.iter().enumerate() {
        let (point, triangles, direction): (Point, Vec<usize>, Option<Point>) = match *dof {
            DofDescriptor::Value { vertex } | DofDescriptor::DerivX { vertex } | DofDescriptor::DerivY { vertex } => {
                let dir = match dof {
                    DofDescriptor::DerivX { .. } => Some([1.0, 0.0]),
                    DofDescriptor::DerivY { .. } => Some([0.0, 1.0]),
                    _ => None,
                };
                let high = high_vertices[vertex];
                let tris = match refinement.vertex_origin[vertex] {
                    // vertex data is single valued, any one triangle will do
                    VertexOrigin::Vertex(v) => pick(&vertex_triangles[v], high)[..1].to_vec(),
                    VertexOrigin::Midpoint(e) => pick(&edge_triangles[e], high),
                };
                (fine.vertices[vertex], tris, dir)
            }
            DofDescriptor::Normal { edge } => {
                let tris = match refinement.edge_origin[edge] {
                    EdgeOrigin::Half { edge: e, .. } => pick(&edge_triangles[e], high_edges[edge]),
                    EdgeOrigin::Interior { triangle, .. } => vec![triangle],
                };
                (fine.edges[edge].midpoint, tris, Some(fine.edges[edge].normal))
            }
        };
        let share = 1.0 / triangles.len() as f64;
        for t in triangles {
            let dofs = coarse_layout.element_dofs(coarse, t);
            for (jet, &col) in bases[t].eval(point).iter().zip(&dofs) {
                let w = direction.map_or(jet.value, |d| dot(jet.grad, d));
                out.push(row, col, share * w);
            }
        }
    }
    Ok(out.build())
}

/// Vertex data at coarse vertices is copied; values and gradients at edge
/// midpoints are averaged from the endpoints; normal derivatives on fine
/// edges come from the gradient interpolated linearly over the parent
/// (for Morley, the gradient of the P1 interpolant of the vertex values).
fn linear(
    kind: ElementKind,
    coarse: &MeshLevel,
    coarse_layout: &DofLayout,
    fine: &MeshLevel,
    fine_layout: &DofLayout,
) -> Result<CsrMatrix> {
    let refinement = fine
        .refinement
        .as_ref()
        .ok_or_else(|| Error::Prolongation("fine level carries no refinement map".into()))?;
    let hct = kind == ElementKind::Hct;
    let value = |v: usize| coarse_layout.vertex_dof(v, 0);
    // gradient of vertex v along direction d, as (dof, weight) pairs
    let grad_along = |v: usize, d: Point| [(coarse_layout.vertex_dof(v, 1), d[0]), (coarse_layout.vertex_dof(v, 2), d[1])];
    // gradient of the P1 interpolant on coarse triangle t along d
    let p1_grad_along = |t: usize, d: Point| {
        let [a, b, c] = coarse.triangle_points(t);
        let det = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
        let g = [
            [(b[1] - c[1]) / det, (c[0] - b[0]) / det],
            [(c[1] - a[1]) / det, (a[0] - c[0]) / det],
            [(a[1] - b[1]) / det, (b[0] - a[0]) / det],
        ];
        let tri = coarse.triangles[t];
        std::array::from_fn::<_, 3, _>(|i| (value(tri[i]), dot(g[i], d)))
    };

    let mut t = TripletBuilder::new(fine_layout.len(), coarse_layout.len());
    for (row, dof) in fine_layout.dofs.iter().enumerate() {
        let mut entries: Vec<(usize, f64)> = Vec::new();
        match *dof {
            DofDescriptor::Value { vertex } => match refinement.vertex_origin[vertex] {
                VertexOrigin::Vertex(v) => entries.push((value(v), 1.0)),
                VertexOrigin::Midpoint(e) => {
                    for v in coarse.edges[e].vertices {
                        entries.push((value(v), 0.5));
                    }
                }
            },
            DofDescriptor::DerivX { vertex } | DofDescriptor::DerivY { vertex } => {
                let comp = usize::from(matches!(dof, DofDescriptor::DerivY { .. })) + 1;
                match refinement.vertex_origin[vertex] {
                    VertexOrigin::Vertex(v) => entries.push((coarse_layout.vertex_dof(v, comp), 1.0)),
                    VertexOrigin::Midpoint(e) => {
                        for v in coarse.edges[e].vertices {
                            entries.push((coarse_layout.vertex_dof(v, comp), 0.5));
                        }
                    }
                }
            }
            DofDescriptor::Normal { edge } => {
                let nf = fine.edges[edge].normal;
                match refinement.edge_origin[edge] {
                    EdgeOrigin::Half { edge: e, from_vertex } => {
                        let nc = coarse.edges[e].normal;
                        let sign = dot(nf, nc).signum();
                        if hct {
                            entries.push((coarse_layout.edge_dof(e), 0.5 * sign));
                            for (c, w) in grad_along(from_vertex, nc) {
                                entries.push((c, 0.5 * sign * w));
                            }
                        } else {
                            entries.push((coarse_layout.edge_dof(e), sign));
                        }
                    }
                    EdgeOrigin::Interior { triangle, local_edge } => {
                        if hct {
                            let tri = coarse.triangles[triangle];
                            for (i, &v) in tri.iter().enumerate() {
                                let lambda = if i == local_edge { 0.5 } else { 0.25 };
                                for (c, w) in grad_along(v, nf) {
                                    entries.push((c, lambda * w));
                                }
                            }
                        } else {
                            entries.extend(p1_grad_along(triangle, nf));
                        }
                    }
                }
            }
        }
        for (col, w) in entries {
            t.push(row, col, w);
        }
    }
    Ok(t.build())
}

/// `P[fine_rows, coarse_cols]` for nested index sets.
///
/// Every coarse DOF in `coarse_cols` must keep its fine counterparts inside
/// `fine_rows` (the vertex DOF at the same vertex, or both halves of the
/// same edge); otherwise the block hierarchy is not nested.
pub fn restrict_prolongation(
    p: &CsrMatrix,
    coarse: &DofLayout,
    fine: &MeshLevel,
    fine_layout: &DofLayout,
    coarse_cols: &[usize],
    fine_rows: &[usize],
) -> Result<CsrMatrix> {
    let mut in_fine = vec![false; fine_layout.len()];
    fine_rows.iter().for_each(|&i| in_fine[i] = true);
    let refinement = fine
        .refinement
        .as_ref()
        .ok_or_else(|| Error::Prolongation("fine level carries no refinement map".into()))?;
    for &c in coarse_cols {
        let ok = match coarse.dofs[c] {
            DofDescriptor::Value { vertex } => in_fine[fine_layout.vertex_dof(vertex, 0)],
            DofDescriptor::DerivX { vertex } => in_fine[fine_layout.vertex_dof(vertex, 1)],
            DofDescriptor::DerivY { vertex } => in_fine[fine_layout.vertex_dof(vertex, 2)],
            DofDescriptor::Normal { edge } => refinement
                .edge_origin
                .iter()
                .enumerate()
                .filter(|(_, o)| matches!(o, EdgeOrigin::Half { edge: e, .. } if *e == edge))
                .all(|(f, _)| in_fine[fine_layout.edge_dof(f)]),
        };
        if !ok {
            return Err(Error::Prolongation(format!("coarse DOF {c} has no nested fine counterpart")));
        }
    }
    Ok(p.submatrix(fine_rows, coarse_cols))
}
