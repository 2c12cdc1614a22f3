//! Full (12-DOF) Hsieh–Clough–Tocher macro element.
//!
//! The triangle is split at its barycenter into three sub-triangles; the
//! space is the 12-dimensional set of piecewise cubics that are C¹ across the
//! three internal edges. The basis is obtained numerically: the C¹ conditions
//! are imposed on 3×10 monomial coefficients, the null space is extracted by
//! SVD, and the nodal functionals are inverted on that null space.

use nalgebra::{DMatrix, DVector};

use super::{quadrature, ElementGeometry, ElementKind, Jet, LocalDof, LocalFrame, MONOMIALS};
use crate::error::{Error, Result};
use crate::mesh::Point;

const NMONO: usize = 10;

#[derive(Debug, Clone)]
pub struct HctBasis {
    pub geom: ElementGeometry,
    barycenter: Point,
    frame: LocalFrame,
    /// 30×12: rows `10k..10k+10` are the cubic coefficients on sub-triangle `k`.
    coeffs: DMatrix<f64>,
}

impl HctBasis {
    pub fn new(geom: &ElementGeometry) -> Result<Self> {
        let v = geom.vertices;
        let barycenter = [(v[0][0] + v[1][0] + v[2][0]) / 3.0, (v[0][1] + v[1][1] + v[2][1]) / 3.0];
        let frame = LocalFrame::new(&v);
        let mut basis = Self { geom: *geom, barycenter, frame, coeffs: DMatrix::zeros(3 * NMONO, 12) };

        // C¹ conditions across the internal edge barycenter → v_j, shared by
        // sub-triangles j+1 and j+2.
        let mut rows: Vec<DVector<f64>> = Vec::new();
        for j in 0..3 {
            let (a, b) = ((j + 1) % 3, (j + 2) % 3);
            let on_edge = |tau: f64| -> Point {
                [barycenter[0] + tau * (v[j][0] - barycenter[0]), barycenter[1] + tau * (v[j][1] - barycenter[1])]
            };
            for tau in [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0] {
                rows.push(basis.jump_row(a, b, on_edge(tau), |jet| jet.value));
            }
            for tau in [0.0, 0.5, 1.0] {
                let p = on_edge(tau);
                rows.push(basis.jump_row(a, b, p, |jet| jet.grad[0] * frame.h));
                rows.push(basis.jump_row(a, b, p, |jet| jet.grad[1] * frame.h));
            }
        }
        let c = DMatrix::from_fn(rows.len(), 3 * NMONO, |i, j| rows[i][j]);
        let svd = c.svd(false, true);
        let vt = svd.v_t.expect("requested V^T");
        let smax = svd.singular_values.max();
        let null: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] <= 1e-10 * smax)
            .collect();
        if null.len() != 12 {
            return Err(Error::Geometry(quadrature::signed_area(&v)));
        }
        let null_basis = DMatrix::from_fn(3 * NMONO, 12, |i, k| vt[(null[k], i)]);

        // nodal functionals on the null space
        let dofs = ElementKind::Hct.local_functionals();
        let mut d = DMatrix::zeros(12, 3 * NMONO);
        for (i, &dof) in dofs.iter().enumerate() {
            let (sub, p) = match dof {
                LocalDof::Value(k) | LocalDof::DerivX(k) | LocalDof::DerivY(k) => ((k + 1) % 3, v[k]),
                LocalDof::Normal(k) => (k, geom.edge_midpoint(k)),
            };
            for (m, &mono) in MONOMIALS.iter().enumerate() {
                d[(i, 10 * sub + m)] = frame.monomial(mono, p).apply(dof, geom);
            }
        }
        let gram = &d * &null_basis;
        let inv = gram.try_inverse().ok_or(Error::Geometry(quadrature::signed_area(&v)))?;
        basis.coeffs = null_basis * inv;
        Ok(basis)
    }

    fn jump_row(&self, a: usize, b: usize, p: Point, f: impl Fn(&Jet) -> f64) -> DVector<f64> {
        let mut row = DVector::zeros(3 * NMONO);
        for (m, &mono) in MONOMIALS.iter().enumerate() {
            let val = f(&self.frame.monomial(mono, p));
            row[10 * a + m] += val;
            row[10 * b + m] -= val;
        }
        row
    }

    /// Sub-triangle `k`: `(v_{k+1}, v_{k+2}, barycenter)`, counter-clockwise.
    pub fn sub_triangle(&self, k: usize) -> [Point; 3] {
        let v = self.geom.vertices;
        [v[(k + 1) % 3], v[(k + 2) % 3], self.barycenter]
    }

    /// Jets of the 12 basis functions using the cubic of sub-triangle `k`.
    pub fn eval_sub(&self, k: usize, p: Point) -> Vec<Jet> {
        (0..12)
            .map(|j| self.frame.poly((0..NMONO).map(|m| self.coeffs[(10 * k + m, j)]), p))
            .collect()
    }

    /// Sub-triangle containing `p` (the one with the largest minimal barycentric coordinate).
    pub fn locate(&self, p: Point) -> usize {
        (0..3)
            .map(|k| {
                let l = quadrature::barycentric(&self.sub_triangle(k), p);
                (k, l[0].min(l[1]).min(l[2]))
            })
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap()
            .0
    }

    pub fn eval(&self, p: Point) -> Vec<Jet> {
        self.eval_sub(self.locate(p), p)
    }
}
