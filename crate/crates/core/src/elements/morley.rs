use nalgebra::DMatrix;

use super::{ElementGeometry, ElementKind, Jet, LocalDof, LocalFrame, MONOMIALS};
use crate::error::{Error, Result};
use crate::mesh::Point;

/// Quadratic Morley basis: vertex values and edge-midpoint normal derivatives.
#[derive(Debug, Clone)]
pub struct MorleyBasis {
    pub geom: ElementGeometry,
    frame: LocalFrame,
    /// Column `j` holds the monomial coefficients of basis function `j`.
    coeffs: DMatrix<f64>,
}

impl MorleyBasis {
    pub fn new(geom: &ElementGeometry) -> Result<Self> {
        let frame = LocalFrame::new(&geom.vertices);
        let dofs = ElementKind::Morley.local_functionals();
        let nodal = DMatrix::from_fn(6, 6, |i, j| {
            let dof = dofs[i];
            let p = match dof {
                LocalDof::Normal(k) => geom.edge_midpoint(k),
                LocalDof::Value(k) | LocalDof::DerivX(k) | LocalDof::DerivY(k) => geom.vertices[k],
            };
            frame.monomial(MONOMIALS[j], p).apply(dof, geom)
        });
        let coeffs = nodal.try_inverse().ok_or(Error::Geometry(0.0))?;
        Ok(Self { geom: *geom, frame, coeffs })
    }

    pub fn eval(&self, p: Point) -> Vec<Jet> {
        (0..6).map(|j| self.frame.poly(self.coeffs.column(j).iter().copied(), p)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elements::{local_stiffness, MaterialParams};

    #[test]
    fn nodal_duality() {
        let geom = ElementGeometry::outward([[0.2, 0.1], [1.0, 0.4], [0.5, 0.9]]);
        let b = MorleyBasis::new(&geom).unwrap();
        let dofs = ElementKind::Morley.local_functionals();
        for (i, &dof) in dofs.iter().enumerate() {
            let p = match dof {
                LocalDof::Normal(k) => geom.edge_midpoint(k),
                LocalDof::Value(k) | LocalDof::DerivX(k) | LocalDof::DerivY(k) => geom.vertices[k],
            };
            let jets = b.eval(p);
            for (j, jet) in jets.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((jet.apply(dof, &geom) - expect).abs() < 1e-12);
            }
        }
    }

    /// Reference-triangle stiffness for σ = 0.3, α = 1, computed symbolically
    /// (exact rational/√2 arithmetic) from the quadratic Morley basis with
    /// normals n0 = (1,1)/√2, n1 = (-1,0), n2 = (0,-1).
    #[test]
    fn reference_triangle_matches_symbolic_oracle() {
        let geom = ElementGeometry::outward([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let k = local_stiffness(ElementKind::Morley, &geom, 1.0, &MaterialParams::new(1.0, 0.3))
            .unwrap()
            .values;
        let expected = REFERENCE_ORACLE;
        for i in 0..6 {
            for j in 0..6 {
                assert!(
                    (k[(i, j)] - expected[i][j]).abs() < 1e-12,
                    "entry ({i},{j}): {} vs {}",
                    k[(i, j)],
                    expected[i][j]
                );
            }
        }
    }

    include!("morley_reference_oracle.rs");
}
