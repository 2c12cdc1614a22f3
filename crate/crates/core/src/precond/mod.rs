//! Preconditioners: multigrid V-cycles and the asymptotic block preconditioner.

mod agks;
mod mg;
mod prolongation;

use nalgebra::{DMatrix, DVector};

pub use agks::{Agks, Coupling};
pub use mg::{Multigrid, MultigridStats, Smoother, SmootherSpec};
pub use prolongation::{prolongation, restrict_prolongation, Transfer};

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;
use crate::DENSE_CAP;

/// An approximation `z = B r` of `A⁻¹ r`.
pub trait LinearOperator: Send + Sync {
    fn dim(&self) -> usize;
    fn apply(&self, r: &[f64], z: &mut [f64]);

    fn apply_vec(&self, r: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; self.dim()];
        self.apply(r, &mut z);
        z
    }
}

/// `B = I`.
#[derive(Debug, Clone, Copy)]
pub struct Identity(pub usize);

impl LinearOperator for Identity {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}

/// Exact solve through a dense Cholesky factor.
#[derive(Debug, Clone)]
pub struct DenseSolve {
    chol: nalgebra::Cholesky<f64, nalgebra::Dyn>,
}

impl DenseSolve {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        if a.nrows() > DENSE_CAP {
            return Err(Error::DenseCap { dim: a.nrows(), cap: DENSE_CAP });
        }
        Self::from_dense(a.to_dense())
    }

    pub fn from_dense(a: DMatrix<f64>) -> Result<Self> {
        let n = a.nrows();
        a.cholesky()
            .map(|chol| Self { chol })
            .ok_or_else(|| Error::Definiteness(format!("dense factorization of a {n}×{n} block failed")))
    }
}

impl LinearOperator for DenseSolve {
    fn dim(&self) -> usize {
        self.chol.l_dirty().nrows()
    }

    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let x = self.chol.solve(&DVector::from_column_slice(r));
        z.copy_from_slice(x.as_slice());
    }
}

/// `z = B r` for an explicitly formed dense `B`.
#[derive(Debug, Clone)]
pub struct DenseOperator(pub DMatrix<f64>);

impl LinearOperator for DenseOperator {
    fn dim(&self) -> usize {
        self.0.nrows()
    }

    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let y = &self.0 * DVector::from_column_slice(r);
        z.copy_from_slice(y.as_slice());
    }
}
