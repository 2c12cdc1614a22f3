use std::sync::atomic::{AtomicUsize, Ordering};

use super::{DenseSolve, LinearOperator};
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Smoother {
    /// Forward Gauss–Seidel before and after the coarse correction.
    GaussSeidel,
    /// Forward then backward Gauss–Seidel; the resulting V-cycle is symmetric.
    SymmetricGaussSeidel,
}

impl Smoother {
    pub fn name(self) -> &'static str {
        match self {
            Smoother::GaussSeidel => "GS",
            Smoother::SymmetricGaussSeidel => "sGS",
        }
    }
}

impl std::str::FromStr for Smoother {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "gs" => Ok(Smoother::GaussSeidel),
            "sgs" => Ok(Smoother::SymmetricGaussSeidel),
            _ => Err(format!("unknown smoother `{s}` (expected gs or sgs)")),
        }
    }
}

/// `sweeps` pre- and post-smoothing steps per level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SmootherSpec {
    pub kind: Smoother,
    pub sweeps: usize,
}

impl SmootherSpec {
    pub fn new(kind: Smoother, sweeps: usize) -> Self {
        Self { kind, sweeps }
    }
}

impl Default for SmootherSpec {
    fn default() -> Self {
        Self::new(Smoother::SymmetricGaussSeidel, 1)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MultigridStats {
    pub vcycles: usize,
    pub sweeps: usize,
}

#[derive(Debug)]
struct Level {
    a: CsrMatrix,
    inv_diag: Vec<f64>,
    /// Prolongation from the next coarser level.
    p: CsrMatrix,
}

/// Galerkin V-cycle with a dense solve on the coarsest level.
#[derive(Debug)]
pub struct Multigrid {
    /// Finest first; the coarsest level is held by `coarse`.
    levels: Vec<Level>,
    coarse: DenseSolve,
    smoother: SmootherSpec,
    vcycles: AtomicUsize,
    sweeps: AtomicUsize,
}

impl Multigrid {
    /// `prolongations[i]` maps level `i` to level `i + 1`, the last one
    /// ending at `fine`. With no prolongations the cycle is a direct solve.
    pub fn new(fine: CsrMatrix, prolongations: &[CsrMatrix], smoother: SmootherSpec) -> Result<Self> {
        let mut levels = Vec::with_capacity(prolongations.len());
        let mut a = fine;
        for p in prolongations.iter().rev() {
            if p.nrows() != a.nrows() {
                return Err(Error::Dimension { expected: a.nrows(), got: p.nrows() });
            }
            let inv_diag = a
                .diagonal()
                .iter()
                .enumerate()
                .map(|(i, &d)| {
                    if d > 0.0 {
                        Ok(1.0 / d)
                    } else {
                        Err(Error::Definiteness(format!("non-positive diagonal {d} at row {i}")))
                    }
                })
                .collect::<Result<_>>()?;
            let coarse = a.galerkin(p);
            levels.push(Level { a, inv_diag, p: p.clone() });
            a = coarse;
        }
        let coarse = DenseSolve::new(&a)?;
        Ok(Self { levels, coarse, smoother, vcycles: AtomicUsize::new(0), sweeps: AtomicUsize::new(0) })
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len() + 1
    }

    /// Operator on level `l`, counted from the finest (`0`).
    pub fn operator(&self, l: usize) -> Option<&CsrMatrix> {
        self.levels.get(l).map(|lv| &lv.a)
    }

    pub fn stats(&self) -> MultigridStats {
        MultigridStats { vcycles: self.vcycles.load(Ordering::Relaxed), sweeps: self.sweeps.load(Ordering::Relaxed) }
    }

    pub fn reset_stats(&self) {
        self.vcycles.store(0, Ordering::Relaxed);
        self.sweeps.store(0, Ordering::Relaxed);
    }

    fn smooth(&self, lv: &Level, b: &[f64], x: &mut [f64]) {
        for _ in 0..self.smoother.sweeps {
            gauss_seidel(&lv.a, &lv.inv_diag, b, x, false);
            if self.smoother.kind == Smoother::SymmetricGaussSeidel {
                gauss_seidel(&lv.a, &lv.inv_diag, b, x, true);
            }
        }
        self.sweeps.fetch_add(self.smoother.sweeps, Ordering::Relaxed);
    }

    fn cycle(&self, l: usize, b: &[f64], x: &mut [f64]) {
        let Some(lv) = self.levels.get(l) else {
            self.coarse.apply(b, x);
            return;
        };
        x.fill(0.0);
        self.smooth(lv, b, x);
        let mut r = lv.a.mul_vec(x);
        r.iter_mut().zip(b).for_each(|(ri, bi)| *ri = bi - *ri);
        let rc = lv.p.tr_mul_vec(&r);
        let mut ec = vec![0.0; rc.len()];
        self.cycle(l + 1, &rc, &mut ec);
        let e = lv.p.mul_vec(&ec);
        x.iter_mut().zip(&e).for_each(|(xi, ei)| *xi += ei);
        self.smooth(lv, b, x);
    }
}

fn gauss_seidel(a: &CsrMatrix, inv_diag: &[f64], b: &[f64], x: &mut [f64], backward: bool) {
    let (rp, ci, vals) = (a.row_ptr(), a.col_idx(), a.values());
    let sweep = |i: usize, x: &mut [f64]| {
        let mut s = b[i];
        for k in rp[i]..rp[i + 1] {
            if ci[k] != i {
                s -= vals[k] * x[ci[k]];
            }
        }
        x[i] = s * inv_diag[i];
    };
    if backward {
        (0..a.nrows()).rev().for_each(|i| sweep(i, x));
    } else {
        (0..a.nrows()).for_each(|i| sweep(i, x));
    }
}

impl LinearOperator for Multigrid {
    fn dim(&self) -> usize {
        self.levels.first().map_or_else(|| self.coarse.dim(), |lv| lv.a.nrows())
    }

    fn apply(&self, r: &[f64], z: &mut [f64]) {
        self.vcycles.fetch_add(1, Ordering::Relaxed);
        self.cycle(0, r, z);
    }
}
