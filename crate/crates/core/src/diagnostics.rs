//! Dense spectral diagnostics: eigenvalue reports for stiffness blocks and
//! condition numbers of preconditioned operators.

use std::io::Write;

use nalgebra::DMatrix;

use crate::assembly::{BlockPartition, BlockSystem, NeumannDecomposition};
use crate::dense::sym_eigenvalues;
use crate::error::{Error, Result};
use crate::spa::DenseOracle;
use crate::sparse::CsrMatrix;
use crate::DENSE_CAP;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scaling {
    Raw,
    /// `D^{-1/2} A D^{-1/2}` with `D = diag(A)`.
    Diagonal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub scaling: Scaling,
    pub m: f64,
}

impl SpectrumReport {
    pub fn median(&self) -> f64 {
        let n = self.eigenvalues.len();
        if n % 2 == 1 {
            self.eigenvalues[n / 2]
        } else {
            0.5 * (self.eigenvalues[n / 2 - 1] + self.eigenvalues[n / 2])
        }
    }

    pub fn count_below(&self, rel: f64) -> usize {
        let t = rel * self.median();
        self.eigenvalues.iter().filter(|&&l| l <= t).count()
    }

    pub fn count_above(&self, rel: f64) -> usize {
        let t = rel * self.median();
        self.eigenvalues.iter().filter(|&&l| l > t).count()
    }

    /// `(negative, near-zero, positive)` counts with `|λ| ≤ tol·max|λ|` as zero.
    pub fn inertia(&self, tol: f64) -> (usize, usize, usize) {
        let t = tol * self.eigenvalues.iter().fold(0.0_f64, |m, l| m.max(l.abs()));
        let neg = self.eigenvalues.iter().filter(|&&l| l < -t).count();
        let pos = self.eigenvalues.iter().filter(|&&l| l > t).count();
        (neg, self.eigenvalues.len() - neg - pos, pos)
    }

    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "index,eigenvalue")?;
        for (i, l) in self.eigenvalues.iter().enumerate() {
            writeln!(out, "{i},{l:.12e}")?;
        }
        Ok(())
    }
}

pub fn spectrum(a: &CsrMatrix, scaling: Scaling, m: f64) -> Result<SpectrumReport> {
    let n = a.nrows();
    if n > DENSE_CAP {
        return Err(Error::DenseCap { dim: n, cap: DENSE_CAP });
    }
    let mut d = a.to_dense();
    if scaling == Scaling::Diagonal {
        let s: Vec<f64> = a
            .diagonal()
            .iter()
            .map(|&x| if x > 0.0 { 1.0 / x.sqrt() } else { 1.0 })
            .collect();
        for j in 0..n {
            for i in 0..n {
                d[(i, j)] *= s[i] * s[j];
            }
        }
    }
    let d = (&d + d.transpose()) * 0.5;
    let mut eigenvalues: Vec<f64> = sym_eigenvalues(&d).iter().copied().collect();
    eigenvalues.sort_by(f64::total_cmp);
    Ok(SpectrumReport { eigenvalues, scaling, m })
}

/// `κ(B K)` for SPD `B` and `K`: eigenvalue ratio of `Lᵗ K L` with `B = L Lᵗ`.
pub fn preconditioned_condition(k: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<f64> {
    let n = k.nrows();
    if n > DENSE_CAP {
        return Err(Error::DenseCap { dim: n, cap: DENSE_CAP });
    }
    let bs = (b + b.transpose()) * 0.5;
    let l = bs
        .cholesky()
        .ok_or_else(|| Error::Definiteness("preconditioner is not positive definite".into()))?
        .unpack();
    let c = l.transpose() * k * &l;
    let ev = sym_eigenvalues(&((&c + c.transpose()) * 0.5));
    let lo = ev.min();
    if !(lo > 0.0) {
        return Err(Error::Definiteness("preconditioned operator is not positive definite".into()));
    }
    Ok(ev.max() / lo)
}

/// The idealized block preconditioner (exact `K_HH⁻¹` and `S_∞⁻¹`) as a
/// dense matrix in the original DOF order.
pub fn idealized_agks_matrix(part: &BlockPartition, blocks: &BlockSystem, oracle: &DenseOracle, e_h: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (nh, nl) = (part.n_high(), part.n_low());
    let n = nh + nl;
    let khh_inv = {
        let k = blocks.k_hh.to_dense();
        k.cholesky()
            .ok_or_else(|| Error::Definiteness("K_HH is not positive definite".into()))?
            .inverse()
    };
    let s_inv = oracle
        .s_inf
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Definiteness("S_∞ is not positive definite".into()))?
        .inverse();
    let eta = e_h.transpose() * &blocks.k_hh.to_dense() * e_h;
    let dagger = e_h * eta.try_inverse().ok_or(Error::SingularEta(0.0))? * e_h.transpose();
    // B = U diag(K_HH⁻¹, S_∞⁻¹) Uᵗ, U = [I, −K∞† K_HL; 0, I]
    let mut u = DMatrix::identity(n, n);
    let coupling = -(&dagger * blocks.k_hl.to_dense());
    u.view_mut((0, nh), (nh, nl)).copy_from(&coupling);
    let mut d = DMatrix::zeros(n, n);
    d.view_mut((0, 0), (nh, nh)).copy_from(&khh_inv);
    d.view_mut((nh, nh), (nl, nl)).copy_from(&s_inv);
    let b_blocks = &u * d * u.transpose();
    let order: Vec<usize> = part.high.iter().chain(&part.low).copied().collect();
    let mut b = DMatrix::zeros(n, n);
    for (a, &i) in order.iter().enumerate() {
        for (c, &j) in order.iter().enumerate() {
            b[(i, j)] = b_blocks[(a, c)];
        }
    }
    Ok(b)
}

/// `κ(B K)` for the idealized block preconditioner, from the block structure.
///
/// The eigenvalues of `B K` are `1 ± s` (and `1`), where `s²` ranges over
/// the generalized eigenvalues of `(S_∞ − S(m), S_∞)`; this avoids forming
/// `B K` and resolves `κ − 1` down to round-off.
pub fn idealized_condition(blocks: &BlockSystem, decomp: &NeumannDecomposition, m: f64) -> Result<f64> {
    let oracle = DenseOracle::new(blocks, decomp, m)?;
    let l = oracle
        .s_inf
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Definiteness("S_∞ is not positive definite".into()))?;
    let linv_gap = l.l().solve_lower_triangular(&oracle.schur_gap).expect("triangular factor is nonsingular");
    let c = l.l().solve_lower_triangular(&linv_gap.transpose()).expect("triangular factor is nonsingular");
    let s2 = sym_eigenvalues(&((&c + c.transpose()) * 0.5)).max().max(0.0);
    let s = s2.sqrt();
    if s >= 1.0 {
        return Err(Error::Definiteness(format!("idealized operator is indefinite (s = {s})")));
    }
    Ok((1.0 + s) / (1.0 - s))
}
