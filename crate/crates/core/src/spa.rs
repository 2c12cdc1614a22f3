//! Limits of the block system as the contrast `m → ∞`, and dense oracles
//! for the rates at which they are approached.
//!
//! With `K_HH(m) = m·N_HH + R` and `N_HH e_H = 0`,
//!
//! * `K_HH(m)⁻¹ → e_H η⁻¹ e_Hᵗ` where `η = e_Hᵗ K_HH e_H`,
//! * `S(m) → S_∞ = K_LL − v η⁻¹ vᵗ` with `v = K_LH e_H`,
//! * `K_LH K_HH(m)⁻¹ → v η⁻¹ e_Hᵗ`,
//!
//! all with `O(m⁻¹)` error. The dense oracles evaluate the deviations
//! through `X = K_HH⁻¹ − e_H η⁻¹ e_Hᵗ`, which solves
//! `K_HH X = I − R e_H η⁻¹ e_Hᵗ`; its right-hand side is orthogonal to the
//! kernel of `N_HH`, so `X` is obtained without cancellation even at
//! `m = 10¹⁰`.

use std::io::Write;

use nalgebra::{DMatrix, DVector, Matrix3};

use crate::dense::spectral_norm_sym;
use crate::assembly::{BlockSystem, NeumannDecomposition};
use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;
use crate::DENSE_CAP;

/// `A·E` for a sparse `A` and a dense `E` with few columns.
pub(crate) fn sparse_times_dense(a: &CsrMatrix, e: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(a.nrows(), e.ncols());
    for j in 0..e.ncols() {
        let col = a.mul_vec(e.column(j).as_slice());
        out.set_column(j, &DVector::from_vec(col));
    }
    out
}

fn symmetric3(m: Matrix3<f64>) -> Matrix3<f64> {
    (m + m.transpose()) * 0.5
}

fn spd_inverse(eta: &Matrix3<f64>) -> Result<Matrix3<f64>> {
    let eig = eta.symmetric_eigen().eigenvalues;
    let (lo, hi) = (eig.min(), eig.max());
    if !(lo > 1e-12 * hi) {
        return Err(Error::SingularEta(lo / hi));
    }
    Ok(eta.cholesky().expect("positive eigenvalues").inverse())
}

#[derive(Debug, Clone)]
pub struct SpaLimits {
    pub e_h: DMatrix<f64>,
    /// `e_Hᵗ K_HH e_H` from the assembled block.
    pub eta: Matrix3<f64>,
    /// `e_Γᵗ K_ΓΓ^(L) e_Γ`: the same matrix from the lowly-bending side of the interface.
    pub eta_interface: Matrix3<f64>,
    pub eta_inv: Matrix3<f64>,
    /// `K_LH e_H`, `n_L × 3`.
    pub v: DMatrix<f64>,
}

pub fn compute_limits(blocks: &BlockSystem, decomp: &NeumannDecomposition, interface: &[usize]) -> Result<SpaLimits> {
    let e_h = decomp.e_h.clone();
    let ke = sparse_times_dense(&blocks.k_hh, &e_h);
    let eta = symmetric3((e_h.transpose() * ke).fixed_view::<3, 3>(0, 0).into_owned());
    let e_g = e_h.select_rows(interface);
    let r_gg = decomp.r.submatrix(interface, interface);
    let eta_interface = symmetric3((e_g.transpose() * sparse_times_dense(&r_gg, &e_g)).fixed_view::<3, 3>(0, 0).into_owned());
    let eta_inv = spd_inverse(&eta)?;
    let v = sparse_times_dense(&blocks.k_lh, &e_h);
    Ok(SpaLimits { e_h, eta, eta_interface, eta_inv, v })
}

impl SpaLimits {
    pub fn n_high(&self) -> usize {
        self.e_h.nrows()
    }

    pub fn n_low(&self) -> usize {
        self.v.nrows()
    }

    /// `K_HH^{∞†} x = e_H η⁻¹ e_Hᵗ x`.
    pub fn khh_dagger(&self, x: &[f64]) -> Vec<f64> {
        let c = self.eta_inv * self.e_h.tr_mul(&DVector::from_column_slice(x)).fixed_rows::<3>(0);
        (&self.e_h * c).as_slice().to_vec()
    }

    /// `S_∞ x = K_LL x − v η⁻¹ vᵗ x`.
    pub fn s_inf(&self, k_ll: &CsrMatrix, x: &[f64]) -> Vec<f64> {
        let c = self.eta_inv * self.v.tr_mul(&DVector::from_column_slice(x)).fixed_rows::<3>(0);
        let low_rank = &self.v * c;
        let mut y = k_ll.mul_vec(x);
        y.iter_mut().zip(low_rank.iter()).for_each(|(yi, li)| *yi -= li);
        y
    }

    /// `P_LH^∞ x = v η⁻¹ e_Hᵗ x`, the limit of `K_LH K_HH(m)⁻¹`.
    pub fn p_inf(&self, x_h: &[f64]) -> Vec<f64> {
        let c = self.eta_inv * self.e_h.tr_mul(&DVector::from_column_slice(x_h)).fixed_rows::<3>(0);
        (&self.v * c).as_slice().to_vec()
    }

    pub fn s_inf_dense(&self, k_ll: &CsrMatrix) -> Result<DMatrix<f64>> {
        guard(k_ll.nrows())?;
        let s = k_ll.to_dense() - &self.v * self.eta_inv * self.v.transpose();
        Ok((&s + s.transpose()) * 0.5)
    }
}

fn guard(n: usize) -> Result<()> {
    if n > DENSE_CAP {
        Err(Error::DenseCap { dim: n, cap: DENSE_CAP })
    } else {
        Ok(())
    }
}

/// Dense quantities of the block system at one contrast value.
#[derive(Debug, Clone)]
pub struct DenseOracle {
    pub m: f64,
    /// `X = K_HH(m)⁻¹ − e_H η⁻¹ e_Hᵗ`.
    pub x: DMatrix<f64>,
    /// `K_LH X K_HL = S_∞ − S(m)`.
    pub schur_gap: DMatrix<f64>,
    pub s_inf: DMatrix<f64>,
    chol_hh: nalgebra::Cholesky<f64, nalgebra::Dyn>,
    eta_r_inv: Matrix3<f64>,
    e_h: DMatrix<f64>,
    k_hl: DMatrix<f64>,
    k_lh: DMatrix<f64>,
}

impl DenseOracle {
    /// `blocks` must be the block system at contrast `m` for `decomp`.
    pub fn new(blocks: &BlockSystem, decomp: &NeumannDecomposition, m: f64) -> Result<Self> {
        let (nh, nl) = (blocks.k_hh.nrows(), blocks.k_ll.nrows());
        guard(nh + nl)?;
        let e_h = &decomp.e_h;
        let r = decomp.r.to_dense();
        let re = &r * e_h;
        let eta_r_inv = spd_inverse(&symmetric3((e_h.transpose() * &re).fixed_view::<3, 3>(0, 0).into_owned()))?;
        let k_hh = decomp.k_hh(m).to_dense();
        let chol_hh = k_hh
            .cholesky()
            .ok_or_else(|| Error::Definiteness(format!("K_HH({m:e}) is not positive definite")))?;
        let f = DMatrix::identity(nh, nh) - &re * eta_r_inv * e_h.transpose();
        let x = chol_hh.solve(&f);
        let x = (&x + x.transpose()) * 0.5;
        let k_hl = blocks.k_hl.to_dense();
        let k_lh = blocks.k_lh.to_dense();
        let gap = &k_lh * &x * &k_hl;
        let schur_gap = (&gap + gap.transpose()) * 0.5;
        let v = &k_lh * e_h;
        let s = blocks.k_ll.to_dense() - &v * eta_r_inv * v.transpose();
        let s_inf = (&s + s.transpose()) * 0.5;
        Ok(Self { m, x, schur_gap, s_inf, chol_hh, eta_r_inv, e_h: e_h.clone(), k_hl, k_lh })
    }

    /// `S(m) = K_LL − K_LH K_HH(m)⁻¹ K_HL`.
    pub fn schur(&self) -> DMatrix<f64> {
        &self.s_inf - &self.schur_gap
    }

    /// `‖K_HH(m)⁻¹ − e_H η⁻¹ e_Hᵗ‖₂`.
    pub fn khh_inverse_deviation(&self) -> f64 {
        spectral_norm_sym(&self.x)
    }

    /// `‖S(m) − S_∞‖₂`.
    pub fn schur_deviation(&self) -> f64 {
        spectral_norm_sym(&self.schur_gap)
    }

    /// `‖K_LH K_HH(m)⁻¹ − v η⁻¹ e_Hᵗ‖₂ = ‖K_LH X‖₂`.
    pub fn coupling_deviation(&self) -> f64 {
        (&self.k_lh * &self.x).singular_values().max()
    }

    /// Solves `K(m) x = b` blockwise; returns `(x_H, (I − e_H e_Hᵗ) x_H, x_L)`.
    ///
    /// The flat-part deviation is formed from `X` directly, so it stays
    /// accurate when it is far below the round-off level of `x_H`.
    pub fn solve(&self, b_h: &[f64], b_l: &[f64]) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let b_h = DVector::from_column_slice(b_h);
        let b_l = DVector::from_column_slice(b_l);
        let dagger = |y: &DVector<f64>| {
            let c = self.eta_r_inv * self.e_h.tr_mul(y).fixed_rows::<3>(0);
            &self.e_h * c
        };
        let khh_inv_bh = dagger(&b_h) + &self.x * &b_h;
        let rhs_l = &b_l - &self.k_lh * &khh_inv_bh;
        let x_l = self
            .schur()
            .cholesky()
            .ok_or_else(|| Error::Definiteness(format!("S({:e}) is not positive definite", self.m)))?
            .solve(&rhs_l);
        let g = &b_h - &self.k_hl * &x_l;
        let x_h = self.chol_hh.solve(&g);
        let xg = &self.x * &g;
        let flat = &xg - &self.e_h * self.e_h.tr_mul(&xg);
        Ok((x_h.as_slice().to_vec(), flat.as_slice().to_vec(), x_l.as_slice().to_vec()))
    }
}

/// `‖(I − e_H e_Hᵗ) x_H‖ / ‖x_H‖`.
pub fn solution_flatness(x_h: &[f64], e_h: &DMatrix<f64>) -> Result<f64> {
    let x = DVector::from_column_slice(x_h);
    let norm = x.norm();
    if norm == 0.0 {
        return Err(Error::ZeroVector("x_H"));
    }
    let flat = &x - e_h * e_h.tr_mul(&x);
    Ok(flat.norm() / norm)
}

/// Observables recorded by an asymptotic sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Observable {
    KhhInverse,
    Schur,
    Coupling,
    Flatness,
    Condition,
}

impl Observable {
    pub fn name(self) -> &'static str {
        match self {
            Observable::KhhInverse => "khh_inverse_deviation",
            Observable::Schur => "schur_deviation",
            Observable::Coupling => "coupling_deviation",
            Observable::Flatness => "solution_flatness",
            Observable::Condition => "idealized_condition",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub m: f64,
    pub observable: Observable,
    pub value: f64,
}

pub fn write_sweep_csv(points: &[SweepPoint], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "m,observable,value")?;
    for p in points {
        writeln!(out, "{:e},{},{:.10e}", p.m, p.observable.name(), p.value)?;
    }
    Ok(())
}

/// Two-decade rate estimate `value(m_hi) / value(m_lo)`.
pub fn ratio(points: &[SweepPoint], observable: Observable, m_lo: f64, m_hi: f64) -> Option<f64> {
    let at = |m: f64| {
        points
            .iter()
            .find(|p| p.observable == observable && (p.m / m - 1.0).abs() < 1e-12)
            .map(|p| p.value)
    };
    Some(at(m_hi)? / at(m_lo)?)
}
