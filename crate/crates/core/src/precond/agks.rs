use std::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::{DMatrix, DVector, Matrix3};

use super::LinearOperator;
use crate::assembly::{BlockPartition, BlockSystem};
use crate::error::{Error, Result};
use crate::krylov::{pcg, PcgOptions, SolveStatus};
use crate::spa::SpaLimits;
use crate::sparse::CsrMatrix;

/// Block preconditioner built from the `m → ∞` limit of the block system:
///
/// ```text
/// B = [I  −K∞† K_HL] [M_HH  0 ] [I          0]
///     [0   I       ] [0     S̃⁻¹] [−K_LH K∞†  I]
/// ```
///
/// with `K∞† = e_H η⁻¹ e_Hᵗ` and the Sherman–Morrison–Woodbury inverse
/// `S̃⁻¹ = M_LL + M_LL v (η − vᵗ M_LL v)⁻¹ vᵗ M_LL` of `S_∞ = K_LL − v η⁻¹ vᵗ`.
/// `M_LL v` is formed once, so each application costs one `M_HH` and one
/// `M_LL` call.
///
/// With [`Coupling::Solved`] the columns `W = K_LL⁻¹ v` are instead solved to
/// tight tolerance at setup and the correction is applied as
/// `W (η − vᵗW)⁻¹ Wᵗ`. `η − vᵗW` is a small difference of large numbers on fine
/// meshes, so errors of a single V-cycle in `M_LL v` get amplified; the solved
/// form makes `S̃⁻¹ − S_∞⁻¹ = M_LL − K_LL⁻¹` and the preconditioner inherits
/// the quality of `M_LL` alone.
pub struct Agks {
    high: Vec<usize>,
    low: Vec<usize>,
    k_hl: CsrMatrix,
    k_lh: CsrMatrix,
    limits: SpaLimits,
    m_hh: Box<dyn LinearOperator>,
    m_ll: Box<dyn LinearOperator>,
    w: DMatrix<f64>,
    coupling: Coupling,
    capacitance_inv: Matrix3<f64>,
    m_hh_calls: AtomicUsize,
    m_ll_calls: AtomicUsize,
}

impl std::fmt::Debug for Agks {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Agks")
            .field("n_high", &self.high.len())
            .field("n_low", &self.low.len())
            .field("capacitance_inv", &self.capacitance_inv)
            .finish_non_exhaustive()
    }
}

/// How the columns `W` of the Sherman–Morrison–Woodbury correction are formed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Coupling {
    /// `W = M_LL v`, one preconditioner application per column.
    VCycle,
    /// `W = K_LL⁻¹ v` by preconditioned CG to relative residual 1e-12.
    #[default]
    Solved,
}

impl Coupling {
    pub fn name(self) -> &'static str {
        match self {
            Coupling::VCycle => "vcycle",
            Coupling::Solved => "solved",
        }
    }
}

impl std::str::FromStr for Coupling {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "vcycle" => Ok(Coupling::VCycle),
            "solved" => Ok(Coupling::Solved),
            _ => Err(format!("unknown coupling `{s}` (expected vcycle or solved)")),
        }
    }
}

impl Agks {
    /// The textbook form, `W = M_LL v`.
    pub fn new(
        part: &BlockPartition,
        blocks: &BlockSystem,
        limits: SpaLimits,
        m_hh: Box<dyn LinearOperator>,
        m_ll: Box<dyn LinearOperator>,
    ) -> Result<Self> {
        Self::with_coupling(part, blocks, limits, m_hh, m_ll, Coupling::VCycle)
    }

    pub fn with_coupling(
        part: &BlockPartition,
        blocks: &BlockSystem,
        limits: SpaLimits,
        m_hh: Box<dyn LinearOperator>,
        m_ll: Box<dyn LinearOperator>,
        coupling: Coupling,
    ) -> Result<Self> {
        if part.is_degenerate() {
            return Err(Error::Partition("the lowly-bending block is empty".into()));
        }
        for (op, n) in [(&m_hh, part.n_high()), (&m_ll, part.n_low())] {
            if op.dim() != n {
                return Err(Error::Dimension { expected: n, got: op.dim() });
            }
        }
        let v = &limits.v;
        let mut w = DMatrix::zeros(v.nrows(), 3);
        for j in 0..3 {
            let vj = v.column(j);
            let col = match coupling {
                Coupling::VCycle => m_ll.apply_vec(vj.as_slice()),
                Coupling::Solved => {
                    let opts = PcgOptions { tol: 1e-12, max_it: 1000, ..PcgOptions::default() };
                    let (x, report) = pcg(&blocks.k_ll, vj.as_slice(), m_ll.as_ref(), &opts)?;
                    if report.status != SolveStatus::Converged {
                        return Err(Error::Capacitance(format!(
                            "coupling solve {} after {} iterations",
                            report.status.label(),
                            report.iterations
                        )));
                    }
                    x
                }
            };
            w.set_column(j, &DVector::from_vec(col));
        }
        let cap: Matrix3<f64> = limits.eta - (v.transpose() * &w).fixed_view::<3, 3>(0, 0);
        let sym = (cap + cap.transpose()) * 0.5;
        let eig = sym.symmetric_eigen().eigenvalues;
        let scale = limits.eta.norm();
        if !(eig.min() > 1e-12 * scale) {
            return Err(Error::Capacitance(format!(
                "symmetric part has eigenvalues {:.3e}, {:.3e}, {:.3e}",
                eig[0], eig[1], eig[2]
            )));
        }
        let capacitance_inv = cap
            .try_inverse()
            .ok_or_else(|| Error::Capacitance("not invertible".into()))?;
        Ok(Self {
            high: part.high.clone(),
            low: part.low.clone(),
            k_hl: blocks.k_hl.clone(),
            k_lh: blocks.k_lh.clone(),
            limits,
            m_hh,
            m_ll,
            w,
            coupling,
            capacitance_inv,
            m_hh_calls: AtomicUsize::new(0),
            m_ll_calls: AtomicUsize::new(0),
        })
    }

    pub fn coupling(&self) -> Coupling {
        self.coupling
    }

    pub fn limits(&self) -> &SpaLimits {
        &self.limits
    }

    /// Number of `(M_HH, M_LL)` applications since construction, setup excluded.
    pub fn subsolve_counts(&self) -> (usize, usize) {
        (self.m_hh_calls.load(Ordering::Relaxed), self.m_ll_calls.load(Ordering::Relaxed))
    }

    /// `S̃⁻¹ t`.
    pub fn schur_inverse(&self, t: &[f64]) -> Vec<f64> {
        self.m_ll_calls.fetch_add(1, Ordering::Relaxed);
        let mut y = self.m_ll.apply_vec(t);
        let proj = match self.coupling {
            Coupling::VCycle => self.limits.v.tr_mul(&DVector::from_column_slice(&y)),
            Coupling::Solved => self.w.tr_mul(&DVector::from_column_slice(t)),
        };
        let c = self.capacitance_inv * proj.fixed_rows::<3>(0);
        let corr = &self.w * c;
        y.iter_mut().zip(corr.iter()).for_each(|(yi, ci)| *yi += ci);
        y
    }

    /// Block form of [`LinearOperator::apply`] on `(r_H, r_L)`.
    pub fn apply_blocks(&self, r_h: &[f64], r_l: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let coupled = self.k_lh.mul_vec(&self.limits.khh_dagger(r_h));
        let t_l: Vec<f64> = r_l.iter().zip(&coupled).map(|(r, c)| r - c).collect();
        self.m_hh_calls.fetch_add(1, Ordering::Relaxed);
        let mut z_h = self.m_hh.apply_vec(r_h);
        let z_l = self.schur_inverse(&t_l);
        let back = self.limits.khh_dagger(&self.k_hl.mul_vec(&z_l));
        z_h.iter_mut().zip(&back).for_each(|(z, b)| *z -= b);
        (z_h, z_l)
    }
}

impl LinearOperator for Agks {
    fn dim(&self) -> usize {
        self.high.len() + self.low.len()
    }

    fn apply(&self, r: &[f64], z: &mut [f64]) {
        let r_h: Vec<f64> = self.high.iter().map(|&i| r[i]).collect();
        let r_l: Vec<f64> = self.low.iter().map(|&i| r[i]).collect();
        let (z_h, z_l) = self.apply_blocks(&r_h, &r_l);
        self.high.iter().zip(&z_h).for_each(|(&i, &v)| z[i] = v);
        self.low.iter().zip(&z_l).for_each(|(&i, &v)| z[i] = v);
    }
}
