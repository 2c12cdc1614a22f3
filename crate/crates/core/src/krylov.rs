//! Preconditioned conjugate gradients with the stopping and failure rules
//! used for the experiment tables.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::precond::LinearOperator;
use crate::sparse::{axpy, dot, norm2, CsrMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolveStatus {
    Converged,
    /// Not converged within the iteration bound, but still contracting.
    Exceeded,
    /// Stalled or diverging.
    Stalled,
}

impl SolveStatus {
    pub fn label(self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::Exceeded => "60+",
            SolveStatus::Stalled => "inf",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcgOptions {
    pub tol: f64,
    pub max_it: usize,
    /// Replace the recursive residual by `b − K x` every this many iterations.
    pub refresh: usize,
    /// Stall if `rr` has not dropped below `stall_factor · rr` of
    /// `stall_window` iterations earlier.
    pub stall_window: usize,
    pub stall_factor: f64,
    /// Stall once `rr` exceeds this.
    pub blowup: f64,
    /// A run cut off by `max_it` counts as slow convergence (60⁺) when its
    /// average reduction factor is below this, and as a stall otherwise.
    pub contracting: f64,
}

impl Default for PcgOptions {
    fn default() -> Self {
        Self { tol: 1e-7, max_it: 60, refresh: 25, stall_window: 10, stall_factor: 0.999, blowup: 1e3, contracting: 0.995 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    pub status: SolveStatus,
    /// `‖r⁽ⁱ⁾‖₂ / ‖r⁽⁰⁾‖₂`, starting with `1`.
    pub rr_history: Vec<f64>,
    pub avg_reduction: f64,
    pub wall_time: Duration,
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl SolveReport {
    pub fn final_rr(&self) -> f64 {
        *self.rr_history.last().expect("history starts with 1")
    }

    /// Eigenvalues of the Lanczos matrix assembled from the CG coefficients,
    /// ascending; they approximate the spectrum of `B K`.
    pub fn ritz_values(&self) -> Vec<f64> {
        let n = self.alphas.len();
        if n == 0 {
            return Vec::new();
        }
        let mut t = DMatrix::zeros(n, n);
        for j in 0..n {
            t[(j, j)] = 1.0 / self.alphas[j] + if j > 0 { self.betas[j - 1] / self.alphas[j - 1] } else { 0.0 };
            if j + 1 < n {
                let off = self.betas[j].sqrt() / self.alphas[j];
                t[(j, j + 1)] = off;
                t[(j + 1, j)] = off;
            }
        }
        let mut ev: Vec<f64> = SymmetricEigen::new(t).eigenvalues.iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// Solves `K x = b` from `x₀ = 0`.
///
/// Errors only on non-positive curvature `pᵗ K p ≤ 0`; convergence
/// failures are reported through [`SolveReport::status`].
pub fn pcg(k: &CsrMatrix, b: &[f64], prec: &dyn LinearOperator, opts: &PcgOptions) -> Result<(Vec<f64>, SolveReport)> {
    let n = k.nrows();
    if b.len() != n {
        return Err(Error::Dimension { expected: n, got: b.len() });
    }
    if prec.dim() != n {
        return Err(Error::Dimension { expected: n, got: prec.dim() });
    }
    let start = Instant::now();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let r0 = norm2(&r);
    let mut report = SolveReport {
        iterations: 0,
        status: SolveStatus::Converged,
        rr_history: vec![1.0],
        avg_reduction: 0.0,
        wall_time: Duration::ZERO,
        alphas: Vec::new(),
        betas: Vec::new(),
    };
    if r0 == 0.0 {
        report.wall_time = start.elapsed();
        return Ok((x, report));
    }
    let mut z = prec.apply_vec(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut kp = vec![0.0; n];
    let mut status = None;
    for i in 1..=opts.max_it {
        k.mul_vec_into(&p, &mut kp);
        let pkp = dot(&p, &kp);
        if !(pkp > 0.0) {
            return Err(Error::Breakdown { iteration: i, reason: format!("pᵗKp = {pkp:e}") });
        }
        let alpha = rz / pkp;
        axpy(alpha, &p, &mut x);
        if i % opts.refresh == 0 {
            let kx = k.mul_vec(&x);
            r.iter_mut().zip(b.iter().zip(&kx)).for_each(|(ri, (bi, ki))| *ri = bi - ki);
        } else {
            axpy(-alpha, &kp, &mut r);
        }
        let rr = norm2(&r) / r0;
        report.rr_history.push(rr);
        report.alphas.push(alpha);
        report.iterations = i;
        if rr <= opts.tol {
            status = Some(SolveStatus::Converged);
            break;
        }
        let stalled = rr > opts.blowup
            || !rr.is_finite()
            || (i >= opts.stall_window && rr > opts.stall_factor * report.rr_history[i - opts.stall_window]);
        if stalled {
            status = Some(SolveStatus::Stalled);
            break;
        }
        prec.apply(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        report.betas.push(beta);
        rz = rz_new;
        p.iter_mut().zip(&z).for_each(|(pi, zi)| *pi = zi + beta * *pi);
    }
    report.avg_reduction = report.final_rr().powf(1.0 / report.iterations.max(1) as f64);
    report.status = status.unwrap_or(if report.avg_reduction < opts.contracting {
        SolveStatus::Exceeded
    } else {
        SolveStatus::Stalled
    });
    report.wall_time = start.elapsed();
    Ok((x, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::precond::{DenseSolve, Identity};
    use crate::sparse::TripletBuilder;

    fn spd(n: usize) -> CsrMatrix {
        let mut t = TripletBuilder::new(n, n);
        for i in 0..n {
            t.push(i, i, 2.0 + i as f64 * 0.1);
            if i + 1 < n {
                t.push(i, i + 1, -1.0);
                t.push(i + 1, i, -1.0);
            }
        }
        t.build()
    }

    #[test]
    fn exact_preconditioner_takes_one_step() {
        let k = spd(20);
        let b: Vec<f64> = (0..20).map(|i| (i as f64).sin()).collect();
        let (x, rep) = pcg(&k, &b, &DenseSolve::new(&k).unwrap(), &PcgOptions::default()).unwrap();
        assert_eq!(rep.iterations, 1);
        assert_eq!(rep.status, SolveStatus::Converged);
        let r: Vec<f64> = k.mul_vec(&x).iter().zip(&b).map(|(p, q)| p - q).collect();
        assert!(norm2(&r) < 1e-12 * norm2(&b));
    }

    #[test]
    fn average_reduction_matches_history() {
        let k = spd(50);
        let b = vec![1.0; 50];
        let (_, rep) = pcg(&k, &b, &Identity(50), &PcgOptions::default()).unwrap();
        let expect = rep.final_rr().powf(1.0 / rep.iterations as f64);
        assert!((rep.avg_reduction - expect).abs() <= 1e-12);
        assert_eq!(rep.rr_history[0], 1.0);
    }

    #[test]
    fn iteration_cap_classifies_slow_runs() {
        let k = spd(200);
        let b = vec![1.0; 200];
        let opts = PcgOptions { max_it: 5, ..Default::default() };
        let (_, rep) = pcg(&k, &b, &Identity(200), &opts).unwrap();
        assert_eq!(rep.iterations, 5);
        assert_eq!(rep.status, SolveStatus::Exceeded);
    }

    #[test]
    fn indefinite_matrix_breaks_down() {
        let mut t = TripletBuilder::new(2, 2);
        t.push(0, 0, 1.0);
        t.push(1, 1, -1.0);
        let err = pcg(&t.build(), &[1.0, 1.0], &Identity(2), &PcgOptions::default());
        assert!(matches!(err, Err(Error::Breakdown { iteration: 1, .. })));
    }

    #[test]
    fn ritz_values_bracket_the_spectrum() {
        let k = spd(30);
        let ev = k.to_dense().symmetric_eigen().eigenvalues;
        let b: Vec<f64> = (0..30).map(|i| 1.0 + (i as f64 * 0.37).cos()).collect();
        let opts = PcgOptions { tol: 1e-14, max_it: 200, ..Default::default() };
        let (_, rep) = pcg(&k, &b, &Identity(30), &opts).unwrap();
        let ritz = rep.ritz_values();
        assert!((ritz[0] - ev.min()).abs() < 1e-6 * ev.max());
        assert!((ritz[ritz.len() - 1] - ev.max()).abs() < 1e-6 * ev.max());
    }
}
