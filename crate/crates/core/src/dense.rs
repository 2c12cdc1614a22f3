use nalgebra::{DMatrix, DVector};

/// Eigenvalues of a symmetric dense matrix, ascending order not guaranteed.
///
/// Exactly-zero rows are deflated before the QR iteration; nalgebra's
/// implicit QR can stall on matrices with many decoupled zero rows and return
/// eigenvalues near zero. The result is checked against the Frobenius norm
/// and retried on a shifted matrix if the check fails.
pub(crate) fn sym_eigenvalues(a: &DMatrix<f64>) -> DVector<f64> {
    let n = a.nrows();
    let active: Vec<usize> = (0..n).filter(|&i| a.row(i).iter().any(|&v| v != 0.0)).collect();
    let mut out = DVector::zeros(n);
    if active.is_empty() {
        return out;
    }
    let sub = a.select_rows(&active).select_columns(&active);
    let fro2 = sub.norm_squared();
    let consistent = |ev: &DVector<f64>| (ev.norm_squared() - fro2).abs() <= 1e-8 * fro2;
    let mut ev = sub.clone().symmetric_eigen().eigenvalues;
    if !consistent(&ev) {
        let shift = fro2.sqrt();
        let k = active.len();
        let shifted = (sub + DMatrix::identity(k, k) * shift).symmetric_eigen().eigenvalues;
        let candidate = shifted.add_scalar(-shift);
        if consistent(&candidate) {
            ev = candidate;
        }
    }
    for (slot, v) in active.iter().zip(ev.iter()) {
        out[*slot] = *v;
    }
    out
}

/// Spectral norm of a symmetric matrix.
pub(crate) fn spectral_norm_sym(a: &DMatrix<f64>) -> f64 {
    sym_eigenvalues(a).amax()
}
