use biharm_core::diagnostics::{
    idealized_agks_matrix, idealized_condition, preconditioned_condition, spectrum, Scaling,
};
use biharm_core::spa::DenseOracle;
use biharm_core::{pcg, ElementKind, IslandSpec, LinearOperator, PcgOptions, PlateProblem, Rhs, SmootherSpec};
use nalgebra::{DMatrix, DVector};

fn problem(kind: ElementKind, level: usize) -> PlateProblem {
    PlateProblem::new(kind, level, IslandSpec::default(), 0.3).unwrap()
}

fn dense_operator(op: &dyn LinearOperator) -> DMatrix<f64> {
    let n = op.dim();
    let mut b = DMatrix::zeros(n, n);
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        b.set_column(j, &DVector::from_vec(op.apply_vec(&e)));
    }
    b
}

#[test]
fn three_small_eigenvalues_at_high_contrast() {
    let p = problem(ElementKind::Hct, 1);
    let k = p.system(1e10, Rhs::default()).unwrap().k;
    let rep = spectrum(&k, Scaling::Diagonal, 1e10).unwrap();
    assert_eq!(rep.count_below(1e-6), 3);
    assert!(rep.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn unit_contrast_has_no_small_eigenvalues() {
    for kind in [ElementKind::Hct, ElementKind::Morley] {
        let k = problem(kind, 1).system(1.0, Rhs::default()).unwrap().k;
        assert_eq!(spectrum(&k, Scaling::Diagonal, 1.0).unwrap().count_below(1e-6), 0, "{kind:?}");
    }
}

#[test]
fn small_eigenvalues_scale_inversely_with_contrast() {
    let p = problem(ElementKind::Hct, 1);
    let small = |m: f64| {
        let k = p.system(m, Rhs::default()).unwrap().k;
        spectrum(&k, Scaling::Diagonal, m).unwrap().eigenvalues[..3].to_vec()
    };
    let (lo, hi) = (small(1e8), small(1e10));
    for (a, b) in lo.iter().zip(&hi) {
        let r = b / a;
        assert!((1e-2 / 5.0..=5e-2).contains(&r), "{r:e}");
    }
}

#[test]
fn scaling_preserves_inertia() {
    let k = problem(ElementKind::Morley, 1).system(1e6, Rhs::default()).unwrap().k;
    let raw = spectrum(&k, Scaling::Raw, 1e6).unwrap();
    let scaled = spectrum(&k, Scaling::Diagonal, 1e6).unwrap();
    assert_eq!(raw.inertia(0.0), scaled.inertia(0.0));
    assert_eq!(raw.inertia(0.0), (0, 0, k.nrows()));
}

#[test]
fn spectrum_refuses_large_matrices() {
    let k = problem(ElementKind::Hct, 4).system(1.0, Rhs::default()).unwrap().k;
    assert!(spectrum(&k, Scaling::Raw, 1.0).is_err());
}

#[test]
fn spectrum_csv_has_one_row_per_eigenvalue() {
    let k = problem(ElementKind::Morley, 1).system(1.0, Rhs::default()).unwrap().k;
    let rep = spectrum(&k, Scaling::Raw, 1.0).unwrap();
    let mut buf = Vec::new();
    rep.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), k.nrows() + 1);
    assert!(text.starts_with("index,eigenvalue\n0,"));
}

#[test]
fn exact_inverse_has_unit_condition() {
    let k = problem(ElementKind::Hct, 1).system(1e4, Rhs::default()).unwrap().k.to_dense();
    let inv = k.clone().cholesky().unwrap().inverse();
    let kappa = preconditioned_condition(&k, &inv).unwrap();
    assert!((kappa - 1.0).abs() <= 1e-10, "{kappa}");
}

#[test]
fn block_formula_matches_dense_congruence() {
    for kind in [ElementKind::Hct, ElementKind::Morley] {
        let p = problem(kind, 1);
        let d = p.decomposition().unwrap();
        for m in [1e2, 1e4] {
            let k = p.system(m, Rhs::default()).unwrap().k;
            let blocks = p.blocks(&k);
            let oracle = DenseOracle::new(&blocks, d, m).unwrap();
            let b = idealized_agks_matrix(p.partition(), &blocks, &oracle, &d.e_h).unwrap();
            let dense = preconditioned_condition(&k.to_dense(), &b).unwrap();
            let block = idealized_condition(&blocks, d, m).unwrap();
            assert!(((dense - 1.0) / (block - 1.0) - 1.0).abs() <= 0.05, "{kind:?} m={m:e}: {dense} vs {block}");
        }
    }
}

#[test]
fn ritz_estimate_matches_dense_condition() {
    let p = problem(ElementKind::Morley, 2);
    let sys = p.system(1e2, Rhs::Random(3)).unwrap();
    let mg = p.multigrid(&sys.k, SmootherSpec::default()).unwrap();
    let dense = preconditioned_condition(&sys.k.to_dense(), &dense_operator(&mg)).unwrap();
    let opts = PcgOptions { tol: 1e-14, max_it: 200, ..Default::default() };
    let (_, rep) = pcg(&sys.k, &sys.b, &mg, &opts).unwrap();
    let ritz = rep.ritz_values();
    let estimate = ritz[ritz.len() - 1] / ritz[0];
    assert!((estimate / dense - 1.0).abs() <= 0.05, "ritz {estimate} vs dense {dense}");
}

#[test]
fn idealized_condition_improves_with_contrast() {
    let p = problem(ElementKind::Morley, 1);
    let d = p.decomposition().unwrap();
    let kappa = |m: f64| {
        let k = p.system(m, Rhs::default()).unwrap().k;
        idealized_condition(&p.blocks(&k), d, m).unwrap()
    };
    let ks: Vec<f64> = [1e4, 1e6, 1e8].iter().map(|&m| kappa(m)).collect();
    assert!(ks.windows(2).all(|w| w[1] < w[0]), "{ks:?}");
    assert!(ks.iter().all(|&k| k > 1.0));
}
