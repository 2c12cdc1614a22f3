use std::fs::File;
use std::io::BufReader;

use biharm_core::experiment::{default_m_grid, write_table};
use biharm_core::matrix_market::{read_matrix_market, write_matrix_market};
use biharm_core::{
    sweep_experiment, CsrMatrix, ElementKind, IslandSpec, PlateProblem, PrecKind, Rhs, Smoother, SmootherSpec,
    SweepConfig,
};

fn bits(a: &CsrMatrix) -> Vec<(usize, usize, u64)> {
    a.triplets().map(|(i, j, v)| (i, j, v.to_bits())).collect()
}

#[test]
fn matrix_market_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    for kind in [ElementKind::Hct, ElementKind::Morley] {
        let p = PlateProblem::new(kind, 2, IslandSpec::default(), 0.3).unwrap();
        let k = p.system(1e7, Rhs::Random(42)).unwrap().k;
        let blocks = p.blocks(&k);
        for (name, a) in [("k", &k), ("k_hh", &blocks.k_hh), ("k_ll", &blocks.k_ll), ("k_lh", &blocks.k_lh)] {
            let path = dir.path().join(format!("{}_{name}.mtx", kind.name()));
            write_matrix_market(a, File::create(&path).unwrap()).unwrap();
            let back = read_matrix_market(BufReader::new(File::open(&path).unwrap())).unwrap();
            assert_eq!((back.nrows(), back.ncols()), (a.nrows(), a.ncols()), "{name}");
            assert_eq!(bits(&back), bits(a), "{kind:?} {name}");
        }
    }
}

#[test]
fn malformed_matrix_market_is_rejected() {
    for text in ["", "%%MatrixMarket matrix array real general\n1 1\n1\n", "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n"] {
        assert!(read_matrix_market(text.as_bytes()).is_err(), "{text:?}");
    }
}

fn small_config() -> SweepConfig {
    let mut cfg = SweepConfig::new(ElementKind::Morley, PrecKind::Agks, SmootherSpec::new(Smoother::SymmetricGaussSeidel, 1));
    cfg.levels = vec![1, 2];
    cfg.ms = vec![1.0, 1e5, 1e10];
    cfg
}

#[test]
fn empty_contrast_list_gives_empty_table() {
    let mut cfg = small_config();
    cfg.ms.clear();
    let t = sweep_experiment(&cfg).unwrap();
    assert!(t.cells.is_empty());
    assert_eq!(t.to_csv().lines().count(), 1);
}

#[test]
fn sweep_output_is_deterministic() {
    let cfg = small_config();
    let (a, b) = (sweep_experiment(&cfg).unwrap(), sweep_experiment(&cfg).unwrap());
    assert_eq!(a.to_csv(), b.to_csv());
    let dir = tempfile::tempdir().unwrap();
    write_table(&a, dir.path(), "x").unwrap();
    write_table(&b, dir.path(), "y").unwrap();
    let read = |name: &str| std::fs::read(dir.path().join(name)).unwrap();
    assert_eq!(read("x.csv"), read("y.csv"));
    assert_eq!(read("x.md"), read("y.md"));
}

#[test]
fn table_layout_follows_levels_and_contrasts() {
    let t = sweep_experiment(&small_config()).unwrap();
    assert_eq!(t.ns, vec![81, 289]);
    let order: Vec<(usize, f64)> = t.cells.iter().map(|c| (c.level, c.m)).collect();
    assert_eq!(order, vec![(1, 1.0), (1, 1e5), (1, 1e10), (2, 1.0), (2, 1e5), (2, 1e10)]);
    let md = t.to_markdown();
    assert!(md.contains("| N \\ m | 1e0 | 1e5 | 1e10 |"), "{md}");
    let row = md.lines().find(|l| l.starts_with("| 81 |")).unwrap();
    let c = t.cell(1, 1e5).unwrap();
    assert!(row.contains(&format!(" {}, {:.3} |", c.iterations, c.avg_reduction)), "{row}");
}

#[test]
fn default_grid_spans_ten_decades() {
    let g = default_m_grid();
    assert_eq!(g.len(), 11);
    assert_eq!((g[0], g[10]), (1.0, 1e10));
}
