use biharm_core::{build_coarse, build_hierarchy, dof_layout, partition, ElementKind, IslandSpec, Region};
use proptest::prelude::*;

#[test]
fn default_hierarchy_entity_counts() {
    let h = build_hierarchy(IslandSpec::default(), 3).unwrap();
    let counts: Vec<_> = h.iter().map(|m| (m.n_vertices(), m.n_edges(), m.n_triangles())).collect();
    assert_eq!(counts, vec![(25, 56, 32), (81, 208, 128), (289, 800, 512)]);
    let high: Vec<_> = h.iter().map(|m| m.count_region(Region::High)).collect();
    assert_eq!(high, vec![2, 8, 32]);
}

#[test]
fn dof_counts_per_level() {
    let h = build_hierarchy(IslandSpec::default(), 4).unwrap();
    for (kind, want) in [(ElementKind::Hct, [131, 451, 1667, 6403]), (ElementKind::Morley, [81, 289, 1089, 4225])] {
        let got: Vec<usize> = h.iter().map(|m| dof_layout(kind, m).len()).collect();
        assert_eq!(got, want, "{kind:?}");
    }
}

#[test]
fn whole_square_island_is_all_high() {
    let m = build_coarse(IslandSpec::whole_square()).unwrap();
    assert_eq!(m.count_region(Region::High), 32);
}

fn aligned_island() -> impl Strategy<Value = IslandSpec> {
    // interior boxes on the coarse grid lines x, y ∈ {1/4, 1/2, 3/4}
    (1..3usize, 1..3usize)
        .prop_flat_map(|(x0, y0)| (Just(x0), Just(y0), x0 + 1..4, y0 + 1..4))
        .prop_map(|(x0, y0, x1, y1)| {
            IslandSpec::new([x0 as f64 / 4.0, y0 as f64 / 4.0], [x1 as f64 / 4.0, y1 as f64 / 4.0])
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn island_area_is_preserved_by_refinement(island in aligned_island()) {
        let area = (island.max[0] - island.min[0]) * (island.max[1] - island.min[1]);
        let h = build_hierarchy(island, 3).unwrap();
        for (l, m) in h.iter().enumerate() {
            let tri_area = 0.5 / (16.0 * 4f64.powi(l as i32));
            prop_assert_eq!(m.count_region(Region::High), (area / tri_area).round() as usize);
        }
    }

    #[test]
    fn partition_splits_every_dof(island in aligned_island(), hct in any::<bool>()) {
        let kind = if hct { ElementKind::Hct } else { ElementKind::Morley };
        let h = build_hierarchy(island, 2).unwrap();
        let part = partition(kind, &h[1]).unwrap();
        let n = dof_layout(kind, &h[1]).len();
        prop_assert_eq!(part.n_high() + part.n_low(), n);
        prop_assert!(part.n_high() > 0 && part.n_low() > 0);
    }
}
