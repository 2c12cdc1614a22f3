//! Global stiffness assembly, the H/L block partition and the Neumann
//! decomposition `K_HH(m) = m·N_HH + R`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use crate::dense::sym_eigenvalues;
use crate::elements::{
    dof_layout, local_load, stiffness_from_basis, DofDescriptor, DofLayout, ElementBasis, ElementKind,
    MaterialParams,
};
use crate::error::{Error, Result};
use crate::mesh::{MeshLevel, Region};
use crate::sparse::{CsrMatrix, TripletBuilder};
use crate::DENSE_CAP;

/// Right-hand side of `K x = b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Rhs {
    /// Load `f ≡ c` integrated against the basis.
    Constant(f64),
    /// Uniform random entries in `[-1, 1]` on free DOF.
    Random(u64),
}

impl Default for Rhs {
    fn default() -> Self {
        Rhs::Constant(1.0)
    }
}

#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub layout: DofLayout,
    pub k: CsrMatrix,
    pub b: Vec<f64>,
}

/// Element loop over the triangles accepted by `alpha_of`, without boundary conditions.
fn assemble_raw(
    mesh: &MeshLevel,
    layout: &DofLayout,
    sigma: f64,
    alpha_of: impl Fn(Region) -> Option<f64> + Sync,
    load: Option<f64>,
) -> Result<(CsrMatrix, Vec<f64>)> {
    let locals: Vec<_> = (0..mesh.n_triangles())
        .into_par_iter()
        .map(|t| -> Result<Option<(Vec<usize>, DMatrix<f64>, Vec<f64>)>> {
            let Some(alpha) = alpha_of(mesh.triangle_region[t]) else {
                return Ok(None);
            };
            let basis = ElementBasis::new(layout.kind, &layout.geometry(mesh, t))?;
            let ke = stiffness_from_basis(&basis, alpha, sigma);
            let fe = load.map(|f| local_load(&basis, f)).unwrap_or_default();
            Ok(Some((layout.element_dofs(mesh, t), ke, fe)))
        })
        .collect::<Result<_>>()?;

    let n = layout.len();
    let mut trip = TripletBuilder::new(n, n);
    let mut b = vec![0.0; n];
    for (dofs, ke, fe) in locals.into_iter().flatten() {
        for (a, &i) in dofs.iter().enumerate() {
            for (c, &j) in dofs.iter().enumerate() {
                trip.push(i, j, ke[(a, c)]);
            }
            if let Some(f) = fe.get(a) {
                b[i] += f;
            }
        }
    }
    Ok((trip.build(), b))
}

/// Decouples clamped DOF: their rows and columns are cleared except for the diagonal.
fn clamp(k: &CsrMatrix, constrained: &[bool]) -> CsrMatrix {
    let mut t = TripletBuilder::new(k.nrows(), k.ncols());
    for (i, j, v) in k.triplets() {
        if i == j || (!constrained[i] && !constrained[j]) {
            t.push(i, j, v);
        }
    }
    t.build()
}

/// Assembles `K(m)` and `b` with the clamped-plate conditions applied.
pub fn assemble(kind: ElementKind, mesh: &MeshLevel, params: &MaterialParams, rhs: Rhs) -> Result<AssembledSystem> {
    let layout = dof_layout(kind, mesh);
    if layout.n_constrained() == 0 {
        return Err(Error::Definiteness("no clamped DOF, K is singular".into()));
    }
    let m = params.m;
    let load = match rhs {
        Rhs::Constant(f) => Some(f),
        Rhs::Random(_) => None,
    };
    let (k, mut b) = assemble_raw(
        mesh,
        &layout,
        params.sigma,
        |r| Some(if r == Region::High { m } else { 1.0 }),
        load,
    )?;
    let k = clamp(&k, &layout.constrained);
    if let Rhs::Random(seed) = rhs {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        b = (0..layout.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    }
    for (bi, &c) in b.iter_mut().zip(&layout.constrained) {
        if c {
            *bi = 0.0;
        }
    }
    Ok(AssembledSystem { layout, k, b })
}

/// Index sets of the 2×2 block system.
///
/// `high` holds every DOF attached to an entity in the closure of the
/// island (interface included), `low` the rest. Within `high`, positions
/// listed in `interface` belong to entities shared with a lowly-bending
/// triangle; `interior` are the others. Both `interior` and `interface`
/// index into `high`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPartition {
    pub high: Vec<usize>,
    pub low: Vec<usize>,
    pub interior: Vec<usize>,
    pub interface: Vec<usize>,
    /// Global DOF → position in the `[H, L]` ordering.
    pub permutation: Vec<usize>,
}

impl BlockPartition {
    pub fn n_high(&self) -> usize {
        self.high.len()
    }

    pub fn n_low(&self) -> usize {
        self.low.len()
    }

    /// All-H island: the L block is empty.
    pub fn is_degenerate(&self) -> bool {
        self.low.is_empty()
    }

    pub fn gather_high(&self, x: &[f64]) -> Vec<f64> {
        self.high.iter().map(|&i| x[i]).collect()
    }

    pub fn gather_low(&self, x: &[f64]) -> Vec<f64> {
        self.low.iter().map(|&i| x[i]).collect()
    }

    pub fn scatter(&self, xh: &[f64], xl: &[f64], out: &mut [f64]) {
        self.high.iter().zip(xh).for_each(|(&i, &v)| out[i] = v);
        self.low.iter().zip(xl).for_each(|(&i, &v)| out[i] = v);
    }
}

fn entity_flags(layout: &DofLayout, vertices: &[bool], edges: &[bool]) -> Vec<bool> {
    layout
        .dofs
        .iter()
        .map(|d| match *d {
            DofDescriptor::Value { vertex } | DofDescriptor::DerivX { vertex } | DofDescriptor::DerivY { vertex } => {
                vertices[vertex]
            }
            DofDescriptor::Normal { edge } => edges[edge],
        })
        .collect()
}

pub fn partition(kind: ElementKind, mesh: &MeshLevel) -> Result<BlockPartition> {
    let layout = dof_layout(kind, mesh);
    let (hv, he) = mesh.closure_of(Region::High);
    let (lv, le) = mesh.closure_of(Region::Low);
    let in_high = entity_flags(&layout, &hv, &he);
    let in_low = entity_flags(&layout, &lv, &le);
    let high: Vec<usize> = (0..layout.len()).filter(|&i| in_high[i]).collect();
    if high.is_empty() {
        return Err(Error::Partition("no highly-bending DOF".into()));
    }
    let low: Vec<usize> = (0..layout.len()).filter(|&i| !in_high[i]).collect();
    let (interface, interior): (Vec<usize>, Vec<usize>) = (0..high.len()).partition(|&p| in_low[high[p]]);
    let mut permutation = vec![0; layout.len()];
    for (pos, &i) in high.iter().chain(&low).enumerate() {
        permutation[i] = pos;
    }
    Ok(BlockPartition { high, low, interior, interface, permutation })
}

/// The four blocks of `K` under a partition.
#[derive(Debug, Clone)]
pub struct BlockSystem {
    pub k_hh: CsrMatrix,
    pub k_hl: CsrMatrix,
    pub k_lh: CsrMatrix,
    pub k_ll: CsrMatrix,
}

impl BlockSystem {
    pub fn split(k: &CsrMatrix, part: &BlockPartition) -> Self {
        Self {
            k_hh: k.submatrix(&part.high, &part.high),
            k_hl: k.submatrix(&part.high, &part.low),
            k_lh: k.submatrix(&part.low, &part.high),
            k_ll: k.submatrix(&part.low, &part.low),
        }
    }

    /// Reassembles `K` in the original DOF order.
    pub fn reassemble(&self, part: &BlockPartition) -> CsrMatrix {
        let n = part.n_high() + part.n_low();
        let mut t = TripletBuilder::new(n, n);
        let blocks = [
            (&self.k_hh, &part.high, &part.high),
            (&self.k_hl, &part.high, &part.low),
            (&self.k_lh, &part.low, &part.high),
            (&self.k_ll, &part.low, &part.low),
        ];
        for (b, rows, cols) in blocks {
            for (i, j, v) in b.triplets() {
                t.push(rows[i], cols[j], v);
            }
        }
        t.build()
    }
}

/// `K_HH(m) = m·N_HH + R` with the discrete linears spanning `ker N_HH`.
#[derive(Debug, Clone)]
pub struct NeumannDecomposition {
    /// Coefficient-free H block assembled over the island only.
    pub n_hh: CsrMatrix,
    /// Contributions of lowly-bending elements to the H block (interface rows only).
    pub r: CsrMatrix,
    /// Orthonormal `n_H × 3` basis of the discrete `{1, x, y}` on H.
    pub e_h: DMatrix<f64>,
}

impl NeumannDecomposition {
    pub fn k_hh(&self, m: f64) -> CsrMatrix {
        self.n_hh.linear_combination(m, &self.r, 1.0)
    }
}

/// Orthonormal basis of the discrete `{1, x, y}` restricted to the H DOF.
pub fn linear_modes(layout: &DofLayout, mesh: &MeshLevel, part: &BlockPartition) -> DMatrix<f64> {
    let cols: Vec<Vec<f64>> = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
        .iter()
        .map(|&c| part.gather_high(&layout.interpolate_linear(mesh, c)))
        .collect();
    let raw = DMatrix::from_fn(part.n_high(), 3, |i, j| cols[j][i]);
    raw.qr().q()
}

pub fn neumann_extract(
    kind: ElementKind,
    mesh: &MeshLevel,
    part: &BlockPartition,
    params: &MaterialParams,
) -> Result<NeumannDecomposition> {
    let layout = dof_layout(kind, mesh);
    if part.high.iter().any(|&i| layout.constrained[i]) {
        return Err(Error::Partition("island touches the clamped boundary".into()));
    }
    let only = |region| move |r: Region| (r == region).then_some(1.0);
    let (a_high, _) = assemble_raw(mesh, &layout, params.sigma, only(Region::High), None)?;
    let (a_low, _) = assemble_raw(mesh, &layout, params.sigma, only(Region::Low), None)?;
    let a_low = clamp(&a_low, &layout.constrained);
    let n_hh = a_high.submatrix(&part.high, &part.high);
    let r = a_low.submatrix(&part.high, &part.high);
    let e_h = linear_modes(&layout, mesh, part);

    let kernel = kernel_dimension(&n_hh)?;
    if kernel != 3 {
        return Err(Error::Extraction { found: kernel });
    }
    Ok(NeumannDecomposition { n_hh, r, e_h })
}

/// Number of eigenvalues of a symmetric PSD matrix at or below `1e-10·λ_max`.
pub fn kernel_dimension(a: &CsrMatrix) -> Result<usize> {
    if a.nrows() > DENSE_CAP {
        return Err(Error::DenseCap { dim: a.nrows(), cap: DENSE_CAP });
    }
    let eig = sym_eigenvalues(&a.to_dense());
    let lmax = eig.max();
    Ok(eig.iter().filter(|&&l| l <= 1e-10 * lmax).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_coarse, build_hierarchy, IslandSpec};

    #[test]
    fn morley_level1_partition_by_hand() {
        // island square: 4 vertices and 5 edges (4 sides + diagonal)
        let mesh = build_coarse(IslandSpec::default()).unwrap();
        let part = partition(ElementKind::Morley, &mesh).unwrap();
        assert_eq!(part.n_high(), 9);
        assert_eq!(part.interface.len(), 8);
        assert_eq!(part.interior.len(), 1);
        assert_eq!(part.n_low(), 72);
        let hct = partition(ElementKind::Hct, &mesh).unwrap();
        assert_eq!(hct.n_high(), 17);
        assert_eq!(hct.interior.len(), 1);
    }

    #[test]
    fn whole_square_island_is_degenerate() {
        let mesh = build_coarse(IslandSpec::whole_square()).unwrap();
        let part = partition(ElementKind::Morley, &mesh).unwrap();
        assert!(part.is_degenerate());
    }

    #[test]
    fn coupling_block_lives_on_interface_columns() {
        let meshes = build_hierarchy(IslandSpec::default(), 2).unwrap();
        for kind in [ElementKind::Morley, ElementKind::Hct] {
            for mesh in &meshes {
                let sys = assemble(kind, mesh, &MaterialParams::new(1e3, 0.3), Rhs::default()).unwrap();
                let part = partition(kind, mesh).unwrap();
                let blocks = BlockSystem::split(&sys.k, &part);
                for (_, j, v) in blocks.k_lh.triplets() {
                    assert!(v == 0.0 || part.interface.contains(&j));
                }
                assert_eq!(blocks.reassemble(&part), sys.k);
            }
        }
    }

    #[test]
    fn unit_contrast_has_no_region_dependence() {
        let mesh = build_coarse(IslandSpec::default()).unwrap();
        let with_island = assemble(ElementKind::Hct, &mesh, &MaterialParams::default(), Rhs::default()).unwrap();
        let no_island = assemble(
            ElementKind::Hct,
            &build_coarse(IslandSpec::new([0.0, 0.0], [0.25, 0.25])).unwrap(),
            &MaterialParams::default(),
            Rhs::default(),
        )
        .unwrap();
        assert!(with_island.k.max_abs_diff(&no_island.k) <= 1e-14 * with_island.k.max_abs());
    }

    #[test]
    fn decomposition_is_exact_and_r_is_contrast_free() {
        let mesh = &build_hierarchy(IslandSpec::default(), 2).unwrap()[1];
        let part = partition(ElementKind::Morley, mesh).unwrap();
        let r10 = neumann_extract(ElementKind::Morley, mesh, &part, &MaterialParams::new(10.0, 0.3)).unwrap();
        let r1e8 = neumann_extract(ElementKind::Morley, mesh, &part, &MaterialParams::new(1e8, 0.3)).unwrap();
        assert_eq!(r10.r, r1e8.r);
        let m = 1e4;
        let sys = assemble(ElementKind::Morley, mesh, &MaterialParams::new(m, 0.3), Rhs::default()).unwrap();
        let khh = sys.k.submatrix(&part.high, &part.high);
        assert!(khh.max_abs_diff(&r10.k_hh(m)) <= 1e-10 * khh.max_abs());
        // R is supported on interface rows and columns only
        for (i, j, v) in r10.r.triplets() {
            assert!(v == 0.0 || (part.interface.contains(&i) && part.interface.contains(&j)));
        }
    }

    #[test]
    fn random_rhs_is_seeded_and_clamped() {
        let mesh = build_coarse(IslandSpec::default()).unwrap();
        let p = MaterialParams::default();
        let a = assemble(ElementKind::Morley, &mesh, &p, Rhs::Random(7)).unwrap();
        let b = assemble(ElementKind::Morley, &mesh, &p, Rhs::Random(7)).unwrap();
        assert_eq!(a.b, b.b);
        assert!(a.layout.constrained.iter().zip(&a.b).all(|(&c, &v)| !c || v == 0.0));
    }
}
