//! Everything that depends on the mesh hierarchy but not on the contrast:
//! meshes, DOF layouts, partitions, prolongations and the Neumann
//! decomposition of the finest level.

use crate::assembly::{
    assemble, neumann_extract, partition, AssembledSystem, BlockPartition, BlockSystem, NeumannDecomposition, Rhs,
};
use crate::elements::{dof_layout, DofLayout, ElementKind, MaterialParams};
use crate::error::{Error, Result};
use crate::mesh::{build_hierarchy, IslandSpec, MeshLevel};
use crate::precond::{prolongation, restrict_prolongation, Agks, Coupling, Transfer, DenseSolve, Identity, LinearOperator, Multigrid, SmootherSpec};
use crate::spa::{compute_limits, SpaLimits};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrecKind {
    Agks,
    Mg,
    None,
}

impl PrecKind {
    pub fn name(self) -> &'static str {
        match self {
            PrecKind::Agks => "agks",
            PrecKind::Mg => "mg",
            PrecKind::None => "none",
        }
    }
}

impl std::str::FromStr for PrecKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "agks" => Ok(PrecKind::Agks),
            "mg" => Ok(PrecKind::Mg),
            "none" => Ok(PrecKind::None),
            _ => Err(format!("unknown preconditioner `{s}` (expected agks, mg or none)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PlateProblem {
    pub kind: ElementKind,
    pub sigma: f64,
    /// Levels `1..=level`, coarsest first.
    pub meshes: Vec<MeshLevel>,
    pub layouts: Vec<DofLayout>,
    pub partitions: Vec<BlockPartition>,
    /// `prolongations[i]` maps level `i + 1` to level `i + 2`.
    pub prolongations: Vec<CsrMatrix>,
    pub p_hh: Vec<CsrMatrix>,
    pub p_ll: Vec<CsrMatrix>,
    /// Finest level; `None` for an all-H island.
    pub decomposition: Option<NeumannDecomposition>,
    /// How [`PlateProblem::agks`] forms the SMW correction columns.
    pub coupling: Coupling,
}

impl PlateProblem {
    pub fn new(kind: ElementKind, level: usize, island: IslandSpec, sigma: f64) -> Result<Self> {
        Self::with_transfer(kind, level, island, sigma, Transfer::default())
    }

    pub fn with_transfer(kind: ElementKind, level: usize, island: IslandSpec, sigma: f64, transfer: Transfer) -> Result<Self> {
        if level == 0 {
            return Err(Error::Dimension { expected: 1, got: 0 });
        }
        let meshes = build_hierarchy(island, level)?;
        let layouts: Vec<_> = meshes.iter().map(|m| dof_layout(kind, m)).collect();
        let partitions = meshes.iter().map(|m| partition(kind, m)).collect::<Result<Vec<_>>>()?;
        let mut prolongations = Vec::new();
        let (mut p_hh, mut p_ll) = (Vec::new(), Vec::new());
        for i in 1..meshes.len() {
            let p = prolongation(transfer, kind, &meshes[i - 1], &layouts[i - 1], &meshes[i], &layouts[i])?;
            let (pc, pf) = (&partitions[i - 1], &partitions[i]);
            p_hh.push(restrict_prolongation(&p, &layouts[i - 1], &meshes[i], &layouts[i], &pc.high, &pf.high)?);
            p_ll.push(restrict_prolongation(&p, &layouts[i - 1], &meshes[i], &layouts[i], &pc.low, &pf.low)?);
            prolongations.push(p);
        }
        let finest = partitions.last().expect("at least one level");
        let decomposition = if finest.is_degenerate() {
            None
        } else {
            let params = MaterialParams::new(1.0, sigma);
            Some(neumann_extract(kind, meshes.last().unwrap(), finest, &params)?)
        };
        Ok(Self { kind, sigma, meshes, layouts, partitions, prolongations, p_hh, p_ll, decomposition, coupling: Coupling::default() })
    }

    pub fn level(&self) -> usize {
        self.meshes.len()
    }

    pub fn n_dofs(&self) -> usize {
        self.layouts.last().unwrap().len()
    }

    pub fn mesh(&self) -> &MeshLevel {
        self.meshes.last().unwrap()
    }

    pub fn partition(&self) -> &BlockPartition {
        self.partitions.last().unwrap()
    }

    pub fn decomposition(&self) -> Result<&NeumannDecomposition> {
        self.decomposition
            .as_ref()
            .ok_or_else(|| Error::Partition("the lowly-bending block is empty".into()))
    }

    pub fn params(&self, m: f64) -> MaterialParams {
        MaterialParams::new(m, self.sigma)
    }

    pub fn system(&self, m: f64, rhs: Rhs) -> Result<AssembledSystem> {
        assemble(self.kind, self.mesh(), &self.params(m), rhs)
    }

    pub fn blocks(&self, k: &CsrMatrix) -> BlockSystem {
        BlockSystem::split(k, self.partition())
    }

    pub fn limits(&self, blocks: &BlockSystem) -> Result<SpaLimits> {
        compute_limits(blocks, self.decomposition()?, &self.partition().interface)
    }

    /// Multigrid on the full matrix over the whole hierarchy.
    pub fn multigrid(&self, k: &CsrMatrix, smoother: SmootherSpec) -> Result<Multigrid> {
        Multigrid::new(k.clone(), &self.prolongations, smoother)
    }

    pub fn agks(&self, k: &CsrMatrix, smoother: SmootherSpec) -> Result<Agks> {
        let blocks = self.blocks(k);
        let limits = self.limits(&blocks)?;
        let m_hh = Multigrid::new(blocks.k_hh.clone(), &self.p_hh, smoother)?;
        let m_ll = Multigrid::new(blocks.k_ll.clone(), &self.p_ll, smoother)?;
        Agks::with_coupling(self.partition(), &blocks, limits, Box::new(m_hh), Box::new(m_ll), self.coupling)
    }

    /// [`Agks`] with exact dense solves in place of both V-cycles.
    pub fn agks_exact(&self, k: &CsrMatrix) -> Result<Agks> {
        let blocks = self.blocks(k);
        let limits = self.limits(&blocks)?;
        let m_hh = DenseSolve::new(&blocks.k_hh)?;
        let m_ll = DenseSolve::new(&blocks.k_ll)?;
        Agks::new(self.partition(), &blocks, limits, Box::new(m_hh), Box::new(m_ll))
    }

    pub fn preconditioner(&self, k: &CsrMatrix, prec: PrecKind, smoother: SmootherSpec) -> Result<Box<dyn LinearOperator>> {
        Ok(match prec {
            PrecKind::Agks => Box::new(self.agks(k, smoother)?),
            PrecKind::Mg => Box::new(self.multigrid(k, smoother)?),
            PrecKind::None => Box::new(Identity(k.nrows())),
        })
    }
}
