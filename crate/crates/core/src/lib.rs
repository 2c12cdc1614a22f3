//! Finite element discretization of a clamped plate with a highly-bending
//! island, and preconditioned conjugate gradient solvers for it.
//!
//! The stiffness matrix is split into blocks for the highly-bending (H) and
//! lowly-bending (L) degrees of freedom. [`precond::Agks`] uses the limit of
//! that block system as the contrast `m → ∞` to build a robust preconditioner;
//! [`precond::Multigrid`] is the classical baseline.

pub mod assembly;
pub(crate) mod dense;
pub mod diagnostics;
pub mod elements;
pub mod error;
pub mod experiment;
pub mod krylov;
pub mod matrix_market;
pub mod mesh;
pub mod precond;
pub mod problem;
pub mod spa;
pub mod sparse;

pub use assembly::{assemble, neumann_extract, partition, AssembledSystem, BlockPartition, BlockSystem, NeumannDecomposition, Rhs};
pub use elements::{dof_layout, DofLayout, ElementKind, MaterialParams};
pub use error::{Error, Result};
pub use experiment::{sweep_experiment, SweepConfig, Table};
pub use krylov::{pcg, PcgOptions, SolveReport, SolveStatus};
pub use mesh::{build_coarse, build_hierarchy, IslandSpec, MeshLevel, Region};
pub use precond::{Agks, LinearOperator, Multigrid, Smoother, SmootherSpec};
pub use problem::{PlateProblem, PrecKind};
pub use spa::{compute_limits, SpaLimits};
pub use sparse::CsrMatrix;

/// Largest dimension handed to dense factorizations and eigensolvers.
pub const DENSE_CAP: usize = 2000;
