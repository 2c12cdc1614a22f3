//! Parameter sweeps: PCG tables over `(level, m)` and asymptotic sweeps of
//! the dense oracles over `m`.

use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;

use crate::assembly::Rhs;
use crate::diagnostics::idealized_condition;
use crate::elements::ElementKind;
use crate::error::{Error, Result};
use crate::krylov::{pcg, PcgOptions, SolveStatus};
use crate::mesh::IslandSpec;
use crate::precond::{Coupling, SmootherSpec, Transfer};
use crate::problem::{PlateProblem, PrecKind};
use crate::spa::{DenseOracle, Observable, SweepPoint};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub kind: ElementKind,
    pub prec: PrecKind,
    pub smoother: SmootherSpec,
    pub levels: Vec<usize>,
    pub ms: Vec<f64>,
    pub sigma: f64,
    pub rhs: Rhs,
    pub island: IslandSpec,
    pub pcg: PcgOptions,
    pub transfer: Transfer,
    pub coupling: Coupling,
}

impl SweepConfig {
    pub fn new(kind: ElementKind, prec: PrecKind, smoother: SmootherSpec) -> Self {
        Self {
            kind,
            prec,
            smoother,
            levels: vec![1, 2, 3, 4],
            ms: default_m_grid(),
            sigma: 0.3,
            rhs: Rhs::default(),
            island: IslandSpec::default(),
            pcg: PcgOptions::default(),
            transfer: Transfer::default(),
            coupling: Coupling::default(),
        }
    }

    /// File stem naming the table, e.g. `agks_hct_sgs_5`.
    pub fn stem(&self) -> String {
        format!(
            "{}_{}_{}_{}",
            self.prec.name(),
            self.kind.name().to_ascii_lowercase(),
            self.smoother.kind.name().to_ascii_lowercase(),
            self.smoother.sweeps
        )
    }
}

/// Every decade from `1` to `1e10`.
pub fn default_m_grid() -> Vec<f64> {
    [0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10].iter().map(|&e| 10f64.powi(e)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub level: usize,
    pub n: usize,
    pub m: f64,
    pub iterations: usize,
    pub status: SolveStatus,
    pub avg_reduction: f64,
    /// Set when the solve ended in a breakdown rather than a classified status.
    pub note: Option<String>,
    /// Relative residuals, starting with `1`; empty after a breakdown.
    pub rr_history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub title: String,
    pub levels: Vec<usize>,
    pub ns: Vec<usize>,
    pub ms: Vec<f64>,
    /// Row-major: `cells[row * ms.len() + col]`.
    pub cells: Vec<Cell>,
}

impl Table {
    pub fn cell(&self, level: usize, m: f64) -> Option<&Cell> {
        self.cells.iter().find(|c| c.level == level && c.m == m)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("level,n,m,iterations,status,avg_reduction\n");
        for c in &self.cells {
            let _ = writeln!(
                s,
                "{},{},{:e},{},{},{:.3}",
                c.level,
                c.n,
                c.m,
                c.iterations,
                c.status.label(),
                c.avg_reduction
            );
        }
        s
    }

    /// One row per PCG iteration of every cell: `level,m,iteration,rr`.
    pub fn history_csv(&self) -> String {
        let mut s = String::from("level,m,iteration,rr\n");
        for c in &self.cells {
            for (i, rr) in c.rr_history.iter().enumerate() {
                let _ = writeln!(s, "{},{:e},{i},{rr:.6e}", c.level, c.m);
            }
        }
        s
    }

    pub fn to_markdown(&self) -> String {
        let mut s = format!("**{}**\n\n| N \\ m |", self.title);
        for m in &self.ms {
            let _ = write!(s, " {} |", format_m(*m));
        }
        s.push_str("\n|---|");
        s.push_str(&"---:|".repeat(self.ms.len()));
        s.push('\n');
        for (row, n) in self.ns.iter().enumerate() {
            let _ = write!(s, "| {n} |");
            for c in &self.cells[row * self.ms.len()..(row + 1) * self.ms.len()] {
                let _ = write!(s, " {} |", format_cell(c));
            }
            s.push('\n');
        }
        s
    }
}

fn format_m(m: f64) -> String {
    let e = m.log10();
    if (e - e.round()).abs() < 1e-12 {
        format!("1e{}", e.round() as i32)
    } else {
        format!("{m:e}")
    }
}

pub fn format_cell(c: &Cell) -> String {
    let red = if c.avg_reduction.is_finite() { format!("{:.3}", c.avg_reduction) } else { "-".into() };
    match c.status {
        SolveStatus::Converged => format!("{}, {red}", c.iterations),
        SolveStatus::Exceeded => format!("60+, {red}"),
        SolveStatus::Stalled => format!("∞, {red}"),
    }
}

/// Runs one PCG solve per `(level, m)`; cells run in parallel on the
/// current rayon pool and are returned in configuration order.
pub fn sweep_experiment(cfg: &SweepConfig) -> Result<Table> {
    let problems = cfg
        .levels
        .par_iter()
        .map(|&l| {
            let mut p = PlateProblem::with_transfer(cfg.kind, l, cfg.island, cfg.sigma, cfg.transfer)?;
            p.coupling = cfg.coupling;
            Ok(p)
        })
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, f64)> =
        (0..problems.len()).flat_map(|row| cfg.ms.iter().map(move |&m| (row, m))).collect();
    let cells = jobs
        .par_iter()
        .map(|&(row, m)| run_cell(&problems[row], cfg, m))
        .collect::<Result<Vec<_>>>()?;
    Ok(Table {
        title: format!(
            "{} + {} + {} + smooth number {}",
            cfg.prec.name().to_ascii_uppercase(),
            cfg.kind.name(),
            cfg.smoother.kind.name(),
            cfg.smoother.sweeps
        ),
        levels: cfg.levels.clone(),
        ns: problems.iter().map(|p| p.n_dofs()).collect(),
        ms: cfg.ms.clone(),
        cells,
    })
}

pub fn run_cell(problem: &PlateProblem, cfg: &SweepConfig, m: f64) -> Result<Cell> {
    let sys = problem.system(m, cfg.rhs)?;
    let prec = problem.preconditioner(&sys.k, cfg.prec, cfg.smoother)?;
    let base = Cell {
        level: problem.level(),
        n: problem.n_dofs(),
        m,
        iterations: 0,
        status: SolveStatus::Stalled,
        avg_reduction: f64::NAN,
        note: None,
        rr_history: Vec::new(),
    };
    match pcg(&sys.k, &sys.b, prec.as_ref(), &cfg.pcg) {
        Ok((_, rep)) => Ok(Cell {
            iterations: rep.iterations,
            status: rep.status,
            avg_reduction: rep.avg_reduction,
            rr_history: rep.rr_history,
            ..base
        }),
        Err(e @ Error::Breakdown { iteration, .. }) => Ok(Cell { iterations: iteration, note: Some(e.to_string()), ..base }),
        Err(e) => Err(e),
    }
}

/// Dense-oracle observables at each contrast value (levels with at most
/// the dense cap of DOF only).
pub fn asymptotic_sweep(problem: &PlateProblem, ms: &[f64], rhs: Rhs) -> Result<Vec<SweepPoint>> {
    let decomp = problem.decomposition()?;
    let part = problem.partition();
    let rows = ms
        .par_iter()
        .map(|&m| -> Result<Vec<SweepPoint>> {
            let sys = problem.system(m, rhs)?;
            let blocks = problem.blocks(&sys.k);
            let oracle = DenseOracle::new(&blocks, decomp, m)?;
            let (x_h, flat, _) = oracle.solve(&part.gather_high(&sys.b), &part.gather_low(&sys.b))?;
            let x_norm = x_h.iter().map(|v| v * v).sum::<f64>().sqrt();
            if x_norm == 0.0 {
                return Err(Error::ZeroVector("x_H"));
            }
            let flat_norm = flat.iter().map(|v| v * v).sum::<f64>().sqrt();
            let point = |observable, value| SweepPoint { m, observable, value };
            Ok(vec![
                point(Observable::KhhInverse, oracle.khh_inverse_deviation()),
                point(Observable::Schur, oracle.schur_deviation()),
                point(Observable::Coupling, oracle.coupling_deviation()),
                point(Observable::Flatness, flat_norm / x_norm),
                point(Observable::Condition, idealized_condition(&blocks, decomp, m)?),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// Writes `<stem>.csv`, `<stem>.md` and the per-solve `<stem>_history.csv`
/// for a table into `dir`.
pub fn write_table(table: &Table, dir: &std::path::Path, stem: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::File::create(dir.join(format!("{stem}.csv")))?.write_all(table.to_csv().as_bytes())?;
    std::fs::File::create(dir.join(format!("{stem}.md")))?.write_all(table.to_markdown().as_bytes())?;
    std::fs::File::create(dir.join(format!("{stem}_history.csv")))?.write_all(table.history_csv().as_bytes())?;
    Ok(())
}
