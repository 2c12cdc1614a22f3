//! `biharm`: experiment driver for the high-contrast plate solvers.

mod parse;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use biharm_core::diagnostics::{spectrum, Scaling};
use biharm_core::experiment::{asymptotic_sweep, write_table};
use biharm_core::matrix_market::write_matrix_market;
use biharm_core::precond::{Coupling, Transfer};
use biharm_core::spa::{ratio, write_sweep_csv, Observable};
use biharm_core::{
    sweep_experiment, ElementKind, IslandSpec, PcgOptions, PlateProblem, PrecKind, Rhs, Smoother, SmootherSpec,
    SweepConfig,
};
use clap::{Args, Parser, Subcommand, ValueEnum};

// aliases keep clap from treating these as repeated single values
type LevelList = Vec<usize>;
type ContrastList = Vec<f64>;

const SUBCOMMANDS: [&str; 5] = ["run", "spa", "spectrum", "export", "mesh"];

#[derive(Parser)]
#[command(name = "biharm", version, about = "High-contrast biharmonic plate solvers")]
#[command(args_override_self = true)]
struct Cli {
    /// Worker threads for independent cells (default: all cores).
    #[arg(long, global = true, env = "BIHARM_WORKERS")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// PCG iteration tables over levels and contrasts.
    Run(RunArgs),
    /// Dense asymptotic sweep of the block limits.
    Spa(SpaArgs),
    /// Dense eigenvalues of the stiffness matrix or a sub-block.
    Spectrum(SpectrumArgs),
    /// Matrix Market files for K and its blocks.
    Export(ExportArgs),
    /// Text dump of a mesh level.
    Mesh(MeshArgs),
}

#[derive(Args, Clone)]
struct ProblemArgs {
    /// Discretization: hct or morley.
    #[arg(long, default_value = "morley")]
    disc: ElementKind,

    /// Poisson ratio.
    #[arg(long, default_value_t = 0.3)]
    sigma: f64,

    /// Highly-bending island `x0,y0,x1,y1`, on the coarse grid lines.
    #[arg(long, value_parser = parse::island)]
    island: Option<[f64; 4]>,

    /// Load: constant (f ≡ 1) or random (seeded by --seed).
    #[arg(long, value_enum, default_value_t = RhsKind::Constant)]
    rhs: RhsKind,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Largest level accepted (memory guard).
    #[arg(long, default_value_t = 4)]
    max_level: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum RhsKind {
    Constant,
    Random,
}

impl ProblemArgs {
    fn island(&self) -> IslandSpec {
        self.island.map_or_else(IslandSpec::default, |[x0, y0, x1, y1]| IslandSpec::new([x0, y0], [x1, y1]))
    }

    fn rhs(&self) -> Rhs {
        match self.rhs {
            RhsKind::Constant => Rhs::Constant(1.0),
            RhsKind::Random => Rhs::Random(self.seed),
        }
    }

    fn check_levels(&self, levels: &[usize]) -> Result<(), Failure> {
        match levels.iter().find(|&&l| l > self.max_level) {
            Some(l) => Err(Failure::Usage(format!("level {l} is above --max-level {}", self.max_level))),
            None => Ok(()),
        }
    }

    fn problem(&self, level: usize, transfer: Transfer) -> Result<PlateProblem, Failure> {
        self.check_levels(&[level])?;
        Ok(PlateProblem::with_transfer(self.disc, level, self.island(), self.sigma, transfer)?)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    problem: ProblemArgs,

    /// Preconditioner: agks, mg or none.
    #[arg(long, default_value = "agks")]
    prec: PrecKind,

    /// Smoothers, comma separated: gs, sgs.
    #[arg(long, value_delimiter = ',', default_value = "sgs")]
    smoother: Vec<Smoother>,

    /// Smoothing sweeps per V-cycle side, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    sweeps: Vec<usize>,

    /// Levels, e.g. `1..4` or `2,3`.
    #[arg(long, default_value = "1..4", value_parser = parse::levels)]
    levels: LevelList,

    /// Contrasts, e.g. `1e0..1e10` (every decade) or `1e5,1e7`.
    #[arg(long, default_value = "1e0..1e10", value_parser = parse::contrasts)]
    m: ContrastList,

    #[arg(long, default_value_t = 1e-7)]
    tol: f64,

    #[arg(long, default_value_t = 60)]
    max_it: usize,

    /// Prolongation: nodal or linear.
    #[arg(long, default_value = "nodal")]
    transfer: Transfer,

    /// SMW coupling of the Schur solve: solved or vcycle.
    #[arg(long, default_value = "solved")]
    coupling: Coupling,

    /// Output directory.
    #[arg(long, default_value = "results")]
    out: PathBuf,

    /// Also write K, K_HH, K_LL and K_LH of every cell.
    #[arg(long)]
    export_matrices: bool,
}

#[derive(Args)]
struct SpaArgs {
    #[command(flatten)]
    problem: ProblemArgs,

    #[arg(long, default_value_t = 1)]
    level: usize,

    #[arg(long, default_value = "1e0..1e10", value_parser = parse::contrasts)]
    m: ContrastList,

    #[arg(long, default_value = "results")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Block {
    Full,
    Hh,
    Ll,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScalingArg {
    Raw,
    Diagonal,
}

#[derive(Args)]
struct SpectrumArgs {
    #[command(flatten)]
    problem: ProblemArgs,

    #[arg(long, default_value_t = 1)]
    level: usize,

    #[arg(long, default_value = "1e10", value_parser = parse::contrasts)]
    m: ContrastList,

    #[arg(long, value_enum, default_value_t = ScalingArg::Diagonal)]
    scaling: ScalingArg,

    #[arg(long, value_enum, default_value_t = Block::Full)]
    block: Block,

    /// Eigenvalues at most this times the median are counted as small.
    #[arg(long, default_value_t = 1e-6)]
    threshold: f64,

    #[arg(long, default_value = "results")]
    out: PathBuf,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    problem: ProblemArgs,

    #[arg(long, default_value_t = 1)]
    level: usize,

    #[arg(long, default_value = "1e4", value_parser = parse::contrasts)]
    m: ContrastList,

    #[arg(long, default_value = "results")]
    out: PathBuf,
}

#[derive(Args)]
struct MeshArgs {
    #[arg(long, default_value_t = 1)]
    level: usize,

    #[arg(long, value_parser = parse::island)]
    island: Option<[f64; 4]>,

    /// Write to a file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Internal(String),
}

impl From<biharm_core::Error> for Failure {
    fn from(e: biharm_core::Error) -> Self {
        match e {
            biharm_core::Error::Alignment(_) | biharm_core::Error::Partition(_) => Failure::Usage(e.to_string()),
            _ => Failure::Internal(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Internal(e.to_string())
    }
}

fn main() -> ExitCode {
    let args = match parse::expand_config(std::env::args().collect(), &SUBCOMMANDS) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    // clap exits with 2 on usage errors and 0 for --help
    let cli = Cli::parse_from(args);
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.workers {
        if n == 0 {
            eprintln!("error: --workers must be positive");
            return ExitCode::from(2);
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    };
    match pool.install(|| dispatch(cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run(a) => run(a),
        Command::Spa(a) => spa(a),
        Command::Spectrum(a) => spectrum_cmd(a),
        Command::Export(a) => export(a),
        Command::Mesh(a) => mesh(a),
    }
}

fn run(a: RunArgs) -> Result<(), Failure> {
    a.problem.check_levels(&a.levels)?;
    if a.sweeps.contains(&0) {
        return Err(Failure::Usage("--sweeps must be positive".into()));
    }
    if !(a.tol > 0.0) || a.max_it == 0 {
        return Err(Failure::Usage("--tol and --max-it must be positive".into()));
    }
    for &smoother in &a.smoother {
        for &sweeps in &a.sweeps {
            let mut cfg = SweepConfig::new(a.problem.disc, a.prec, SmootherSpec::new(smoother, sweeps));
            cfg.levels = a.levels.clone();
            cfg.ms = a.m.clone();
            cfg.sigma = a.problem.sigma;
            cfg.rhs = a.problem.rhs();
            cfg.island = a.problem.island();
            cfg.pcg = PcgOptions { tol: a.tol, max_it: a.max_it, ..Default::default() };
            cfg.transfer = a.transfer;
            cfg.coupling = a.coupling;
            let table = sweep_experiment(&cfg)?;
            let stem = cfg.stem();
            write_table(&table, &a.out, &stem)?;
            println!("{}", table.to_markdown());
            for c in table.cells.iter().filter(|c| c.note.is_some()) {
                eprintln!("note: level {} m={:e}: {}", c.level, c.m, c.note.as_deref().unwrap_or_default());
            }
            if a.prec == PrecKind::Mg && smoother == Smoother::GaussSeidel {
                eprintln!("note: plain Gauss-Seidel makes the V-cycle nonsymmetric; PCG is run regardless");
            }
        }
    }
    if a.export_matrices {
        for &level in &a.levels {
            let p = a.problem.problem(level, a.transfer)?;
            for &m in &a.m {
                export_blocks(&p, m, a.problem.rhs(), &a.out.join("matrices"))?;
            }
        }
    }
    Ok(())
}

fn spa(a: SpaArgs) -> Result<(), Failure> {
    let p = a.problem.problem(a.level, Transfer::default())?;
    let points = asymptotic_sweep(&p, &a.m, a.problem.rhs())?;
    std::fs::create_dir_all(&a.out)?;
    let path = a.out.join(format!("spa_{}_l{}.csv", a.problem.disc.name().to_ascii_lowercase(), a.level));
    write_sweep_csv(&points, BufWriter::new(File::create(&path)?))?;
    let obs = [Observable::KhhInverse, Observable::Schur, Observable::Coupling, Observable::Flatness, Observable::Condition];
    println!("m,{}", obs.map(|o| o.name()).join(","));
    for &m in &a.m {
        let row: Vec<String> = obs
            .iter()
            .map(|&o| {
                points.iter().find(|q| q.m == m && q.observable == o).map_or("-".into(), |q| format!("{:.3e}", q.value))
            })
            .collect();
        println!("{m:e},{}", row.join(","));
    }
    for w in a.m.windows(2) {
        let r = ratio(&points, Observable::KhhInverse, w[0], w[1]);
        let f = ratio(&points, Observable::Flatness, w[0], w[1]);
        if let (Some(r), Some(f)) = (r, f) {
            println!("ratio {:e}->{:e}: khh_inverse {r:.3e}, flatness {f:.3e}", w[0], w[1]);
        }
    }
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn spectrum_cmd(a: SpectrumArgs) -> Result<(), Failure> {
    let p = a.problem.problem(a.level, Transfer::default())?;
    let scaling = match a.scaling {
        ScalingArg::Raw => Scaling::Raw,
        ScalingArg::Diagonal => Scaling::Diagonal,
    };
    let (block, tag) = match a.block {
        Block::Full => (None, "k"),
        Block::Hh => (Some(true), "k_hh"),
        Block::Ll => (Some(false), "k_ll"),
    };
    std::fs::create_dir_all(&a.out)?;
    for &m in &a.m {
        let k = p.system(m, a.problem.rhs())?.k;
        let target = match block {
            None => k,
            Some(high) => {
                let b = p.blocks(&k);
                if high {
                    b.k_hh
                } else {
                    b.k_ll
                }
            }
        };
        let rep = spectrum(&target, scaling, m)?;
        let name = format!(
            "spectrum_{}_l{}_{tag}_{}_m{m:e}.csv",
            a.problem.disc.name().to_ascii_lowercase(),
            a.level,
            if scaling == Scaling::Raw { "raw" } else { "diagonal" }
        );
        rep.write_csv(BufWriter::new(File::create(a.out.join(&name))?))?;
        let smallest: Vec<String> = rep.eigenvalues.iter().take(5).map(|l| format!("{l:.3e}")).collect();
        println!(
            "m={m:e} n={} median={:.3e} below {:e}·median: {} smallest: {}",
            rep.eigenvalues.len(),
            rep.median(),
            a.threshold,
            rep.count_below(a.threshold),
            smallest.join(" ")
        );
    }
    Ok(())
}

fn export(a: ExportArgs) -> Result<(), Failure> {
    let p = a.problem.problem(a.level, Transfer::default())?;
    for &m in &a.m {
        export_blocks(&p, m, a.problem.rhs(), &a.out)?;
    }
    Ok(())
}

fn export_blocks(p: &PlateProblem, m: f64, rhs: Rhs, dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)?;
    let k = p.system(m, rhs)?.k;
    let b = p.blocks(&k);
    let stem = format!("{}_l{}_m{m:e}", p.kind.name().to_ascii_lowercase(), p.level());
    for (name, a) in [("k", &k), ("k_hh", &b.k_hh), ("k_ll", &b.k_ll), ("k_lh", &b.k_lh)] {
        let path = dir.join(format!("{stem}_{name}.mtx"));
        let mut w = BufWriter::new(File::create(&path)?);
        write_matrix_market(a, &mut w)?;
        w.flush()?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn mesh(a: MeshArgs) -> Result<(), Failure> {
    if a.level == 0 || a.level > 4 {
        return Err(Failure::Usage("--level must be in 1..=4".into()));
    }
    let island = a.island.map_or_else(IslandSpec::default, |[x0, y0, x1, y1]| IslandSpec::new([x0, y0], [x1, y1]));
    let meshes = biharm_core::build_hierarchy(island, a.level)?;
    let text = meshes[a.level - 1].dump();
    match a.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}
