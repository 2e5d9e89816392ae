use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use polyagglo::agglomeration::Strategy;
use polyagglo::dg::{Family, DEFAULT_C_SIGMA};

use crate::source::GenSpec;

#[derive(Debug, Parser)]
#[command(name = "polyagglo", version, about = "R-tree agglomeration, quality metrics, SIPG solves and multigrid studies")]
pub struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = "POLYAGGLO_OUT", default_value = "out")]
    pub out: PathBuf,

    /// TOML file whose keys override the command-line flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build the hierarchy, write it with one VTK file per level.
    Agglomerate {
        #[command(flatten)]
        mesh: MeshOpts,
        /// Skip the VTK output.
        #[arg(long)]
        no_vtk: bool,
    },
    /// Quality metrics of one level.
    Metrics {
        #[command(flatten)]
        mesh: MeshOpts,
        #[command(flatten)]
        level: LevelOpts,
    },
    /// Solve the manufactured problem on one level.
    Solve {
        #[command(flatten)]
        mesh: MeshOpts,
        #[command(flatten)]
        level: LevelOpts,
        #[command(flatten)]
        disc: DiscOpts,
        /// Polynomial degree.
        #[arg(long, default_value_t = 1)]
        p: usize,
        #[command(flatten)]
        solver: SolverOpts,
    },
    /// Convergence, multigrid and timing studies
    #[command(subcommand)]
    Study(Study),
}

#[derive(Debug, Subcommand)]
pub enum Study {
    /// Errors for a list of degrees on one level.
    PConvergence {
        #[command(flatten)]
        mesh: MeshOpts,
        #[command(flatten)]
        level: LevelOpts,
        #[command(flatten)]
        disc: DiscOpts,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        degrees: Vec<usize>,
    },
    /// Errors on a sequence of uniformly refined generated meshes.
    HConvergence {
        /// Coarsest generator spec; each refinement doubles the cell counts.
        #[arg(long)]
        gen: GenSpec,
        #[arg(long, default_value_t = 4)]
        refinements: usize,
        /// Fine cells per agglomerate, constant across the sequence.
        #[arg(long, default_value_t = 16)]
        cells_per_agglomerate: usize,
        #[arg(long)]
        order: Option<Order>,
        #[command(flatten)]
        disc: DiscOpts,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        degrees: Vec<usize>,
    },
    /// PCG iteration counts for several multigrid depths.
    MgLevels {
        #[command(flatten)]
        mesh: MeshOpts,
        #[command(flatten)]
        disc: DiscOpts,
        #[arg(long, default_value_t = 1)]
        p: usize,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
        levels: Vec<usize>,
        /// Also run unpreconditioned CG.
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        plain_cg: bool,
    },
    /// Wall-clock time of the agglomeration phases.
    Timing {
        #[command(flatten)]
        mesh: MeshOpts,
        #[arg(long, default_value_t = 3)]
        repeat: usize,
    },
}

/// `m,M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Order {
    pub min: usize,
    pub max: usize,
}

impl std::str::FromStr for Order {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s.split_once(',').ok_or_else(|| format!("expected m,M, got {s:?}"))?;
        let parse = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("{x:?}: {e}"));
        Ok(Order {
            min: parse(a)?,
            max: parse(b)?,
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct MeshOpts {
    /// Generator spec: quad:N, quad:NXxNY, hex:N, pquad:N:amp:seed.
    #[arg(long, conflicts_with = "mesh")]
    pub gen: Option<GenSpec>,
    /// Gmsh MSH 2.2 file.
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    /// Previously written hierarchy file to reuse instead of agglomerating.
    #[arg(long)]
    pub hierarchy: Option<PathBuf>,
    #[arg(long, value_parser = parse_strategy, default_value = "rtree")]
    pub strategy: Strategy,
    /// R-tree order m,M; defaults to 2,4 in 2D and 4,8 in 3D.
    #[arg(long)]
    pub order: Option<Order>,
    /// Part count for the graph strategy.
    #[arg(long)]
    pub parts: Option<usize>,
    /// Partition file for the external strategy.
    #[arg(long)]
    pub partition: Option<PathBuf>,
    /// Agglomerate each material label separately.
    #[arg(long)]
    pub by_material: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn parse_strategy(s: &str) -> Result<Strategy, String> {
    s.parse::<Strategy>().map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct LevelOpts {
    /// Hierarchy level, 0 being the fine mesh.
    #[arg(long, conflicts_with = "agglomerates")]
    pub level: Option<usize>,
    /// Select the level with this many agglomerates.
    #[arg(long)]
    pub agglomerates: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    /// Tensor-product Q_p.
    Q,
    /// Total-degree P_p.
    P,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Q => Family::Tensor,
            FamilyArg::P => Family::Total,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DiscOpts {
    #[arg(long, value_enum, default_value = "q")]
    pub family: FamilyArg,
    /// Penalty constant.
    #[arg(long, default_value_t = DEFAULT_C_SIGMA)]
    pub c_sigma: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverKind {
    Direct,
    R3mg,
}

#[derive(Debug, Clone, Args)]
pub struct SolverOpts {
    #[arg(long, value_enum, default_value = "direct")]
    pub solver: SolverKind,
    /// Multigrid levels for the r3mg solver.
    #[arg(long, default_value_t = 3)]
    pub mg_levels: usize,
}
