//! TOML study configuration. Keys mirror the long flags; any key present
//! overrides the corresponding flag.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use crate::args::{Cli, Command, DiscOpts, FamilyArg, LevelOpts, MeshOpts, Order, SolverKind, SolverOpts, Study};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub gen: Option<String>,
    pub mesh: Option<PathBuf>,
    pub hierarchy: Option<PathBuf>,
    pub strategy: Option<String>,
    pub order: Option<[usize; 2]>,
    pub parts: Option<usize>,
    pub partition: Option<PathBuf>,
    pub by_material: Option<bool>,
    pub seed: Option<u64>,
    pub level: Option<usize>,
    pub agglomerates: Option<usize>,
    pub family: Option<String>,
    pub c_sigma: Option<f64>,
    pub p: Option<usize>,
    pub degrees: Option<Vec<usize>>,
    pub solver: Option<String>,
    pub mg_levels: Option<usize>,
    pub levels: Option<Vec<usize>>,
    pub refinements: Option<usize>,
    pub cells_per_agglomerate: Option<usize>,
    pub plain_cg: Option<bool>,
    pub repeat: Option<usize>,
    pub no_vtk: Option<bool>,
    pub out: Option<PathBuf>,
}

impl StudyConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn apply(&self, cli: &mut Cli) -> Result<()> {
        if let Some(out) = &self.out {
            cli.out = out.clone();
        }
        match &mut cli.command {
            Command::Agglomerate { mesh, no_vtk } => {
                self.apply_mesh(mesh)?;
                set(no_vtk, self.no_vtk);
            }
            Command::Metrics { mesh, level } => {
                self.apply_mesh(mesh)?;
                self.apply_level(level);
            }
            Command::Solve { mesh, level, disc, p, solver } => {
                self.apply_mesh(mesh)?;
                self.apply_level(level);
                self.apply_disc(disc)?;
                set(p, self.p);
                self.apply_solver(solver)?;
            }
            Command::Study(Study::PConvergence { mesh, level, disc, degrees }) => {
                self.apply_mesh(mesh)?;
                self.apply_level(level);
                self.apply_disc(disc)?;
                set(degrees, self.degrees.clone());
            }
            Command::Study(Study::HConvergence {
                gen,
                refinements,
                cells_per_agglomerate,
                order,
                disc,
                degrees,
            }) => {
                if let Some(g) = &self.gen {
                    *gen = g.parse()?;
                }
                set(refinements, self.refinements);
                set(cells_per_agglomerate, self.cells_per_agglomerate);
                if let Some([min, max]) = self.order {
                    *order = Some(Order { min, max });
                }
                self.apply_disc(disc)?;
                set(degrees, self.degrees.clone());
            }
            Command::Study(Study::MgLevels {
                mesh,
                disc,
                p,
                levels,
                plain_cg,
            }) => {
                self.apply_mesh(mesh)?;
                self.apply_disc(disc)?;
                set(p, self.p);
                set(levels, self.levels.clone());
                set(plain_cg, self.plain_cg);
            }
            Command::Study(Study::Timing { mesh, repeat }) => {
                self.apply_mesh(mesh)?;
                set(repeat, self.repeat);
            }
        }
        Ok(())
    }

    fn apply_mesh(&self, m: &mut MeshOpts) -> Result<()> {
        if let Some(g) = &self.gen {
            m.gen = Some(g.parse()?);
            m.mesh = None;
        }
        if let Some(path) = &self.mesh {
            m.mesh = Some(path.clone());
            m.gen = None;
        }
        if self.gen.is_some() && self.mesh.is_some() {
            bail!("config sets both gen and mesh");
        }
        if let Some(h) = &self.hierarchy {
            m.hierarchy = Some(h.clone());
        }
        if let Some(s) = &self.strategy {
            m.strategy = s.parse()?;
        }
        if let Some([min, max]) = self.order {
            m.order = Some(Order { min, max });
        }
        if let Some(p) = self.parts {
            m.parts = Some(p);
        }
        if let Some(p) = &self.partition {
            m.partition = Some(p.clone());
        }
        set(&mut m.by_material, self.by_material);
        set(&mut m.seed, self.seed);
        Ok(())
    }

    fn apply_level(&self, l: &mut LevelOpts) {
        if self.level.is_some() || self.agglomerates.is_some() {
            l.level = self.level;
            l.agglomerates = self.agglomerates;
        }
    }

    fn apply_disc(&self, d: &mut DiscOpts) -> Result<()> {
        if let Some(f) = &self.family {
            d.family = match f.to_ascii_lowercase().as_str() {
                "q" | "tensor" => FamilyArg::Q,
                "p" | "total" => FamilyArg::P,
                _ => bail!("unknown family {f:?} (q | p)"),
            };
        }
        set(&mut d.c_sigma, self.c_sigma);
        Ok(())
    }

    fn apply_solver(&self, s: &mut SolverOpts) -> Result<()> {
        if let Some(kind) = &self.solver {
            s.solver = match kind.to_ascii_lowercase().as_str() {
                "direct" => SolverKind::Direct,
                "r3mg" => SolverKind::R3mg,
                _ => bail!("unknown solver {kind:?} (direct | r3mg)"),
            };
        }
        set(&mut s.mg_levels, self.mg_levels);
        Ok(())
    }
}

fn set<T>(target: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *target = v;
    }
}
