//! Mesh sources: compact generator specs or MSH files.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use polyagglo::mesh::{
    generate_perturbed_quad_counts, generate_structured_hex_counts, generate_structured_quad_counts, read_msh,
    BackgroundMesh,
};

const UNIT_SQUARE: [[f64; 2]; 2] = [[0.0, 0.0], [1.0, 1.0]];
const UNIT_CUBE: [[f64; 3]; 2] = [[0.0; 3], [1.0; 3]];

/// `quad:N`, `quad:NXxNY`, `hex:N`, `hex:NXxNYxNZ`, `pquad:N:amp:seed`.
#[derive(Debug, Clone, PartialEq)]
pub enum GenSpec {
    Quad([usize; 2]),
    Hex([usize; 3]),
    PerturbedQuad { counts: [usize; 2], amplitude: f64, seed: u64 },
}

fn counts<const D: usize>(s: &str) -> Result<[usize; D]> {
    let parts: Vec<&str> = s.split('x').collect();
    let values: Vec<usize> = parts
        .iter()
        .map(|p| p.parse::<usize>().with_context(|| format!("bad cell count {p:?}")))
        .collect::<Result<_>>()?;
    match values.len() {
        1 => Ok([values[0]; D]),
        n if n == D => Ok(values.try_into().unwrap()),
        n => bail!("expected 1 or {D} cell counts, got {n} in {s:?}"),
    }
}

impl FromStr for GenSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        let fields: Vec<&str> = s.split(':').collect();
        let spec = match fields.as_slice() {
            ["quad", n] => GenSpec::Quad(counts(n)?),
            ["hex", n] => GenSpec::Hex(counts(n)?),
            ["pquad", n, amp, seed] => GenSpec::PerturbedQuad {
                counts: counts(n)?,
                amplitude: amp.parse().with_context(|| format!("bad amplitude {amp:?}"))?,
                seed: seed.parse().with_context(|| format!("bad seed {seed:?}"))?,
            },
            _ => bail!("unknown generator spec {s:?} (expected quad:N, hex:N or pquad:N:amp:seed)"),
        };
        Ok(spec)
    }
}

impl fmt::Display for GenSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenSpec::Quad([a, b]) => write!(f, "quad:{a}x{b}"),
            GenSpec::Hex([a, b, c]) => write!(f, "hex:{a}x{b}x{c}"),
            GenSpec::PerturbedQuad { counts: [a, b], amplitude, seed } => write!(f, "pquad:{a}x{b}:{amplitude}:{seed}"),
        }
    }
}

impl GenSpec {
    pub fn generate(&self) -> Result<BackgroundMesh> {
        let mesh = match *self {
            GenSpec::Quad(n) => generate_structured_quad_counts(n, UNIT_SQUARE)?,
            GenSpec::Hex(n) => generate_structured_hex_counts(n, UNIT_CUBE)?,
            GenSpec::PerturbedQuad { counts, amplitude, seed } => {
                generate_perturbed_quad_counts(counts, amplitude, seed, UNIT_SQUARE)?
            }
        };
        Ok(mesh)
    }

    /// Same generator with every cell count doubled.
    pub fn refined(&self) -> Self {
        match self.clone() {
            GenSpec::Quad(n) => GenSpec::Quad(n.map(|x| 2 * x)),
            GenSpec::Hex(n) => GenSpec::Hex(n.map(|x| 2 * x)),
            GenSpec::PerturbedQuad { counts, amplitude, seed } => GenSpec::PerturbedQuad {
                counts: counts.map(|x| 2 * x),
                amplitude,
                seed,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeshSource {
    Gen(GenSpec),
    File(PathBuf),
}

impl MeshSource {
    pub fn load(&self) -> Result<BackgroundMesh> {
        match self {
            MeshSource::Gen(g) => g.generate(),
            MeshSource::File(p) => read_msh(p).with_context(|| format!("cannot read mesh {}", p.display())),
        }
    }
}

impl fmt::Display for MeshSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeshSource::Gen(g) => g.fmt(f),
            MeshSource::File(p) => write!(f, "{}", p.display()),
        }
    }
}
