use super::{BackgroundMesh, Cell, CellKind};
use crate::error::{invalid, Result};
use crate::geometry::Point;

/// SplitMix64 generator. Used instead of an external RNG so that perturbed
/// fixtures are bitwise reproducible on every platform.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[-1, 1)`.
    pub fn next_signed(&mut self) -> f64 {
        2.0 * self.next_f64() - 1.0
    }
}

fn check_bounds<const D: usize>(bounds: &[[f64; D]; 2]) -> Result<()> {
    for k in 0..D {
        let (lo, hi) = (bounds[0][k], bounds[1][k]);
        if !(lo.is_finite() && hi.is_finite() && hi > lo) {
            return invalid(format!("degenerate bounds along axis {k}: [{lo}, {hi}]"));
        }
    }
    Ok(())
}

/// `n x n` axis-aligned squares tiling `bounds = [lo, hi]`.
pub fn generate_structured_quad(n: usize, bounds: [[f64; 2]; 2]) -> Result<BackgroundMesh> {
    generate_structured_quad_counts([n, n], bounds)
}

/// `nx x ny` quad grid. Cell `(i, j)` has id `j * nx + i`.
pub fn generate_structured_quad_counts(
    counts: [usize; 2],
    bounds: [[f64; 2]; 2],
) -> Result<BackgroundMesh> {
    let (vertices, cells) = quad_grid(counts, bounds)?;
    BackgroundMesh::new(2, vertices, cells, None)
}

fn quad_grid(counts: [usize; 2], bounds: [[f64; 2]; 2]) -> Result<(Vec<Point>, Vec<Cell>)> {
    let [nx, ny] = counts;
    if nx == 0 || ny == 0 {
        return invalid("cells per side must be at least 1");
    }
    check_bounds(&bounds)?;
    let [lo, hi] = bounds;
    let hx = (hi[0] - lo[0]) / nx as f64;
    let hy = (hi[1] - lo[1]) / ny as f64;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            let x = if i == nx { hi[0] } else { lo[0] + i as f64 * hx };
            let y = if j == ny { hi[1] } else { lo[1] + j as f64 * hy };
            vertices.push([x, y, 0.0]);
        }
    }
    let mut cells = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let v = j * (nx + 1) + i;
            cells.push(Cell {
                kind: CellKind::Quad,
                vertices: vec![v, v + 1, v + nx + 2, v + nx + 1],
            });
        }
    }
    Ok((vertices, cells))
}

/// `n^3` axis-aligned cubes tiling the box `bounds`.
pub fn generate_structured_hex(n: usize, bounds: [[f64; 3]; 2]) -> Result<BackgroundMesh> {
    generate_structured_hex_counts([n, n, n], bounds)
}

/// Cell `(i, j, k)` has id `(k * ny + j) * nx + i`.
pub fn generate_structured_hex_counts(
    counts: [usize; 3],
    bounds: [[f64; 3]; 2],
) -> Result<BackgroundMesh> {
    let [nx, ny, nz] = counts;
    if nx == 0 || ny == 0 || nz == 0 {
        return invalid("cells per side must be at least 1");
    }
    check_bounds(&bounds)?;
    let [lo, hi] = bounds;
    let h = [
        (hi[0] - lo[0]) / nx as f64,
        (hi[1] - lo[1]) / ny as f64,
        (hi[2] - lo[2]) / nz as f64,
    ];
    let coord = |axis: usize, i: usize, n: usize| {
        if i == n {
            hi[axis]
        } else {
            lo[axis] + i as f64 * h[axis]
        }
    };
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                vertices.push([coord(0, i, nx), coord(1, j, ny), coord(2, k, nz)]);
            }
        }
    }
    let vid = |i: usize, j: usize, k: usize| (k * (ny + 1) + j) * (nx + 1) + i;
    let mut cells = Vec::with_capacity(nx * ny * nz);
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                cells.push(Cell {
                    kind: CellKind::Hex,
                    vertices: vec![
                        vid(i, j, k),
                        vid(i + 1, j, k),
                        vid(i + 1, j + 1, k),
                        vid(i, j + 1, k),
                        vid(i, j, k + 1),
                        vid(i + 1, j, k + 1),
                        vid(i + 1, j + 1, k + 1),
                        vid(i, j + 1, k + 1),
                    ],
                });
            }
        }
    }
    BackgroundMesh::new(3, vertices, cells, None)
}

/// Structured quad grid whose interior vertices are displaced by up to
/// `amplitude` times the local cell width in each direction.
pub fn generate_perturbed_quad(
    n: usize,
    amplitude: f64,
    seed: u64,
    bounds: [[f64; 2]; 2],
) -> Result<BackgroundMesh> {
    generate_perturbed_quad_counts([n, n], amplitude, seed, bounds)
}

pub fn generate_perturbed_quad_counts(
    counts: [usize; 2],
    amplitude: f64,
    seed: u64,
    bounds: [[f64; 2]; 2],
) -> Result<BackgroundMesh> {
    if !(0.0..0.5).contains(&amplitude) {
        return invalid(format!("perturbation amplitude {amplitude} not in [0, 0.5)"));
    }
    let (mut vertices, cells) = quad_grid(counts, bounds)?;
    let [nx, ny] = counts;
    let hx = (bounds[1][0] - bounds[0][0]) / nx as f64;
    let hy = (bounds[1][1] - bounds[0][1]) / ny as f64;
    let mut rng = SplitMix64::new(seed);
    for j in 1..ny {
        for i in 1..nx {
            let v = &mut vertices[j * (nx + 1) + i];
            v[0] += amplitude * hx * rng.next_signed();
            v[1] += amplitude * hy * rng.next_signed();
        }
    }
    BackgroundMesh::new(2, vertices, cells, None)
}
