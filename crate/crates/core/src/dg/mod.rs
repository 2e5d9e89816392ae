//! Symmetric interior-penalty DG for the Poisson problem on polytopal
//! meshes, with bounding-box bases and quadrature on the fine cells.

mod assemble;
mod basis;
mod problem;
mod quadrature;
mod space;

pub use assemble::{
    assemble, compute_errors, error_table_csv, observed_order, penalty_sigma, solve_direct, ErrorRow,
    LinearSystem, DEFAULT_C_SIGMA, DIRECT_DOF_CAP,
};
pub use basis::{local_dim, Family, ReferenceBasis};
pub use problem::{ConstantData, ExactSolution, ManufacturedCase, Problem};
pub use quadrature::{cell_quadrature, face_quadrature, gauss_legendre, gll_nodes, points_for_exactness, FaceRule, QuadRule};
pub use space::{build_space, DgSpace};

use crate::agglomeration::{build_polytopal_mesh, Partition};
use crate::error::Result;
use crate::mesh::BackgroundMesh;

/// Builds the space on `partition`, assembles, solves directly and returns
/// the coefficients together with the space.
pub fn solve_on_partition(
    mesh: &BackgroundMesh,
    partition: &Partition,
    p: usize,
    family: Family,
    problem: &dyn Problem,
    c_sigma: f64,
) -> Result<(DgSpace, Vec<f64>)> {
    let space = build_space(mesh, build_polytopal_mesh(mesh, partition)?, p, family)?;
    let system = assemble(mesh, &space, problem, c_sigma)?;
    let x = solve_direct(&system)?;
    Ok((space, x))
}
