//! Agglomeration of fine quad/hex/simplex meshes into nested polytopal
//! hierarchies through an R-tree of element bounding boxes, together with
//! quality metrics, a symmetric interior-penalty DG discretization of the
//! Poisson problem, and the geometric multigrid preconditioner built on the
//! nested hierarchy.

pub mod agglomeration;
pub mod dg;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod mesh;
pub mod metrics;
pub mod multigrid;
pub mod spatial_index;

pub use error::{Error, Result};
