//! R-tree of order `(m, M)` over the minimum bounding rectangles of the
//! fine cells.

mod aabb;
mod rstar;
mod rtree;
mod str_pack;

pub use aabb::{cell_entries, mbr_of_cell, Aabb};
pub use rstar::insert_rstar;
pub use rtree::{Node, NodeContent, NodeId, RTree, TreeOrder, TreeViolation};
pub use str_pack::build_str;

use crate::error::Result;
use crate::mesh::BackgroundMesh;

/// STR-packed tree over every cell of `mesh`.
pub fn build_mesh_tree(mesh: &BackgroundMesh, order: TreeOrder) -> Result<RTree> {
    build_str(&cell_entries(mesh), order)
}
