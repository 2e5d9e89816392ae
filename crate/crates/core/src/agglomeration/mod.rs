//! Partitions from tree levels, nested hierarchies, polytopal meshes and a
//! graph-partition baseline.

mod baseline;
mod hierarchy;
mod io;
mod partition;
mod polytopal;

pub use baseline::graph_partition_baseline;
pub use hierarchy::{
    build_hierarchy, build_rtree_hierarchy, hierarchy_from_partition, AgglomerateHierarchy, Strategy,
};
pub use io::{
    export_metis_graph, hierarchy_from_json, hierarchy_to_json, import_partition, load_hierarchy,
    mesh_checksum, metis_graph_string, parse_partition, partition_string, serialize_hierarchy,
};
pub use partition::{compute_agglomerates, extract_leaves, Partition};
pub use polytopal::{build_polytopal_mesh, components, Agglomerate, PolytopalMesh, SkeletonFace};
