use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::hierarchy::{AgglomerateHierarchy, Strategy};
use super::partition::Partition;
use crate::error::{Error, Result};
use crate::mesh::BackgroundMesh;

/// METIS graph text of the dual graph: `N M` then 1-indexed neighbours.
pub fn metis_graph_string(mesh: &BackgroundMesh) -> String {
    let g = mesh.dual_adjacency();
    let mut s = format!("{} {}\n", mesh.n_cells(), g.n_edges());
    for nbrs in &g.adjacency {
        let line: Vec<String> = nbrs.iter().map(|n| (n + 1).to_string()).collect();
        let _ = writeln!(s, "{}", line.join(" "));
    }
    s
}

pub fn export_metis_graph(mesh: &BackgroundMesh, path: &Path) -> Result<()> {
    fs::write(path, metis_graph_string(mesh))?;
    Ok(())
}

/// Parses one part id per line. `n_parts` defaults to the largest id + 1.
pub fn parse_partition(text: &str, n_cells: usize, n_parts: Option<usize>) -> Result<Partition> {
    let mut assignment = Vec::with_capacity(n_cells);
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let id = t.parse::<usize>().map_err(|_| Error::Parse {
            line: i + 1,
            msg: format!("expected a part id, found {t:?}"),
        })?;
        assignment.push(id);
    }
    if assignment.len() != n_cells {
        return Err(Error::Parse {
            line: text.lines().count(),
            msg: format!("partition lists {} cells, mesh has {n_cells}", assignment.len()),
        });
    }
    let n_parts = n_parts.unwrap_or_else(|| assignment.iter().max().map_or(0, |m| m + 1));
    Partition::new(assignment, n_parts)
}

pub fn import_partition(path: &Path, n_cells: usize, n_parts: Option<usize>) -> Result<Partition> {
    parse_partition(&fs::read_to_string(path)?, n_cells, n_parts)
}

pub fn partition_string(p: &Partition) -> String {
    let mut s = String::with_capacity(4 * p.n_cells());
    for a in p.assignment() {
        let _ = writeln!(s, "{a}");
    }
    s
}

/// FNV-1a over vertex coordinates and cell connectivity.
pub fn mesh_checksum(mesh: &BackgroundMesh) -> String {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    eat(&(mesh.dim() as u64).to_le_bytes());
    for v in mesh.vertices() {
        for x in &v[..mesh.dim()] {
            eat(&x.to_bits().to_le_bytes());
        }
    }
    for c in mesh.cells() {
        eat(&(c.vertices.len() as u64).to_le_bytes());
        for &v in &c.vertices {
            eat(&(v as u64).to_le_bytes());
        }
    }
    format!("{h:016x}")
}

const FORMAT: &str = "polyagglo-hierarchy";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct LevelDoc {
    n_agglomerates: usize,
    assignment: Vec<usize>,
    parent: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct HierarchyDoc {
    format: String,
    version: u32,
    strategy: Strategy,
    n_cells: usize,
    mesh_checksum: String,
    by_material: bool,
    levels: Vec<LevelDoc>,
}

pub fn hierarchy_to_json(hier: &AgglomerateHierarchy, mesh: &BackgroundMesh) -> Result<String> {
    let doc = HierarchyDoc {
        format: FORMAT.into(),
        version: VERSION,
        strategy: hier.strategy(),
        n_cells: hier.n_cells(),
        mesh_checksum: mesh_checksum(mesh),
        by_material: hier.by_material(),
        levels: (0..hier.n_levels())
            .map(|l| LevelDoc {
                n_agglomerates: hier.level(l).n_parts(),
                assignment: hier.level(l).assignment().to_vec(),
                parent: hier.parents(l).to_vec(),
            })
            .collect(),
    };
    Ok(serde_json::to_string(&doc)?)
}

pub fn hierarchy_from_json(text: &str, mesh: &BackgroundMesh) -> Result<AgglomerateHierarchy> {
    let doc: HierarchyDoc = serde_json::from_str(text)?;
    let bad = |m: String| Err(Error::InvalidHierarchy(m));
    if doc.format != FORMAT || doc.version != VERSION {
        return bad(format!("unsupported document {} v{}", doc.format, doc.version));
    }
    if doc.n_cells != mesh.n_cells() {
        return bad(format!("hierarchy has {} cells, mesh has {}", doc.n_cells, mesh.n_cells()));
    }
    if doc.mesh_checksum != mesh_checksum(mesh) {
        return bad("mesh checksum mismatch".into());
    }
    let mut levels = Vec::with_capacity(doc.levels.len());
    let mut parents = Vec::with_capacity(doc.levels.len());
    for (l, lv) in doc.levels.into_iter().enumerate() {
        if lv.assignment.len() != doc.n_cells {
            return bad(format!("level {l} assigns {} cells", lv.assignment.len()));
        }
        levels.push(Partition::new(lv.assignment, lv.n_agglomerates)?);
        parents.push(lv.parent);
    }
    let h = AgglomerateHierarchy::from_parts(levels, parents, doc.strategy, doc.by_material)?;
    if h.by_material() {
        if let Some(m) = mesh.material() {
            h.check_materials(m)?;
        }
    }
    Ok(h)
}

pub fn serialize_hierarchy(hier: &AgglomerateHierarchy, mesh: &BackgroundMesh, path: &Path) -> Result<()> {
    fs::write(path, hierarchy_to_json(hier, mesh)?)?;
    Ok(())
}

pub fn load_hierarchy(path: &Path, mesh: &BackgroundMesh) -> Result<AgglomerateHierarchy> {
    hierarchy_from_json(&fs::read_to_string(path)?, mesh)
}
