use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::partition::{compute_agglomerates, Partition};
use crate::error::{invalid, Error, Result};
use crate::mesh::BackgroundMesh;
use crate::spatial_index::{build_str, Aabb, RTree, TreeOrder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Rtree,
    Graph,
    External,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Rtree => "rtree",
            Strategy::Graph => "graph",
            Strategy::External => "external",
        })
    }
}

impl std::str::FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rtree" => Ok(Strategy::Rtree),
            "graph" => Ok(Strategy::Graph),
            "external" => Ok(Strategy::External),
            _ => invalid(format!("unknown strategy {s:?} (rtree | graph | external)")),
        }
    }
}

/// Nested partitions of the fine cells, finest first. Level 0 is the
/// identity; `parents[l][a]` is the level-`l` agglomerate containing the
/// level-`(l-1)` agglomerate `a` (`parents[0]` is empty).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgglomerateHierarchy {
    levels: Vec<Partition>,
    parents: Vec<Vec<usize>>,
    strategy: Strategy,
    by_material: bool,
}

impl AgglomerateHierarchy {
    /// Builds from partitions ordered finest to coarsest (level 0 = identity
    /// is prepended when missing) and derives the parent maps.
    pub fn from_levels(levels: Vec<Partition>, strategy: Strategy) -> Result<Self> {
        let Some(first) = levels.first() else {
            return invalid("hierarchy needs at least one level");
        };
        let n = first.n_cells();
        let mut all = Vec::with_capacity(levels.len() + 1);
        if first != &Partition::identity(n) {
            all.push(Partition::identity(n));
        }
        for p in levels {
            if all.last().is_some_and(|q: &Partition| q.n_parts() <= p.n_parts()) {
                if all.last() == Some(&p) {
                    continue;
                }
                return Err(Error::InvalidHierarchy(format!(
                    "level sizes must strictly decrease ({} then {})",
                    all.last().map_or(0, |q| q.n_parts()),
                    p.n_parts()
                )));
            }
            all.push(p);
        }
        let mut parents = vec![Vec::new()];
        for l in 1..all.len() {
            let mut parent = vec![usize::MAX; all[l - 1].n_parts()];
            for c in 0..n {
                let child = all[l - 1].part_of(c);
                let up = all[l].part_of(c);
                if parent[child] == usize::MAX {
                    parent[child] = up;
                } else if parent[child] != up {
                    return Err(Error::InvalidHierarchy(format!("nesting violation at level {l}")));
                }
            }
            parents.push(parent);
        }
        Ok(Self {
            levels: all,
            parents,
            strategy,
            by_material: false,
        })
    }

    /// Reassembles a hierarchy from explicit parent arrays and checks every
    /// invariant.
    pub fn from_parts(
        levels: Vec<Partition>,
        parents: Vec<Vec<usize>>,
        strategy: Strategy,
        by_material: bool,
    ) -> Result<Self> {
        let h = Self {
            levels,
            parents,
            strategy,
            by_material,
        };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidHierarchy(m));
        let Some(first) = self.levels.first() else {
            return bad("hierarchy has no levels".into());
        };
        let n = first.n_cells();
        if first != &Partition::identity(n) {
            return bad("level 0 is not the identity partition".into());
        }
        if self.parents.len() != self.levels.len() || !self.parents[0].is_empty() {
            return bad("parent map count does not match level count".into());
        }
        for l in 1..self.levels.len() {
            let (fine, coarse) = (&self.levels[l - 1], &self.levels[l]);
            if coarse.n_cells() != n {
                return bad(format!("level {l} covers {} cells, expected {n}", coarse.n_cells()));
            }
            if coarse.n_parts() >= fine.n_parts() {
                return bad(format!("level sizes must strictly decrease at level {l}"));
            }
            let parent = &self.parents[l];
            if parent.len() != fine.n_parts() || parent.iter().any(|&p| p >= coarse.n_parts()) {
                return bad(format!("malformed parent array at level {l}"));
            }
            for c in 0..n {
                if parent[fine.part_of(c)] != coarse.part_of(c) {
                    return bad(format!("nesting violation at level {l}"));
                }
            }
        }
        Ok(())
    }

    /// Checks that no agglomerate mixes material labels.
    pub fn check_materials(&self, material: &[u32]) -> Result<()> {
        for (l, p) in self.levels.iter().enumerate() {
            let mut label = vec![None; p.n_parts()];
            for (c, &a) in p.assignment().iter().enumerate() {
                match label[a] {
                    None => label[a] = Some(material[c]),
                    Some(m) if m != material[c] => {
                        return Err(Error::InvalidHierarchy(format!(
                            "agglomerate {a} at level {l} mixes materials {m} and {}",
                            material[c]
                        )))
                    }
                    Some(_) => {}
                }
            }
        }
        Ok(())
    }

    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, l: usize) -> &Partition {
        &self.levels[l]
    }

    pub fn levels(&self) -> &[Partition] {
        &self.levels
    }

    pub fn parents(&self, l: usize) -> &[usize] {
        &self.parents[l]
    }

    /// Map from level-`fine` agglomerates to level-`coarse` ones, `fine <= coarse`.
    pub fn ancestor_map(&self, fine: usize, coarse: usize) -> Vec<usize> {
        assert!(fine <= coarse && coarse < self.levels.len());
        let mut map: Vec<usize> = (0..self.levels[fine].n_parts()).collect();
        for l in fine + 1..=coarse {
            for m in map.iter_mut() {
                *m = self.parents[l][*m];
            }
        }
        map
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.levels.iter().map(Partition::n_parts).collect()
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    pub fn by_material(&self) -> bool {
        self.by_material
    }

    pub fn n_cells(&self) -> usize {
        self.levels[0].n_cells()
    }
}

/// Tree levels from the leaf nodes up to the root, as partitions of the
/// tree's entry ids.
fn tree_levels(tree: &RTree) -> Result<Vec<Partition>> {
    (0..tree.height())
        .rev()
        .map(|depth| compute_agglomerates(tree, depth))
        .collect()
}

/// Hierarchy `[identity, leaf nodes, ..., root]` from a tree built over all
/// cells of `mesh`.
pub fn build_hierarchy(tree: &RTree, mesh: &BackgroundMesh) -> Result<AgglomerateHierarchy> {
    if tree.n_entries() != mesh.n_cells() {
        return invalid(format!(
            "tree indexes {} entries, mesh has {} cells",
            tree.n_entries(),
            mesh.n_cells()
        ));
    }
    AgglomerateHierarchy::from_levels(tree_levels(tree)?, Strategy::Rtree)
}

/// Builds the R-tree(s) and the hierarchy. With `by_material`, one tree per
/// material label is built and the per-material levels are concatenated;
/// shallower materials repeat their coarsest partition.
pub fn build_rtree_hierarchy(
    mesh: &BackgroundMesh,
    order: TreeOrder,
    by_material: bool,
) -> Result<AgglomerateHierarchy> {
    if !by_material {
        let tree = crate::spatial_index::build_mesh_tree(mesh, order)?;
        return build_hierarchy(&tree, mesh);
    }
    let Some(material) = mesh.material() else {
        return invalid("per-material agglomeration requested but the mesh has no material labels");
    };
    let mut by_label: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (c, &m) in material.iter().enumerate() {
        by_label.entry(m).or_default().push(c);
    }
    // per material: list of partitions of its local cells, leaf nodes first
    let mut per_material: Vec<(Vec<usize>, Vec<Partition>)> = Vec::new();
    for cells in by_label.into_values() {
        let entries: Vec<(Aabb, usize)> = cells
            .iter()
            .enumerate()
            .map(|(local, &c)| (Aabb::from_points(mesh.cell_points(c), mesh.dim()), local))
            .collect();
        let tree = build_str(&entries, order)?;
        let mut levels = tree_levels(&tree)?;
        if levels.len() > 1 && levels[0].n_parts() == cells.len() {
            levels.remove(0);
        }
        per_material.push((cells, levels));
    }
    let depth = per_material.iter().map(|(_, l)| l.len()).max().unwrap_or(0);
    let mut levels = Vec::with_capacity(depth);
    for l in 0..depth {
        let mut assignment = vec![0; mesh.n_cells()];
        let mut offset = 0;
        for (cells, parts) in &per_material {
            let p = &parts[l.min(parts.len() - 1)];
            for (local, &c) in cells.iter().enumerate() {
                assignment[c] = offset + p.part_of(local);
            }
            offset += p.n_parts();
        }
        levels.push(Partition::new(assignment, offset)?);
    }
    let mut h = AgglomerateHierarchy::from_levels(levels, Strategy::Rtree)?;
    h.by_material = true;
    h.check_materials(material)?;
    Ok(h)
}

/// Two-level hierarchy `[identity, partition]` for baseline or imported
/// partitions.
pub fn hierarchy_from_partition(partition: Partition, strategy: Strategy) -> Result<AgglomerateHierarchy> {
    AgglomerateHierarchy::from_levels(vec![partition], strategy)
}
