use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spatial_index::{NodeContent, NodeId, RTree};

/// Assignment of every fine cell to one of `n_parts` agglomerates; every
/// agglomerate id is used.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    assignment: Vec<usize>,
    n_parts: usize,
}

impl Partition {
    pub fn new(assignment: Vec<usize>, n_parts: usize) -> Result<Self> {
        let mut used = vec![false; n_parts];
        for (c, &p) in assignment.iter().enumerate() {
            match used.get_mut(p) {
                Some(u) => *u = true,
                None => {
                    return Err(Error::InvalidPartition(format!(
                        "cell {c} assigned to part {p} of {n_parts}"
                    )))
                }
            }
        }
        if let Some(empty) = used.iter().position(|u| !u) {
            return Err(Error::InvalidPartition(format!("part {empty} is empty")));
        }
        Ok(Self {
            assignment,
            n_parts,
        })
    }

    pub fn identity(n_cells: usize) -> Self {
        Self {
            assignment: (0..n_cells).collect(),
            n_parts: n_cells,
        }
    }

    /// Partition whose `j`-th part is `groups[j]`.
    pub fn from_groups(groups: &[Vec<usize>], n_cells: usize) -> Result<Self> {
        let mut assignment = vec![usize::MAX; n_cells];
        for (j, g) in groups.iter().enumerate() {
            for &c in g {
                match assignment.get_mut(c) {
                    Some(a) if *a == usize::MAX => *a = j,
                    Some(_) => {
                        return Err(Error::InvalidPartition(format!("cell {c} in two groups")))
                    }
                    None => {
                        return Err(Error::InvalidPartition(format!(
                            "cell {c} out of range ({n_cells} cells)"
                        )))
                    }
                }
            }
        }
        if let Some(c) = assignment.iter().position(|&a| a == usize::MAX) {
            return Err(Error::InvalidPartition(format!("cell {c} not assigned")));
        }
        Self::new(assignment, groups.len())
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn part_of(&self, cell: usize) -> usize {
        self.assignment[cell]
    }

    pub fn n_parts(&self) -> usize {
        self.n_parts
    }

    pub fn n_cells(&self) -> usize {
        self.assignment.len()
    }

    /// Sorted member cells of every part.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.n_parts];
        for (c, &p) in self.assignment.iter().enumerate() {
            groups[p].push(c);
        }
        groups
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_parts];
        for &p in &self.assignment {
            sizes[p] += 1;
        }
        sizes
    }
}

/// All leaf entries below `node`, by recursive descent to the leaf nodes.
pub fn extract_leaves(tree: &RTree, node: NodeId) -> Vec<usize> {
    let mut out = Vec::new();
    collect_leaves(tree, node, &mut out);
    out
}

fn collect_leaves(tree: &RTree, node: NodeId, out: &mut Vec<usize>) {
    match &tree.node(node).content {
        NodeContent::Leaf(entries) => out.extend(entries.iter().map(|&(_, id)| id)),
        NodeContent::Internal(children) => {
            for &c in children {
                collect_leaves(tree, c, out);
            }
        }
    }
}

/// One agglomerate per node at depth `depth`, numbered left to right.
pub fn compute_agglomerates(tree: &RTree, depth: usize) -> Result<Partition> {
    let nodes = tree.nodes_at_depth(depth)?;
    let groups: Vec<Vec<usize>> = nodes.iter().map(|&n| extract_leaves(tree, n)).collect();
    Partition::from_groups(&groups, tree.n_entries())
}
