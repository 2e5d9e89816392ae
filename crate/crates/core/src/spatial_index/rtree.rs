use std::fmt;

use super::Aabb;
use crate::error::{invalid, Result};

/// Index of a node inside an [`RTree`] arena.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, PartialEq)]
pub enum NodeContent {
    /// Leaf node: `(MBR, cell id)` entries.
    Leaf(Vec<(Aabb, usize)>),
    /// Internal node: child node handles.
    Internal(Vec<NodeId>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub mbr: Aabb,
    pub content: NodeContent,
}

impl Node {
    pub fn len(&self) -> usize {
        match &self.content {
            NodeContent::Leaf(e) => e.len(),
            NodeContent::Internal(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self.content, NodeContent::Leaf(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeOrder {
    pub min: usize,
    pub max: usize,
}

impl TreeOrder {
    pub fn new(min: usize, max: usize) -> Result<Self> {
        if min < 2 || 2 * min > max {
            return invalid(format!("invalid R-tree order ({min}, {max}): need 2 <= m <= M/2"));
        }
        Ok(Self { min, max })
    }

    /// `(2^(d-1), 2^d)`.
    pub fn default_for_dim(dim: usize) -> Self {
        Self {
            min: 1 << (dim - 1).max(1),
            max: 1 << dim.max(2),
        }
    }
}

/// R-tree of order `(m, M)` stored as a node arena. All leaf nodes sit at
/// depth `height - 1`; the root is depth 0.
#[derive(Debug, Clone, PartialEq)]
pub struct RTree {
    pub(crate) nodes: Vec<Node>,
    pub(crate) root: Option<NodeId>,
    pub(crate) order: TreeOrder,
    pub(crate) dim: usize,
    pub(crate) height: usize,
    pub(crate) n_entries: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeViolation {
    Hull { node: NodeId },
    LeafDepth { node: NodeId, depth: usize, expected: usize },
    Occupancy { node: NodeId, count: usize },
    RootTooSmall { count: usize },
    DuplicateId { id: usize },
    MissingId { id: usize },
    EmptyTree,
}

impl fmt::Display for TreeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeViolation::Hull { node } => write!(f, "hull violation at node {}", node.0),
            TreeViolation::LeafDepth {
                node,
                depth,
                expected,
            } => write!(
                f,
                "leaf depth violation at node {}: depth {depth}, expected {expected}",
                node.0
            ),
            TreeViolation::Occupancy { node, count } => {
                write!(f, "occupancy violation at node {}: {count} children", node.0)
            }
            TreeViolation::RootTooSmall { count } => {
                write!(f, "internal root holds {count} children, need at least 2")
            }
            TreeViolation::DuplicateId { id } => write!(f, "id {id} stored more than once"),
            TreeViolation::MissingId { id } => write!(f, "id {id} missing from the leaves"),
            TreeViolation::EmptyTree => write!(f, "tree has no root"),
        }
    }
}

impl RTree {
    /// Empty tree for dynamic insertion.
    pub fn empty(dim: usize, order: TreeOrder) -> Self {
        Self {
            nodes: Vec::new(),
            root: None,
            order,
            dim,
            height: 0,
            n_entries: 0,
        }
    }

    pub fn root(&self) -> Option<NodeId> {
        self.root
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn order(&self) -> TreeOrder {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of node levels (root only: 1).
    pub fn height(&self) -> usize {
        self.height
    }

    pub fn n_entries(&self) -> usize {
        self.n_entries
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        match &self.nodes[id.0].content {
            NodeContent::Internal(c) => c,
            NodeContent::Leaf(_) => &[],
        }
    }

    /// Nodes at depth `k` from the root, left to right.
    pub fn nodes_at_depth(&self, k: usize) -> Result<Vec<NodeId>> {
        if k >= self.height {
            return invalid(format!("depth {k} out of range (height {})", self.height));
        }
        let mut level = vec![self.root.expect("non-empty tree has a root")];
        for _ in 0..k {
            level = level
                .iter()
                .flat_map(|&n| self.children(n).iter().copied())
                .collect();
        }
        Ok(level)
    }

    /// Node count per depth, root first.
    pub fn level_sizes(&self) -> Vec<usize> {
        (0..self.height)
            .map(|k| self.nodes_at_depth(k).map(|v| v.len()).unwrap_or(0))
            .collect()
    }

    /// Checks the R-tree definition and reports the first violated clause.
    pub fn validate(&self) -> std::result::Result<(), TreeViolation> {
        let root = self.root.ok_or(TreeViolation::EmptyTree)?;
        let mut seen = vec![false; self.n_entries];
        let mut stack = vec![(root, 0usize)];
        while let Some((id, depth)) = stack.pop() {
            let node = &self.nodes[id.0];
            let count = node.len();
            if id == root {
                if !node.is_leaf() && count < 2 {
                    return Err(TreeViolation::RootTooSmall { count });
                }
                if count > self.order.max {
                    return Err(TreeViolation::Occupancy { node: id, count });
                }
            } else if count < self.order.min || count > self.order.max {
                return Err(TreeViolation::Occupancy { node: id, count });
            }
            match &node.content {
                NodeContent::Leaf(entries) => {
                    if depth + 1 != self.height {
                        return Err(TreeViolation::LeafDepth {
                            node: id,
                            depth,
                            expected: self.height - 1,
                        });
                    }
                    let hull = Aabb::hull(entries.iter().map(|(b, _)| b));
                    if hull.is_some_and(|h| h != node.mbr) {
                        return Err(TreeViolation::Hull { node: id });
                    }
                    for &(_, e) in entries {
                        match seen.get_mut(e) {
                            Some(s) if !*s => *s = true,
                            _ => return Err(TreeViolation::DuplicateId { id: e }),
                        }
                    }
                }
                NodeContent::Internal(children) => {
                    let hull = Aabb::hull(children.iter().map(|c| &self.nodes[c.0].mbr));
                    if hull != Some(node.mbr) {
                        return Err(TreeViolation::Hull { node: id });
                    }
                    for &c in children.iter().rev() {
                        stack.push((c, depth + 1));
                    }
                }
            }
        }
        if let Some(id) = seen.iter().position(|s| !s) {
            return Err(TreeViolation::MissingId { id });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spatial_index::build_str;

    fn boxes(n: usize) -> Vec<(Aabb, usize)> {
        (0..n)
            .map(|i| {
                let x = (i % 8) as f64;
                let y = (i / 8) as f64;
                (Aabb::new([x, y, 0.0], [x + 1.0, y + 1.0, 0.0], 2), i)
            })
            .collect()
    }

    #[test]
    fn order_validation() {
        assert!(TreeOrder::new(2, 4).is_ok());
        assert!(TreeOrder::new(1, 4).is_err());
        assert!(TreeOrder::new(3, 4).is_err());
        assert_eq!(TreeOrder::default_for_dim(2), TreeOrder { min: 2, max: 4 });
        assert_eq!(TreeOrder::default_for_dim(3), TreeOrder { min: 4, max: 8 });
    }

    #[test]
    fn shrunk_node_reports_hull_violation() {
        let mut t = build_str(&boxes(64), TreeOrder::new(2, 4).unwrap()).unwrap();
        assert_eq!(t.validate(), Ok(()));
        let victim = t.nodes_at_depth(1).unwrap()[2];
        t.nodes[victim.0].mbr.hi[0] -= 0.5;
        let err = t.validate().unwrap_err();
        assert!(matches!(err, TreeViolation::Hull { .. }));
        assert!(err.to_string().starts_with("hull violation at node"));
    }

    #[test]
    fn underfull_node_reported() {
        let mut t = build_str(&boxes(64), TreeOrder::new(2, 4).unwrap()).unwrap();
        let leaf = t.nodes_at_depth(t.height() - 1).unwrap()[0];
        if let NodeContent::Leaf(e) = &mut t.nodes[leaf.0].content {
            e.truncate(1);
        }
        let hull = match &t.nodes[leaf.0].content {
            NodeContent::Leaf(e) => e[0].0,
            _ => unreachable!(),
        };
        t.nodes[leaf.0].mbr = hull;
        assert!(matches!(t.validate(), Err(TreeViolation::Occupancy { .. })));
    }

    #[test]
    fn depth_out_of_range() {
        let t = build_str(&boxes(16), TreeOrder::new(2, 4).unwrap()).unwrap();
        assert_eq!(t.height(), 2);
        assert!(t.nodes_at_depth(2).is_err());
        assert_eq!(t.nodes_at_depth(0).unwrap(), vec![t.root().unwrap()]);
    }
}
