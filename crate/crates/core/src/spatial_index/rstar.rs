//! Dynamic R*-style insertion: ChooseSubtree plus the minimal-overlap split.
//! Forced reinsertion is not performed.

use super::rtree::{Node, NodeContent, NodeId, RTree};
use super::Aabb;
use crate::error::{invalid, Result};

fn contains_id(tree: &RTree, id: usize) -> bool {
    tree.nodes.iter().any(|n| match &n.content {
        NodeContent::Leaf(e) => e.iter().any(|&(_, i)| i == id),
        NodeContent::Internal(_) => false,
    })
}

fn choose_subtree(tree: &RTree, node: NodeId, entry: &Aabb, children_are_leaves: bool) -> NodeId {
    let children = tree.children(node);
    let mut best = children[0];
    let mut best_key = (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    for &c in children {
        let mbr = tree.node(c).mbr;
        let grown = mbr.union(entry);
        let area_inc = grown.measure() - mbr.measure();
        let key = if children_are_leaves {
            let mut overlap_inc = 0.0;
            for &o in children.iter().filter(|&&o| o != c) {
                let other = tree.node(o).mbr;
                overlap_inc += grown.intersection_measure(&other) - mbr.intersection_measure(&other);
            }
            (overlap_inc, area_inc, mbr.measure())
        } else {
            (area_inc, mbr.measure(), 0.0)
        };
        if key < best_key {
            best_key = key;
            best = c;
        }
    }
    best
}

/// R* split of an overfull list into two groups of at least `min` items.
pub(crate) fn rstar_split(items: &[(Aabb, usize)], min: usize) -> (Vec<(Aabb, usize)>, Vec<(Aabb, usize)>) {
    let n = items.len();
    let dim = items[0].0.dim;
    let sorted_by = |axis: usize, by_hi: bool| {
        let mut v = items.to_vec();
        v.sort_by(|a, b| {
            let (ka, kb) = if by_hi {
                ((a.0.hi[axis], a.0.lo[axis]), (b.0.hi[axis], b.0.lo[axis]))
            } else {
                ((a.0.lo[axis], a.0.hi[axis]), (b.0.lo[axis], b.0.hi[axis]))
            };
            ka.0.total_cmp(&kb.0)
                .then(ka.1.total_cmp(&kb.1))
                .then(a.1.cmp(&b.1))
        });
        v
    };
    let hull = |s: &[(Aabb, usize)]| Aabb::hull(s.iter().map(|e| &e.0)).expect("non-empty group");

    // ChooseSplitAxis: minimum summed margin over all distributions.
    let mut best_axis = 0;
    let mut best_margin = f64::INFINITY;
    for axis in 0..dim {
        let mut margin = 0.0;
        for by_hi in [false, true] {
            let v = sorted_by(axis, by_hi);
            for k in min..=n - min {
                margin += hull(&v[..k]).margin() + hull(&v[k..]).margin();
            }
        }
        if margin < best_margin {
            best_margin = margin;
            best_axis = axis;
        }
    }

    // ChooseSplitIndex: minimum overlap, then perimeter, then first id.
    let mut best: Option<((f64, f64, usize), Vec<(Aabb, usize)>, usize)> = None;
    for by_hi in [false, true] {
        let v = sorted_by(best_axis, by_hi);
        for k in min..=n - min {
            let (a, b) = (hull(&v[..k]), hull(&v[k..]));
            let key = (a.intersection_measure(&b), a.margin() + b.margin(), v[0].1);
            if best.as_ref().is_none_or(|(bk, _, _)| key < *bk) {
                best = Some((key, v.clone(), k));
            }
        }
    }
    let (_, v, k) = best.expect("at least one distribution");
    (v[..k].to_vec(), v[k..].to_vec())
}

fn recompute_mbr(tree: &mut RTree, id: NodeId) {
    let mbr = match &tree.nodes[id.0].content {
        NodeContent::Leaf(e) => Aabb::hull(e.iter().map(|x| &x.0)),
        NodeContent::Internal(c) => {
            let boxes: Vec<Aabb> = c.iter().map(|&n| tree.nodes[n.0].mbr).collect();
            Aabb::hull(boxes.iter())
        }
    };
    if let Some(m) = mbr {
        tree.nodes[id.0].mbr = m;
    }
}

/// Splits an overfull node in place and returns the new sibling.
fn split_node(tree: &mut RTree, id: NodeId) -> NodeId {
    let min = tree.order.min;
    let new_id = NodeId(tree.nodes.len());
    let content = match &tree.nodes[id.0].content {
        NodeContent::Leaf(entries) => {
            let (a, b) = rstar_split(entries, min);
            tree.nodes[id.0].content = NodeContent::Leaf(a);
            NodeContent::Leaf(b)
        }
        NodeContent::Internal(children) => {
            let items: Vec<(Aabb, usize)> = children.iter().map(|c| (tree.nodes[c.0].mbr, c.0)).collect();
            let (a, b) = rstar_split(&items, min);
            tree.nodes[id.0].content = NodeContent::Internal(a.iter().map(|x| NodeId(x.1)).collect());
            NodeContent::Internal(b.iter().map(|x| NodeId(x.1)).collect())
        }
    };
    let mbr = tree.nodes[id.0].mbr;
    tree.nodes.push(Node { mbr, content });
    recompute_mbr(tree, id);
    recompute_mbr(tree, new_id);
    new_id
}

/// Inserts one `(MBR, id)` entry, restoring all R-tree invariants.
pub fn insert_rstar(tree: &mut RTree, entry: (Aabb, usize)) -> Result<()> {
    if entry.0.dim != tree.dim {
        return invalid(format!("entry of dimension {} in a {}D tree", entry.0.dim, tree.dim));
    }
    if contains_id(tree, entry.1) {
        return invalid(format!("id {} already present", entry.1));
    }
    let Some(root) = tree.root else {
        tree.nodes.push(Node {
            mbr: entry.0,
            content: NodeContent::Leaf(vec![entry]),
        });
        tree.root = Some(NodeId(tree.nodes.len() - 1));
        tree.height = 1;
        tree.n_entries = 1;
        return Ok(());
    };

    let mut path = vec![root];
    let mut depth = 0;
    while depth + 1 < tree.height {
        let node = *path.last().expect("path starts at root");
        let next = choose_subtree(tree, node, &entry.0, depth + 2 == tree.height);
        path.push(next);
        depth += 1;
    }
    let leaf = *path.last().expect("leaf on path");
    if let NodeContent::Leaf(e) = &mut tree.nodes[leaf.0].content {
        e.push(entry);
    }
    tree.n_entries += 1;

    // Walk back up, splitting overfull nodes.
    let mut carry: Option<NodeId> = None;
    for i in (0..path.len()).rev() {
        let id = path[i];
        if let Some(sibling) = carry.take() {
            if let NodeContent::Internal(c) = &mut tree.nodes[id.0].content {
                let pos = c.iter().position(|&x| x == path[i + 1]).expect("child on path");
                c.insert(pos + 1, sibling);
            }
        }
        recompute_mbr(tree, id);
        if tree.nodes[id.0].len() > tree.order.max {
            carry = Some(split_node(tree, id));
        }
    }
    if let Some(sibling) = carry {
        let children = vec![root, sibling];
        let mbr = tree.nodes[root.0].mbr.union(&tree.nodes[sibling.0].mbr);
        tree.nodes.push(Node {
            mbr,
            content: NodeContent::Internal(children),
        });
        tree.root = Some(NodeId(tree.nodes.len() - 1));
        tree.height += 1;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::SplitMix64;
    use crate::spatial_index::TreeOrder;

    fn unit_box(x: f64, y: f64) -> Aabb {
        Aabb::new([x, y, 0.0], [x + 1.0, y + 1.0, 0.0], 2)
    }

    #[test]
    fn insert_into_empty() {
        let mut t = RTree::empty(2, TreeOrder::new(2, 4).unwrap());
        insert_rstar(&mut t, (unit_box(0.0, 0.0), 0)).unwrap();
        assert_eq!(t.height(), 1);
        assert_eq!(t.node(t.root().unwrap()).len(), 1);
        assert_eq!(t.validate(), Ok(()));
    }

    #[test]
    fn overflow_splits_row() {
        let mut t = RTree::empty(2, TreeOrder::new(2, 4).unwrap());
        for i in 0..5 {
            insert_rstar(&mut t, (unit_box(2.0 * i as f64, 0.0), i)).unwrap();
        }
        assert_eq!(t.height(), 2);
        let kids = t.children(t.root().unwrap());
        let mut occ: Vec<usize> = kids.iter().map(|&k| t.node(k).len()).collect();
        occ.sort();
        assert_eq!(occ, vec![2, 3]);
        assert_eq!(t.validate(), Ok(()));
    }

    #[test]
    fn duplicate_rejected() {
        let mut t = RTree::empty(2, TreeOrder::new(2, 4).unwrap());
        insert_rstar(&mut t, (unit_box(0.0, 0.0), 3)).unwrap();
        assert!(insert_rstar(&mut t, (unit_box(5.0, 0.0), 3)).is_err());
    }

    #[test]
    fn thousand_random_inserts_stay_valid() {
        let mut rng = SplitMix64::new(2024);
        for (mn, mx) in [(2, 4), (4, 8)] {
            let mut t = RTree::empty(2, TreeOrder::new(mn, mx).unwrap());
            for i in 0..1000 {
                let x = 100.0 * rng.next_f64();
                let y = 100.0 * rng.next_f64();
                let w = rng.next_f64();
                let h = rng.next_f64();
                insert_rstar(&mut t, (Aabb::new([x, y, 0.0], [x + w, y + h, 0.0], 2), i)).unwrap();
            }
            assert_eq!(t.validate(), Ok(()));
            assert_eq!(t.n_entries(), 1000);
        }
    }
}
