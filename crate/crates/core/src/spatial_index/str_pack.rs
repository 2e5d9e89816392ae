//! Sort-tile-recursive bulk loading.
//!
//! Entries are sorted by the first center coordinate and cut into slabs of
//! `M * ceil(P / S)` entries, `P = ceil(n / M)` and `S = ceil(P^(1/d))`;
//! each slab is tiled the same way along the next axis, and the last axis is
//! packed into runs of `M`. Runs left with fewer than `m` entries borrow from
//! their neighbour. The procedure repeats on the node boxes until a single
//! root remains.

use std::ops::Range;

use super::rtree::{Node, NodeContent, NodeId, RTree, TreeOrder};
use super::Aabb;
use crate::error::{invalid, Result};

/// Smallest `s` with `s^r >= p`.
fn int_root_ceil(p: usize, r: u32) -> usize {
    let mut s = (p as f64).powf(1.0 / r as f64).floor() as usize;
    s = s.max(1);
    while s.pow(r) < p {
        s += 1;
    }
    while s > 1 && (s - 1).pow(r) >= p {
        s -= 1;
    }
    s
}

fn tile(items: &mut [(Aabb, usize)], offset: usize, axis: usize, dim: usize, max: usize, runs: &mut Vec<Range<usize>>) {
    let n = items.len();
    if n == 0 {
        return;
    }
    items.sort_by(|a, b| {
        a.0.center()[axis]
            .total_cmp(&b.0.center()[axis])
            .then(a.1.cmp(&b.1))
    });
    if axis + 1 == dim {
        let mut start = 0;
        while start < n {
            let end = (start + max).min(n);
            runs.push(offset + start..offset + end);
            start = end;
        }
        return;
    }
    let pages = n.div_ceil(max);
    let slabs = int_root_ceil(pages, (dim - axis) as u32);
    let cap = max * pages.div_ceil(slabs);
    let mut start = 0;
    while start < n {
        let end = (start + cap).min(n);
        tile(&mut items[start..end], offset + start, axis + 1, dim, max, runs);
        start = end;
    }
}

/// Merges runs shorter than `min` into a neighbour and re-splits evenly.
fn rebalance(runs: &mut Vec<Range<usize>>, min: usize, max: usize) {
    let mut i = 0;
    while i < runs.len() {
        if runs[i].len() >= min || runs.len() == 1 {
            i += 1;
            continue;
        }
        let (a, b) = if i > 0 { (i - 1, i) } else { (0, 1) };
        let merged = runs[a].start..runs[b].end;
        if merged.len() > max {
            let mid = merged.start + merged.len() / 2;
            runs[a] = merged.start..mid;
            runs[b] = mid..merged.end;
        } else {
            runs[a] = merged;
            runs.remove(b);
        }
        i = a;
    }
}

fn pack(items: &mut [(Aabb, usize)], dim: usize, order: TreeOrder) -> Vec<Range<usize>> {
    let mut runs = Vec::new();
    tile(items, 0, 0, dim, order.max, &mut runs);
    rebalance(&mut runs, order.min, order.max);
    runs
}

/// Bulk-builds an R-tree of order `order` over `(MBR, id)` entries.
pub fn build_str(entries: &[(Aabb, usize)], order: TreeOrder) -> Result<RTree> {
    let order = TreeOrder::new(order.min, order.max)?;
    let Some(first) = entries.first() else {
        return invalid("cannot build an R-tree without entries");
    };
    let dim = first.0.dim;
    if entries.iter().any(|e| e.0.dim != dim) {
        return invalid("entries of mixed dimension");
    }
    let mut tree = RTree::empty(dim, order);
    tree.n_entries = entries.len();

    let mut items: Vec<(Aabb, usize)> = entries.to_vec();
    let mut level: Vec<(Aabb, usize)> = Vec::new();
    for run in pack(&mut items, dim, order) {
        let chunk = items[run].to_vec();
        let mbr = Aabb::hull(chunk.iter().map(|e| &e.0)).expect("non-empty run");
        level.push((mbr, tree.nodes.len()));
        tree.nodes.push(Node {
            mbr,
            content: NodeContent::Leaf(chunk),
        });
    }
    tree.height = 1;
    while level.len() > 1 {
        let mut next = Vec::new();
        let mut items = std::mem::take(&mut level);
        for run in pack(&mut items, dim, order) {
            let children: Vec<NodeId> = items[run.clone()].iter().map(|e| NodeId(e.1)).collect();
            let mbr = Aabb::hull(items[run].iter().map(|e| &e.0)).expect("non-empty run");
            next.push((mbr, tree.nodes.len()));
            tree.nodes.push(Node {
                mbr,
                content: NodeContent::Internal(children),
            });
        }
        level = next;
        tree.height += 1;
    }
    tree.root = Some(NodeId(level[0].1));
    Ok(tree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_structured_hex, generate_structured_quad};
    use crate::spatial_index::cell_entries;

    #[test]
    fn integer_roots() {
        assert_eq!(int_root_ceil(256, 2), 16);
        assert_eq!(int_root_ceil(257, 2), 17);
        assert_eq!(int_root_ceil(512, 3), 8);
        assert_eq!(int_root_ceil(1, 3), 1);
        assert_eq!(int_root_ceil(9, 3), 3);
    }

    #[test]
    fn single_entry_is_root_leaf() {
        let b = Aabb::new([0.0; 3], [1.0, 1.0, 0.0], 2);
        let t = build_str(&[(b, 0)], TreeOrder::new(2, 4).unwrap()).unwrap();
        assert_eq!(t.height(), 1);
        assert!(t.node(t.root().unwrap()).is_leaf());
        assert_eq!(t.validate(), Ok(()));
    }

    #[test]
    fn empty_and_bad_order_rejected() {
        assert!(build_str(&[], TreeOrder { min: 2, max: 4 }).is_err());
        let b = Aabb::new([0.0; 3], [1.0, 1.0, 0.0], 2);
        assert!(build_str(&[(b, 0)], TreeOrder { min: 3, max: 4 }).is_err());
    }

    #[test]
    fn grid_32_levels() {
        let m = generate_structured_quad(32, [[0.0, 0.0], [1.0, 1.0]]).unwrap();
        let t = build_str(&cell_entries(&m), TreeOrder::new(2, 4).unwrap()).unwrap();
        assert_eq!(t.validate(), Ok(()));
        assert_eq!(t.height(), 5);
        assert_eq!(t.level_sizes(), vec![1, 4, 16, 64, 256]);
        for leaf in t.nodes_at_depth(4).unwrap() {
            assert_eq!(t.node(leaf).len(), 4);
        }
        assert_eq!(t.nodes_at_depth(2).unwrap().len(), 16);
    }

    #[test]
    fn cube_16_levels_are_cubes() {
        let m = generate_structured_hex(16, [[0.0; 3], [1.0; 3]]).unwrap();
        let t = build_str(&cell_entries(&m), TreeOrder::new(4, 8).unwrap()).unwrap();
        assert_eq!(t.validate(), Ok(()));
        assert_eq!(t.level_sizes(), vec![1, 8, 64, 512]);
        for k in 0..t.height() {
            for n in t.nodes_at_depth(k).unwrap() {
                let b = t.node(n).mbr;
                let e = b.extent(0);
                assert!((b.extent(1) - e).abs() < 1e-14 && (b.extent(2) - e).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn deterministic() {
        let m = generate_structured_quad(13, [[0.0, 0.0], [1.0, 1.0]]).unwrap();
        let e = cell_entries(&m);
        let a = build_str(&e, TreeOrder::new(2, 4).unwrap()).unwrap();
        let b = build_str(&e, TreeOrder::new(2, 4).unwrap()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.validate(), Ok(()));
    }

    #[test]
    fn awkward_sizes_stay_valid() {
        for n in 1..60 {
            let entries: Vec<_> = (0..n)
                .map(|i| {
                    let x = (i * 7 % 11) as f64;
                    let y = (i * 3 % 5) as f64;
                    (Aabb::new([x, y, 0.0], [x + 0.5, y + 0.5, 0.0], 2), i)
                })
                .collect();
            for (mn, mx) in [(2, 4), (2, 5), (3, 6), (4, 8)] {
                let t = build_str(&entries, TreeOrder::new(mn, mx).unwrap()).unwrap();
                assert_eq!(t.validate(), Ok(()), "n={n} order=({mn},{mx})");
            }
        }
    }
}
