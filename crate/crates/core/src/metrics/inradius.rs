//! Largest inscribed ball of a union of fine cells, by pole-of-inaccessibility
//! search: boxes covering the MBR are refined best-first, ordered by the
//! largest distance any point in the box could still reach.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};

use crate::geometry::{point_segment_distance, point_triangle_distance, Point};
use crate::mesh::BackgroundMesh;
use crate::spatial_index::Aabb;

const MAX_PROBES: usize = 200_000;

struct Region<'a> {
    mesh: &'a BackgroundMesh,
    cells: Vec<(usize, Aabb)>,
    boundary: Vec<usize>,
}

impl Region<'_> {
    fn inside(&self, p: &Point) -> bool {
        self.cells
            .iter()
            .any(|(c, b)| b.contains_point(p, 1e-12) && self.mesh.cell_contains(*c, p, 1e-12))
    }

    fn boundary_distance(&self, p: &Point) -> f64 {
        let mut best = f64::INFINITY;
        for &f in &self.boundary {
            let vs = &self.mesh.faces()[f].vertices;
            let v = |i: usize| self.mesh.vertex(vs[i]);
            let d = match vs.len() {
                2 => point_segment_distance(p, v(0), v(1)),
                3 => point_triangle_distance(p, v(0), v(1), v(2)),
                _ => point_triangle_distance(p, v(0), v(1), v(2)).min(point_triangle_distance(p, v(0), v(2), v(3))),
            };
            best = best.min(d);
        }
        best
    }

    fn signed_distance(&self, p: &Point) -> f64 {
        let d = self.boundary_distance(p);
        if self.inside(p) {
            d
        } else {
            -d
        }
    }
}

struct Probe {
    center: Point,
    half: f64,
    dist: f64,
    bound: f64,
}

impl PartialEq for Probe {
    fn eq(&self, other: &Self) -> bool {
        self.bound == other.bound
    }
}

impl Eq for Probe {}

impl PartialOrd for Probe {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Probe {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound.total_cmp(&other.bound)
    }
}

/// Radius of the largest ball inside the union of `cells`, to within `tol`.
/// `cells` should be face-connected.
pub fn inradius(mesh: &BackgroundMesh, cells: &[usize], tol: f64) -> f64 {
    let dim = mesh.dim();
    let members: HashSet<usize> = cells.iter().copied().collect();
    let mut boundary = Vec::new();
    for &c in cells {
        for &f in mesh.cell_faces(c) {
            let face = &mesh.faces()[f];
            let other = match face.neighbor {
                None => None,
                Some(nb) if face.owner == c => Some(nb),
                Some(_) => Some(face.owner),
            };
            if other.is_none_or(|o| !members.contains(&o)) {
                boundary.push(f);
            }
        }
    }
    let region = Region {
        mesh,
        cells: cells
            .iter()
            .map(|&c| (c, Aabb::from_points(mesh.cell_points(c), dim)))
            .collect(),
        boundary,
    };
    let mbr = Aabb::hull(region.cells.iter().map(|(_, b)| b)).expect("non-empty region");
    let side = (0..dim).map(|k| mbr.extent(k)).fold(f64::INFINITY, f64::min);
    if side <= 0.0 {
        return 0.0;
    }
    let half = side / 2.0;
    let radius = |h: f64| h * (dim as f64).sqrt();
    let make = |center: Point, h: f64| {
        let dist = region.signed_distance(&center);
        Probe {
            center,
            half: h,
            dist,
            bound: dist + radius(h),
        }
    };

    let mut best = make(mbr.center(), 0.0);
    let seed = make(mesh.cell_centroid(cells[0]), 0.0);
    if seed.dist > best.dist {
        best = seed;
    }
    let mut heap = BinaryHeap::new();
    let counts: Vec<usize> = (0..dim).map(|k| (mbr.extent(k) / side).ceil().max(1.0) as usize).collect();
    let total: usize = counts.iter().product();
    for idx in 0..total {
        let mut center = [0.0; 3];
        let mut rest = idx;
        for k in 0..dim {
            center[k] = mbr.lo[k] + side * ((rest % counts[k]) as f64 + 0.5);
            rest /= counts[k];
        }
        heap.push(make(center, half));
    }
    let mut probes = total;
    while let Some(p) = heap.pop() {
        if p.dist > best.dist {
            best = Probe { bound: p.dist, ..p };
        }
        if p.bound - best.dist <= tol || probes >= MAX_PROBES {
            break;
        }
        let h = p.half / 2.0;
        for corner in 0..(1usize << dim) {
            let mut center = p.center;
            for (k, x) in center.iter_mut().enumerate().take(dim) {
                *x += if corner >> k & 1 == 1 { h } else { -h };
            }
            heap.push(make(center, h));
            probes += 1;
        }
    }
    best.dist.max(0.0)
}
