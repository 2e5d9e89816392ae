use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::Point;
use crate::mesh::BackgroundMesh;

/// Axis-aligned box in `dim` dimensions. Unused trailing axes are zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub lo: Point,
    pub hi: Point,
    pub dim: usize,
}

impl Aabb {
    pub fn new(lo: Point, hi: Point, dim: usize) -> Self {
        debug_assert!((0..dim).all(|k| lo[k] <= hi[k]));
        Self { lo, hi, dim }
    }

    pub fn from_points(points: impl IntoIterator<Item = Point>, dim: usize) -> Self {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in points {
            for k in 0..dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        for k in dim..3 {
            lo[k] = 0.0;
            hi[k] = 0.0;
        }
        Self { lo, hi, dim }
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        let mut out = *self;
        for k in 0..self.dim {
            out.lo[k] = self.lo[k].min(other.lo[k]);
            out.hi[k] = self.hi[k].max(other.hi[k]);
        }
        out
    }

    pub fn hull<'a>(boxes: impl IntoIterator<Item = &'a Aabb>) -> Option<Aabb> {
        let mut it = boxes.into_iter();
        let first = *it.next()?;
        Some(it.fold(first, |acc, b| acc.union(b)))
    }

    pub fn extent(&self, k: usize) -> f64 {
        self.hi[k] - self.lo[k]
    }

    pub fn measure(&self) -> f64 {
        (0..self.dim).map(|k| self.extent(k)).product()
    }

    /// Sum of edge lengths (half perimeter in 2D); the R* margin.
    pub fn margin(&self) -> f64 {
        (0..self.dim).map(|k| self.extent(k)).sum()
    }

    pub fn center(&self) -> Point {
        let mut c = [0.0; 3];
        for k in 0..self.dim {
            c[k] = 0.5 * (self.lo[k] + self.hi[k]);
        }
        c
    }

    pub fn diagonal(&self) -> f64 {
        (0..self.dim).map(|k| self.extent(k).powi(2)).sum::<f64>().sqrt()
    }

    pub fn intersection_measure(&self, other: &Aabb) -> f64 {
        let mut m = 1.0;
        for k in 0..self.dim {
            let w = self.hi[k].min(other.hi[k]) - self.lo[k].max(other.lo[k]);
            if w <= 0.0 {
                return 0.0;
            }
            m *= w;
        }
        m
    }

    pub fn contains_point(&self, p: &Point, tol: f64) -> bool {
        (0..self.dim).all(|k| p[k] >= self.lo[k] - tol && p[k] <= self.hi[k] + tol)
    }

    pub fn contains_box(&self, other: &Aabb) -> bool {
        (0..self.dim).all(|k| other.lo[k] >= self.lo[k] && other.hi[k] <= self.hi[k])
    }

    pub fn is_point(&self) -> bool {
        (0..self.dim).all(|k| self.lo[k] == self.hi[k])
    }
}

/// Minimum bounding rectangle of a fine cell.
pub fn mbr_of_cell(mesh: &BackgroundMesh, cell: usize) -> Result<Aabb> {
    if cell >= mesh.n_cells() {
        return invalid(format!("cell {cell} out of range ({} cells)", mesh.n_cells()));
    }
    Ok(Aabb::from_points(mesh.cell_points(cell), mesh.dim()))
}

/// MBR of every cell, paired with the cell id.
pub fn cell_entries(mesh: &BackgroundMesh) -> Vec<(Aabb, usize)> {
    (0..mesh.n_cells())
        .map(|c| (Aabb::from_points(mesh.cell_points(c), mesh.dim()), c))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_structured_quad, BackgroundMesh, Cell, CellKind};

    fn single(kind: CellKind, pts: Vec<Point>) -> BackgroundMesh {
        let n = pts.len();
        BackgroundMesh::new(
            2,
            pts,
            vec![Cell {
                kind,
                vertices: (0..n).collect(),
            }],
            None,
        )
        .unwrap()
    }

    #[test]
    fn square_cell_is_its_own_mbr() {
        let m = generate_structured_quad(1, [[0.0, 0.0], [1.0, 1.0]]).unwrap();
        let b = mbr_of_cell(&m, 0).unwrap();
        assert_eq!((b.lo, b.hi), ([0.0; 3], [1.0, 1.0, 0.0]));
        assert_eq!(b.measure(), m.cell_measure(0));
    }

    #[test]
    fn triangle_mbr() {
        let m = single(
            CellKind::Tri,
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
        );
        let b = mbr_of_cell(&m, 0).unwrap();
        assert_eq!((b.lo, b.hi), ([0.0; 3], [1.0, 1.0, 0.0]));
    }

    #[test]
    fn rotated_square_mbr() {
        let m = single(
            CellKind::Quad,
            vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, -1.0, 0.0]],
        );
        let b = mbr_of_cell(&m, 0).unwrap();
        assert_eq!((b.lo, b.hi), ([-1.0, -1.0, 0.0], [1.0, 1.0, 0.0]));
        assert!(mbr_of_cell(&m, 1).is_err());
    }

    #[test]
    fn overlap_and_margin() {
        let a = Aabb::new([0.0; 3], [2.0, 1.0, 0.0], 2);
        let b = Aabb::new([1.0, 0.0, 0.0], [3.0, 2.0, 0.0], 2);
        assert_eq!(a.intersection_measure(&b), 1.0);
        assert_eq!(a.margin(), 3.0);
        assert_eq!(a.union(&b).measure(), 6.0);
        let c = Aabb::new([2.0, 0.0, 0.0], [3.0, 1.0, 0.0], 2);
        assert_eq!(a.intersection_measure(&c), 0.0);
    }
}
