use super::partition::Partition;
use crate::error::{invalid, Result};
use crate::geometry::{convex_hull_2d, max_pairwise_distance, Point};
use crate::mesh::BackgroundMesh;
use crate::spatial_index::Aabb;

#[derive(Debug, Clone, PartialEq)]
pub struct Agglomerate {
    /// Member fine cells, sorted.
    pub cells: Vec<usize>,
    pub mbr: Aabb,
    pub measure: f64,
    /// h_K, the largest distance between two points of the agglomerate.
    pub diameter: f64,
}

/// A fine face on the agglomerate skeleton. `plus` is the lower agglomerate
/// id and the face normal points from `plus` towards `minus`; boundary faces
/// have no `minus` side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SkeletonFace {
    pub face: usize,
    pub plus: usize,
    pub plus_cell: usize,
    pub minus: Option<usize>,
    pub minus_cell: Option<usize>,
}

impl SkeletonFace {
    pub fn is_boundary(&self) -> bool {
        self.minus.is_none()
    }
}

/// One level of a hierarchy realized as a polytopal mesh over the fine grid.
#[derive(Debug, Clone)]
pub struct PolytopalMesh {
    pub agglomerates: Vec<Agglomerate>,
    pub skeleton: Vec<SkeletonFace>,
    /// Agglomerates whose cells are not face-connected.
    pub disconnected: Vec<usize>,
    /// Fine cell to agglomerate map.
    pub assignment: Vec<usize>,
}

impl PolytopalMesh {
    pub fn n_agglomerates(&self) -> usize {
        self.agglomerates.len()
    }

    pub fn h_max(&self) -> f64 {
        self.agglomerates.iter().map(|a| a.diameter).fold(0.0, f64::max)
    }

    pub fn total_measure(&self) -> f64 {
        self.agglomerates.iter().map(|a| a.measure).sum()
    }

    pub fn n_interior_faces(&self) -> usize {
        self.skeleton.iter().filter(|f| !f.is_boundary()).count()
    }

    pub fn n_boundary_faces(&self) -> usize {
        self.skeleton.iter().filter(|f| f.is_boundary()).count()
    }
}

fn agglomerate_diameter(mesh: &BackgroundMesh, cells: &[usize], boundary_vertices: &[usize]) -> f64 {
    if mesh.dim() == 2 {
        let pts: Vec<Point> = cells.iter().flat_map(|&c| mesh.cell_points(c)).collect();
        return max_pairwise_distance(&convex_hull_2d(&pts));
    }
    // Extreme pairs lie on the agglomerate boundary.
    let pts: Vec<Point> = boundary_vertices.iter().map(|&v| *mesh.vertex(v)).collect();
    max_pairwise_distance(&pts)
}

/// Connected components of `cells` in the face-neighbour graph, largest first.
pub fn components(mesh: &BackgroundMesh, assignment: &[usize], cells: &[usize]) -> Vec<Vec<usize>> {
    let Some(&first) = cells.first() else {
        return Vec::new();
    };
    let part = assignment[first];
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for &start in cells {
        if !seen.insert(start) {
            continue;
        }
        let mut comp = vec![start];
        let mut stack = vec![start];
        while let Some(c) = stack.pop() {
            for &f in mesh.cell_faces(c) {
                let face = &mesh.faces()[f];
                let Some(nb) = face.neighbor else { continue };
                let other = if face.owner == c { nb } else { face.owner };
                if assignment[other] == part && seen.insert(other) {
                    comp.push(other);
                    stack.push(other);
                }
            }
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    out
}

pub fn build_polytopal_mesh(mesh: &BackgroundMesh, partition: &Partition) -> Result<PolytopalMesh> {
    if partition.n_cells() != mesh.n_cells() {
        return invalid(format!(
            "partition covers {} cells, mesh has {}",
            partition.n_cells(),
            mesh.n_cells()
        ));
    }
    let assignment = partition.assignment();
    let groups = partition.groups();
    let mut skeleton = Vec::new();
    let mut boundary_vertices: Vec<Vec<usize>> = vec![Vec::new(); groups.len()];
    for (f, face) in mesh.faces().iter().enumerate() {
        let a = assignment[face.owner];
        match face.neighbor {
            None => {
                skeleton.push(SkeletonFace {
                    face: f,
                    plus: a,
                    plus_cell: face.owner,
                    minus: None,
                    minus_cell: None,
                });
                boundary_vertices[a].extend(&face.vertices);
            }
            Some(nb) => {
                let b = assignment[nb];
                if a == b {
                    continue;
                }
                let (plus, plus_cell, minus, minus_cell) =
                    if a < b { (a, face.owner, b, nb) } else { (b, nb, a, face.owner) };
                skeleton.push(SkeletonFace {
                    face: f,
                    plus,
                    plus_cell,
                    minus: Some(minus),
                    minus_cell: Some(minus_cell),
                });
                boundary_vertices[a].extend(&face.vertices);
                boundary_vertices[b].extend(&face.vertices);
            }
        }
    }
    let mut agglomerates = Vec::with_capacity(groups.len());
    let mut disconnected = Vec::new();
    for (k, cells) in groups.into_iter().enumerate() {
        let mbr = Aabb::from_points(cells.iter().flat_map(|&c| mesh.cell_points(c)), mesh.dim());
        let measure = cells.iter().map(|&c| mesh.cell_measure(c)).sum();
        let bv = &mut boundary_vertices[k];
        bv.sort_unstable();
        bv.dedup();
        let diameter = agglomerate_diameter(mesh, &cells, bv);
        if components(mesh, assignment, &cells).len() > 1 {
            disconnected.push(k);
        }
        agglomerates.push(Agglomerate {
            cells,
            mbr,
            measure,
            diameter,
        });
    }
    if !disconnected.is_empty() {
        log::warn!("{} disconnected agglomerate(s): {:?}", disconnected.len(), disconnected);
    }
    Ok(PolytopalMesh {
        agglomerates,
        skeleton,
        disconnected,
        assignment: assignment.to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agglomeration::build_rtree_hierarchy;
    use crate::mesh::{generate_perturbed_quad, generate_structured_hex, generate_structured_quad};
    use crate::spatial_index::TreeOrder;

    const UNIT: [[f64; 2]; 2] = [[0.0, 0.0], [1.0, 1.0]];

    #[test]
    fn identity_keeps_every_face() {
        let m = generate_structured_quad(4, UNIT).unwrap();
        let p = build_polytopal_mesh(&m, &Partition::identity(16)).unwrap();
        assert_eq!(p.skeleton.len(), m.faces().len());
        for (k, a) in p.agglomerates.iter().enumerate() {
            assert_eq!(a.cells, vec![k]);
            assert!((a.diameter - m.cell_diameter(k)).abs() < 1e-15);
        }
    }

    #[test]
    fn sixteen_blocks() {
        let m = generate_structured_quad(32, UNIT).unwrap();
        let h = build_rtree_hierarchy(&m, TreeOrder::new(2, 4).unwrap(), false).unwrap();
        let level = h.sizes().iter().position(|&s| s == 16).unwrap();
        let p = build_polytopal_mesh(&m, h.level(level)).unwrap();
        assert_eq!(p.n_interior_faces(), 2 * 3 * 32);
        assert_eq!(p.n_boundary_faces(), 4 * 32);
        for a in &p.agglomerates {
            assert!((a.measure - 1.0 / 16.0).abs() < 1e-14);
            assert!((a.diameter - 0.25 * 2f64.sqrt()).abs() < 1e-14);
        }
        assert!(p.disconnected.is_empty());
    }

    #[test]
    fn measure_is_conserved() {
        let m = generate_perturbed_quad(17, 0.35, 9, UNIT).unwrap();
        let h = build_rtree_hierarchy(&m, TreeOrder::new(2, 4).unwrap(), false).unwrap();
        for l in 0..h.n_levels() {
            let p = build_polytopal_mesh(&m, h.level(l)).unwrap();
            assert!((p.total_measure() - 1.0).abs() < 1e-12);
            for a in &p.agglomerates {
                for &c in &a.cells {
                    assert!(a.diameter >= m.cell_diameter(c) - 1e-15);
                }
            }
            for f in &p.skeleton {
                assert!(f.minus.is_none_or(|b| b > f.plus));
            }
        }
    }

    #[test]
    fn disconnected_is_flagged() {
        let m = generate_structured_quad(4, UNIT).unwrap();
        let mut assign = vec![1; 16];
        assign[0] = 0;
        assign[15] = 0;
        let p = build_polytopal_mesh(&m, &Partition::new(assign, 2).unwrap()).unwrap();
        assert_eq!(p.disconnected, vec![0]);
        assert!((p.agglomerates[0].diameter - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn hex_diameter() {
        let m = generate_structured_hex(4, [[0.0; 3], [1.0; 3]]).unwrap();
        let p = build_polytopal_mesh(&m, &Partition::new(vec![0; 64], 1).unwrap()).unwrap();
        assert!((p.agglomerates[0].diameter - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(p.n_boundary_faces(), 96);
    }

    #[test]
    fn size_mismatch() {
        let m = generate_structured_quad(2, UNIT).unwrap();
        assert!(build_polytopal_mesh(&m, &Partition::identity(3)).is_err());
    }
}
