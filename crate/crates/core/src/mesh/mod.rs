//! Fine background grids: storage, face extraction and dual adjacency.
//!
//! A [`BackgroundMesh`] holds triangles/quadrilaterals in 2D or
//! tetrahedra/hexahedra in 3D using Gmsh vertex ordering. Faces are
//! deduplicated through their sorted vertex key and owned by the lower cell
//! id; boundary faces have no neighbour.

mod generate;
mod msh;
mod vtk;

pub use generate::{
    generate_perturbed_quad, generate_perturbed_quad_counts, generate_structured_hex,
    generate_structured_hex_counts, generate_structured_quad, generate_structured_quad_counts,
    SplitMix64,
};
pub use msh::{read_msh, read_msh_str, write_msh};
pub use vtk::{write_vtk, write_vtk_string};

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::{self, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum CellKind {
    Tri,
    Quad,
    Tet,
    Hex,
}

impl CellKind {
    pub fn n_vertices(self) -> usize {
        match self {
            CellKind::Tri => 3,
            CellKind::Quad => 4,
            CellKind::Tet => 4,
            CellKind::Hex => 8,
        }
    }

    pub fn is_simplex(self) -> bool {
        matches!(self, CellKind::Tri | CellKind::Tet)
    }

    pub fn dim(self) -> usize {
        match self {
            CellKind::Tri | CellKind::Quad => 2,
            CellKind::Tet | CellKind::Hex => 3,
        }
    }

    /// Local faces, oriented outward for positively oriented cells.
    pub fn local_faces(self) -> &'static [&'static [usize]] {
        match self {
            CellKind::Tri => &[&[0, 1], &[1, 2], &[2, 0]],
            CellKind::Quad => &[&[0, 1], &[1, 2], &[2, 3], &[3, 0]],
            CellKind::Tet => &[&[0, 2, 1], &[0, 1, 3], &[0, 3, 2], &[1, 2, 3]],
            CellKind::Hex => &[
                &[0, 3, 2, 1],
                &[0, 1, 5, 4],
                &[0, 4, 7, 3],
                &[1, 2, 6, 5],
                &[2, 3, 7, 6],
                &[4, 5, 6, 7],
            ],
        }
    }

    /// Vertex permutation that flips the orientation of the cell.
    fn mirror(self) -> &'static [usize] {
        match self {
            CellKind::Tri => &[0, 2, 1],
            CellKind::Quad => &[0, 3, 2, 1],
            CellKind::Tet => &[0, 2, 1, 3],
            CellKind::Hex => &[0, 3, 2, 1, 4, 7, 6, 5],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub kind: CellKind,
    pub vertices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    /// Vertices in the owner's outward orientation.
    pub vertices: Vec<usize>,
    pub owner: usize,
    pub neighbor: Option<usize>,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.neighbor.is_none()
    }
}

#[derive(Debug, Clone)]
pub struct BackgroundMesh {
    dim: usize,
    vertices: Vec<Point>,
    cells: Vec<Cell>,
    faces: Vec<Face>,
    cell_faces: Vec<Vec<usize>>,
    material: Option<Vec<u32>>,
    measures: Vec<f64>,
}

/// Face-neighbour graph of the cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualGraph {
    pub adjacency: Vec<Vec<usize>>,
}

impl DualGraph {
    pub fn n_edges(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, cell: usize) -> &[usize] {
        &self.adjacency[cell]
    }
}

fn face_key(vs: &[usize]) -> [usize; 4] {
    let mut key = [usize::MAX; 4];
    key[..vs.len()].copy_from_slice(vs);
    key[..vs.len()].sort_unstable();
    key
}

impl BackgroundMesh {
    /// Validates connectivity, fixes cell orientation and extracts faces.
    pub fn new(
        dim: usize,
        vertices: Vec<Point>,
        cells: Vec<Cell>,
        material: Option<Vec<u32>>,
    ) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidMesh(format!("dimension {dim} not supported")));
        }
        if vertices.is_empty() || cells.is_empty() {
            return Err(Error::InvalidMesh("mesh has no vertices or no cells".into()));
        }
        if let Some(m) = &material {
            if m.len() != cells.len() {
                return Err(Error::InvalidMesh(format!(
                    "{} material labels for {} cells",
                    m.len(),
                    cells.len()
                )));
            }
        }
        let mut cells = cells;
        let mut measures = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter_mut().enumerate() {
            if cell.kind.dim() != dim {
                return Err(Error::InvalidMesh(format!(
                    "cell {c} of kind {:?} in a {dim}D mesh",
                    cell.kind
                )));
            }
            if cell.vertices.len() != cell.kind.n_vertices() {
                return Err(Error::InvalidMesh(format!(
                    "cell {c} has {} vertices, expected {}",
                    cell.vertices.len(),
                    cell.kind.n_vertices()
                )));
            }
            if let Some(&v) = cell.vertices.iter().find(|&&v| v >= vertices.len()) {
                return Err(Error::InvalidMesh(format!(
                    "cell {c} references vertex {v} of {}",
                    vertices.len()
                )));
            }
            let mut m = signed_measure(cell, &vertices);
            if m < 0.0 {
                let perm = cell.kind.mirror();
                cell.vertices = perm.iter().map(|&i| cell.vertices[i]).collect();
                m = signed_measure(cell, &vertices);
            }
            if m <= 0.0 || !m.is_finite() {
                return Err(Error::InvalidMesh(format!("cell {c} has non-positive measure")));
            }
            measures.push(m);
        }

        let mut faces: Vec<Face> = Vec::new();
        let mut cell_faces = Vec::with_capacity(cells.len());
        let mut lookup: HashMap<[usize; 4], usize> = HashMap::new();
        for (c, cell) in cells.iter().enumerate() {
            let mut local = Vec::with_capacity(cell.kind.local_faces().len());
            for lf in cell.kind.local_faces() {
                let vs: Vec<usize> = lf.iter().map(|&i| cell.vertices[i]).collect();
                let key = face_key(&vs);
                match lookup.get(&key) {
                    Some(&f) => {
                        let face = &mut faces[f];
                        if face.neighbor.is_some() || face.owner == c {
                            return Err(Error::InvalidMesh(format!(
                                "face {vs:?} shared by more than two cells"
                            )));
                        }
                        face.neighbor = Some(c);
                        local.push(f);
                    }
                    None => {
                        lookup.insert(key, faces.len());
                        local.push(faces.len());
                        faces.push(Face {
                            vertices: vs,
                            owner: c,
                            neighbor: None,
                        });
                    }
                }
            }
            cell_faces.push(local);
        }

        Ok(Self {
            dim,
            vertices,
            cells,
            faces,
            cell_faces,
            material,
            measures,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &Point {
        &self.vertices[i]
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn cell(&self, c: usize) -> &Cell {
        &self.cells[c]
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn cell_faces(&self, c: usize) -> &[usize] {
        &self.cell_faces[c]
    }

    pub fn material(&self) -> Option<&[u32]> {
        self.material.as_deref()
    }

    pub fn set_material(&mut self, material: Vec<u32>) -> Result<()> {
        if material.len() != self.n_cells() {
            return Err(Error::InvalidArgument(format!(
                "{} material labels for {} cells",
                material.len(),
                self.n_cells()
            )));
        }
        self.material = Some(material);
        Ok(())
    }

    pub fn n_boundary_faces(&self) -> usize {
        self.faces.iter().filter(|f| f.is_boundary()).count()
    }

    pub fn n_interior_faces(&self) -> usize {
        self.faces.len() - self.n_boundary_faces()
    }

    pub fn cell_points(&self, c: usize) -> impl Iterator<Item = Point> + '_ {
        self.cells[c].vertices.iter().map(|&v| self.vertices[v])
    }

    pub fn cell_measure(&self, c: usize) -> f64 {
        self.measures[c]
    }

    pub fn total_measure(&self) -> f64 {
        self.measures.iter().sum()
    }

    pub fn cell_centroid(&self, c: usize) -> Point {
        geometry::centroid(self.cell_points(c))
    }

    pub fn cell_diameter(&self, c: usize) -> f64 {
        let pts: Vec<Point> = self.cell_points(c).collect();
        geometry::max_pairwise_distance(&pts)
    }

    /// Point-in-cell test, boundary inclusive up to `tol`.
    pub fn cell_contains(&self, c: usize, p: &Point, tol: f64) -> bool {
        let cell = &self.cells[c];
        let v = |i: usize| &self.vertices[cell.vertices[i]];
        match cell.kind {
            CellKind::Tri => in_triangle_2d(p, v(0), v(1), v(2), tol),
            CellKind::Quad => {
                in_triangle_2d(p, v(0), v(1), v(2), tol) || in_triangle_2d(p, v(0), v(2), v(3), tol)
            }
            CellKind::Tet => in_tet(p, v(0), v(1), v(2), v(3), tol),
            CellKind::Hex => HEX_TETS
                .iter()
                .any(|t| in_tet(p, v(t[0]), v(t[1]), v(t[2]), v(t[3]), tol)),
        }
    }

    /// Face-neighbour graph; neighbour lists are sorted.
    pub fn dual_adjacency(&self) -> DualGraph {
        let mut adjacency = vec![Vec::new(); self.n_cells()];
        for f in &self.faces {
            if let Some(nb) = f.neighbor {
                adjacency[f.owner].push(nb);
                adjacency[nb].push(f.owner);
            }
        }
        for a in adjacency.iter_mut() {
            a.sort_unstable();
            a.dedup();
        }
        DualGraph { adjacency }
    }

    /// Bounding box of all vertices, as (lo, hi).
    pub fn bounds(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for p in &self.vertices {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }
}

/// Split of a hexahedron into six tetrahedra around the 0-6 diagonal.
const HEX_TETS: [[usize; 4]; 6] = [
    [0, 1, 2, 6],
    [0, 2, 3, 6],
    [0, 3, 7, 6],
    [0, 7, 4, 6],
    [0, 4, 5, 6],
    [0, 5, 1, 6],
];

fn orient2d(a: &Point, b: &Point, c: &Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn in_triangle_2d(p: &Point, a: &Point, b: &Point, c: &Point, tol: f64) -> bool {
    let area = orient2d(a, b, c);
    let s = area.signum();
    let eps = tol * area.abs().sqrt();
    let e = |x: &Point, y: &Point| s * orient2d(x, y, p) / geometry::dist(x, y).max(f64::MIN_POSITIVE);
    e(a, b) >= -eps && e(b, c) >= -eps && e(c, a) >= -eps
}

fn tet_volume6(a: &Point, b: &Point, c: &Point, d: &Point) -> f64 {
    geometry::dot(
        &geometry::sub(b, a),
        &geometry::cross(&geometry::sub(c, a), &geometry::sub(d, a)),
    )
}

fn in_tet(p: &Point, a: &Point, b: &Point, c: &Point, d: &Point, tol: f64) -> bool {
    let vol = tet_volume6(a, b, c, d);
    if vol == 0.0 {
        return false;
    }
    let eps = tol * vol.abs();
    let s = vol.signum();
    s * tet_volume6(p, b, c, d) >= -eps
        && s * tet_volume6(a, p, c, d) >= -eps
        && s * tet_volume6(a, b, p, d) >= -eps
        && s * tet_volume6(a, b, c, p) >= -eps
}

/// Signed measure; positive for the outward-oriented vertex ordering.
fn signed_measure(cell: &Cell, vertices: &[Point]) -> f64 {
    let v = |i: usize| &vertices[cell.vertices[i]];
    match cell.kind {
        CellKind::Tri => 0.5 * orient2d(v(0), v(1), v(2)),
        CellKind::Quad => {
            let mut s = 0.0;
            for i in 0..4 {
                let a = v(i);
                let b = v((i + 1) % 4);
                s += a[0] * b[1] - b[0] * a[1];
            }
            0.5 * s
        }
        CellKind::Tet => tet_volume6(v(0), v(1), v(2), v(3)) / 6.0,
        CellKind::Hex => {
            // Trilinear Jacobian determinant is of degree <= 2 per variable,
            // so the 2-point Gauss rule integrates it exactly.
            let g = 0.5 / 3f64.sqrt();
            let pts = [0.5 - g, 0.5 + g];
            let mut vol = 0.0;
            for &x in &pts {
                for &y in &pts {
                    for &z in &pts {
                        vol += 0.125 * trilinear_jacobian_det(cell, vertices, [x, y, z]);
                    }
                }
            }
            vol
        }
    }
}

pub(crate) fn trilinear_jacobian_det(cell: &Cell, vertices: &[Point], xi: [f64; 3]) -> f64 {
    let j = trilinear_jacobian(cell, vertices, xi);
    geometry::dot(&j[0], &geometry::cross(&j[1], &j[2]))
}

/// Columns d x / d xi_k of the trilinear map of a hex on `[0,1]^3`.
pub(crate) fn trilinear_jacobian(cell: &Cell, vertices: &[Point], xi: [f64; 3]) -> [Point; 3] {
    let mut cols = [[0.0; 3]; 3];
    for (a, &(i, j, k)) in HEX_CORNERS.iter().enumerate() {
        let p = &vertices[cell.vertices[a]];
        let fx = if i == 0 { 1.0 - xi[0] } else { xi[0] };
        let fy = if j == 0 { 1.0 - xi[1] } else { xi[1] };
        let fz = if k == 0 { 1.0 - xi[2] } else { xi[2] };
        let dx = if i == 0 { -1.0 } else { 1.0 };
        let dy = if j == 0 { -1.0 } else { 1.0 };
        let dz = if k == 0 { -1.0 } else { 1.0 };
        for d in 0..3 {
            cols[0][d] += dx * fy * fz * p[d];
            cols[1][d] += fx * dy * fz * p[d];
            cols[2][d] += fx * fy * dz * p[d];
        }
    }
    cols
}

/// Reference corner (i, j, k) of each Gmsh hex vertex.
pub(crate) const HEX_CORNERS: [(u8, u8, u8); 8] = [
    (0, 0, 0),
    (1, 0, 0),
    (1, 1, 0),
    (0, 1, 0),
    (0, 0, 1),
    (1, 0, 1),
    (1, 1, 1),
    (0, 1, 1),
];

/// Reference corner (i, j) of each quad vertex.
pub(crate) const QUAD_CORNERS: [(u8, u8); 4] = [(0, 0), (1, 0), (1, 1), (0, 1)];

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square_cell() -> BackgroundMesh {
        BackgroundMesh::new(
            2,
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]],
            vec![Cell {
                kind: CellKind::Quad,
                vertices: vec![0, 1, 2, 3],
            }],
            None,
        )
        .unwrap()
    }

    #[test]
    fn single_quad_has_four_boundary_faces() {
        let m = unit_square_cell();
        assert_eq!(m.faces().len(), 4);
        assert_eq!(m.n_boundary_faces(), 4);
        assert!((m.cell_measure(0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn clockwise_quad_is_reoriented() {
        let m = BackgroundMesh::new(
            2,
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]],
            vec![Cell {
                kind: CellKind::Quad,
                vertices: vec![0, 3, 2, 1],
            }],
            None,
        )
        .unwrap();
        assert_eq!(m.cell(0).vertices, vec![0, 1, 2, 3]);
    }

    #[test]
    fn dangling_vertex_rejected() {
        let err = BackgroundMesh::new(
            2,
            vec![[0.0, 0.0, 0.0]],
            vec![Cell {
                kind: CellKind::Tri,
                vertices: vec![0, 1, 2],
            }],
            None,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidMesh(_)));
    }

    #[test]
    fn degenerate_cell_rejected() {
        let err = BackgroundMesh::new(
            2,
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]],
            vec![Cell {
                kind: CellKind::Tri,
                vertices: vec![0, 1, 2],
            }],
            None,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidMesh(_)));
    }

    #[test]
    fn containment() {
        let m = unit_square_cell();
        assert!(m.cell_contains(0, &[0.5, 0.5, 0.0], 0.0));
        assert!(m.cell_contains(0, &[1.0, 0.5, 0.0], 1e-12));
        assert!(!m.cell_contains(0, &[1.1, 0.5, 0.0], 1e-12));
        let h = generate_structured_hex(1, [[0.0; 3], [1.0; 3]]).unwrap();
        assert!(h.cell_contains(0, &[0.3, 0.9, 0.2], 0.0));
        assert!(!h.cell_contains(0, &[0.3, 1.2, 0.2], 1e-12));
    }

    #[test]
    fn strip_dual() {
        let m = generate_structured_quad_counts([2, 1], [[0.0, 0.0], [2.0, 1.0]]).unwrap();
        let g = m.dual_adjacency();
        assert_eq!(g.adjacency, vec![vec![1], vec![0]]);
    }

    #[test]
    fn center_of_3x3_has_four_neighbors() {
        let m = generate_structured_quad(3, [[0.0, 0.0], [1.0, 1.0]]).unwrap();
        let g = m.dual_adjacency();
        assert_eq!(g.neighbors(4), &[1, 3, 5, 7]);
    }

    #[test]
    fn dual_edge_count_matches_formula() {
        let n = 8;
        let m = generate_structured_quad(n, [[0.0, 0.0], [1.0, 1.0]]).unwrap();
        let g = m.dual_adjacency();
        assert_eq!(g.n_edges(), 2 * n * (n - 1));
        for (i, adj) in g.adjacency.iter().enumerate() {
            assert!(adj.len() <= m.cell_faces(i).len());
            for &j in adj {
                assert_ne!(i, j);
                assert!(g.adjacency[j].contains(&i));
            }
        }
    }

    #[test]
    fn face_multiset_is_exhaustive() {
        let m = generate_perturbed_quad(6, 0.3, 9, [[0.0, 0.0], [1.0, 1.0]]).unwrap();
        let mut incidence = vec![0usize; m.faces().len()];
        for c in 0..m.n_cells() {
            for &f in m.cell_faces(c) {
                incidence[f] += 1;
            }
        }
        for (f, face) in m.faces().iter().enumerate() {
            assert_eq!(incidence[f], if face.is_boundary() { 1 } else { 2 });
            if let Some(nb) = face.neighbor {
                assert!(face.owner < nb);
            }
        }
    }
}
