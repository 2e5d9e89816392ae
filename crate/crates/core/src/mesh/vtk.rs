//! Legacy ASCII VTK (version 2.0) `UNSTRUCTURED_GRID` writer.

use std::fmt::Write as _;
use std::path::Path;

use super::{BackgroundMesh, CellKind};
use crate::error::{invalid, Result};

fn vtk_type(kind: CellKind) -> u8 {
    match kind {
        CellKind::Tri => 5,
        CellKind::Quad => 9,
        CellKind::Tet => 10,
        CellKind::Hex => 12,
    }
}

/// Writes the mesh with one `SCALARS` block per named cell array.
pub fn write_vtk(
    mesh: &BackgroundMesh,
    cell_scalars: &[(&str, &[f64])],
    path: impl AsRef<Path>,
) -> Result<()> {
    let s = write_vtk_string(mesh, cell_scalars)?;
    std::fs::write(path, s)?;
    Ok(())
}

pub fn write_vtk_string(mesh: &BackgroundMesh, cell_scalars: &[(&str, &[f64])]) -> Result<String> {
    for (name, values) in cell_scalars {
        if values.len() != mesh.n_cells() {
            return invalid(format!(
                "cell array {name:?} has {} values for {} cells",
                values.len(),
                mesh.n_cells()
            ));
        }
        if name.is_empty() || name.contains(char::is_whitespace) {
            return invalid(format!("cell array name {name:?} must be a non-empty word"));
        }
    }
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 2.0\npolyagglo mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {} double", mesh.n_vertices());
    for p in mesh.vertices() {
        let _ = writeln!(s, "{:e} {:e} {:e}", p[0], p[1], p[2]);
    }
    let size: usize = mesh.cells().iter().map(|c| c.vertices.len() + 1).sum();
    let _ = writeln!(s, "CELLS {} {}", mesh.n_cells(), size);
    for c in mesh.cells() {
        let _ = write!(s, "{}", c.vertices.len());
        for v in &c.vertices {
            let _ = write!(s, " {v}");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "CELL_TYPES {}", mesh.n_cells());
    for c in mesh.cells() {
        let _ = writeln!(s, "{}", vtk_type(c.kind));
    }
    if !cell_scalars.is_empty() {
        let _ = writeln!(s, "CELL_DATA {}", mesh.n_cells());
        for (name, values) in cell_scalars {
            let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
            for v in values.iter() {
                let _ = writeln!(s, "{v:e}");
            }
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_structured_quad;

    const UNIT: [[f64; 2]; 2] = [[0.0, 0.0], [1.0, 1.0]];

    /// Minimal reader for the SCALARS blocks we write.
    fn reparse_scalars(text: &str, name: &str) -> Vec<f64> {
        let mut lines = text.lines();
        let header = format!("SCALARS {name} double 1");
        lines.by_ref().find(|l| *l == header).expect("scalar block");
        assert_eq!(lines.next(), Some("LOOKUP_TABLE default"));
        lines
            .map_while(|l| l.parse::<f64>().ok())
            .collect()
    }

    #[test]
    fn one_cell() {
        let m = generate_structured_quad(1, UNIT).unwrap();
        let s = write_vtk_string(&m, &[("agglomerate", &[0.0])]).unwrap();
        assert!(s.contains("CELL_DATA 1"));
        assert!(s.contains("CELL_TYPES 1\n9\n"));
    }

    #[test]
    fn ids_survive_reparse() {
        let m = generate_structured_quad(2, UNIT).unwrap();
        let ids = [0.0, 0.0, 1.0, 1.0];
        let s = write_vtk_string(&m, &[("agglomerate", &ids)]).unwrap();
        let back = reparse_scalars(&s, "agglomerate");
        assert_eq!(back, ids);
        let mut distinct = back.clone();
        distinct.dedup();
        assert_eq!(distinct.len(), 2);
    }

    #[test]
    fn length_mismatch_rejected() {
        let m = generate_structured_quad(2, UNIT).unwrap();
        assert!(write_vtk_string(&m, &[("a", &[0.0, 1.0, 2.0])]).is_err());
    }

    #[test]
    fn io_failure_surfaced() {
        let m = generate_structured_quad(1, UNIT).unwrap();
        assert!(write_vtk(&m, &[], "/nonexistent-dir/x.vtk").is_err());
    }
}
