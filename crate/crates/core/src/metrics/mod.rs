//! Agglomerate quality: uniformity factor, circle ratio, box ratio and the
//! mesh overlap factor.

mod inradius;

pub use inradius::inradius;

use std::fmt::Write as _;

use serde::Serialize;

use crate::agglomeration::{components, PolytopalMesh};
use crate::error::{invalid, Result};
use crate::mesh::BackgroundMesh;
use crate::spatial_index::Aabb;

/// Relative tolerance of the inscribed-radius search.
pub const INRADIUS_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ElementMetrics {
    pub uf: f64,
    pub cr: f64,
    pub br: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub min: f64,
    pub max: f64,
    pub avg: f64,
}

impl Summary {
    fn of(values: impl Iterator<Item = f64>) -> Self {
        let (mut min, mut max, mut sum, mut n) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize);
        for v in values {
            min = min.min(v);
            max = max.max(v);
            sum += v;
            n += 1;
        }
        Self {
            min,
            max,
            avg: (sum / n as f64).clamp(min, max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeshMetricsReport {
    pub n_agglomerates: usize,
    pub n_disconnected: usize,
    pub uf: Summary,
    pub cr: Summary,
    pub br: Summary,
    pub of: f64,
    pub elements: Vec<ElementMetrics>,
}

pub fn uniformity_factor(diameter: f64, h_mesh: f64) -> Result<f64> {
    if h_mesh <= 0.0 || !h_mesh.is_finite() {
        return invalid(format!("mesh size must be positive, got {h_mesh}"));
    }
    Ok(diameter / h_mesh)
}

/// `r_in / (diam / 2)`, using half the diameter as the circumscribed radius.
/// Disconnected cell sets are measured on their largest component.
pub fn circle_ratio(mesh: &BackgroundMesh, assignment: &[usize], cells: &[usize], diameter: f64) -> Result<f64> {
    if cells.is_empty() || diameter <= 0.0 {
        return invalid("circle ratio of a degenerate agglomerate");
    }
    let comps = components(mesh, assignment, cells);
    let r = inradius(mesh, &comps[0], INRADIUS_TOL * diameter);
    Ok((r / (0.5 * diameter)).clamp(0.0, 1.0))
}

pub fn box_ratio(measure: f64, mbr: &Aabb) -> f64 {
    measure / mbr.measure()
}

/// `|Omega| / sum |MBR(K)|`.
pub fn overlap_factor(poly: &PolytopalMesh) -> f64 {
    let boxes: f64 = poly.agglomerates.iter().map(|a| a.mbr.measure()).sum();
    poly.total_measure() / boxes
}

pub fn element_metrics(mesh: &BackgroundMesh, poly: &PolytopalMesh) -> Result<Vec<ElementMetrics>> {
    let h = poly.h_max();
    poly.agglomerates
        .iter()
        .map(|a| {
            Ok(ElementMetrics {
                uf: uniformity_factor(a.diameter, h)?,
                cr: circle_ratio(mesh, &poly.assignment, &a.cells, a.diameter)?,
                br: box_ratio(a.measure, &a.mbr),
            })
        })
        .collect()
}

pub fn metrics_report(mesh: &BackgroundMesh, poly: &PolytopalMesh) -> Result<MeshMetricsReport> {
    if poly.agglomerates.is_empty() {
        return invalid("metrics of an empty mesh");
    }
    let elements = element_metrics(mesh, poly)?;
    Ok(MeshMetricsReport {
        n_agglomerates: elements.len(),
        n_disconnected: poly.disconnected.len(),
        uf: Summary::of(elements.iter().map(|e| e.uf)),
        cr: Summary::of(elements.iter().map(|e| e.cr)),
        br: Summary::of(elements.iter().map(|e| e.br)),
        of: overlap_factor(poly),
        elements,
    })
}

/// Six significant digits, keeping at least one decimal.
pub fn sig6(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x:.1}");
    }
    let digits = (5 - x.abs().log10().floor() as i32).max(1) as usize;
    let s = format!("{x:.digits$}");
    let s = s.trim_end_matches('0');
    if s.ends_with('.') {
        format!("{s}0")
    } else {
        s.to_string()
    }
}

impl MeshMetricsReport {
    /// Per-agglomerate rows followed by min/max/avg rows and the overlap factor.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("agglomerate,uf,cr,br\n");
        for (k, e) in self.elements.iter().enumerate() {
            let _ = writeln!(s, "{k},{},{},{}", e.uf, e.cr, e.br);
        }
        let _ = writeln!(s, "min,{},{},{}", self.uf.min, self.cr.min, self.br.min);
        let _ = writeln!(s, "max,{},{},{}", self.uf.max, self.cr.max, self.br.max);
        let _ = writeln!(s, "avg,{},{},{}", self.uf.avg, self.cr.avg, self.br.avg);
        let _ = writeln!(s, "of,{},,", self.of);
        s
    }

    /// `UF <avg> CR <avg> BR <avg> OF <of>`.
    pub fn summary_line(&self) -> String {
        format!(
            "UF {} CR {} BR {} OF {}",
            sig6(self.uf.avg),
            sig6(self.cr.avg),
            sig6(self.br.avg),
            sig6(self.of)
        )
    }
}
