use super::basis::{Family, ReferenceBasis};
use super::quadrature::cell_quadrature;
use crate::agglomeration::PolytopalMesh;
use crate::error::{invalid, Result};
use crate::geometry::Point;
use crate::linalg::DenseCholesky;
use crate::mesh::BackgroundMesh;
use crate::spatial_index::Aabb;

/// Discontinuous polynomial space over a polytopal mesh; the DoFs of
/// agglomerate `a` occupy `a * n_local .. (a + 1) * n_local`.
#[derive(Debug, Clone)]
pub struct DgSpace {
    poly: PolytopalMesh,
    basis: ReferenceBasis,
}

pub fn build_space(mesh: &BackgroundMesh, poly: PolytopalMesh, p: usize, family: Family) -> Result<DgSpace> {
    if poly.agglomerates.is_empty() {
        return invalid("cannot build a space on an empty mesh");
    }
    Ok(DgSpace {
        basis: ReferenceBasis::new(p, mesh.dim(), family)?,
        poly,
    })
}

impl DgSpace {
    pub fn poly(&self) -> &PolytopalMesh {
        &self.poly
    }

    pub fn basis(&self) -> &ReferenceBasis {
        &self.basis
    }

    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    pub fn family(&self) -> Family {
        self.basis.family()
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Total degree of the local polynomials restricted to fine cell `c`.
    /// Tensor bases keep degree `p` per axis only on cells whose own
    /// parametrization is a tensor product; on simplices they reach `dim·p`.
    pub fn degree_on_cell(&self, mesh: &BackgroundMesh, c: usize) -> usize {
        match (self.family(), mesh.cell(c).kind.is_simplex()) {
            (Family::Tensor, true) => self.dim() * self.degree(),
            _ => self.degree(),
        }
    }

    pub fn n_local(&self) -> usize {
        self.basis.len()
    }

    pub fn n_agglomerates(&self) -> usize {
        self.poly.agglomerates.len()
    }

    pub fn n_dofs(&self) -> usize {
        self.n_local() * self.n_agglomerates()
    }

    pub fn offset(&self, agglomerate: usize) -> usize {
        agglomerate * self.n_local()
    }

    pub fn mbr(&self, agglomerate: usize) -> &Aabb {
        &self.poly.agglomerates[agglomerate].mbr
    }

    pub fn diameter(&self, agglomerate: usize) -> f64 {
        self.poly.agglomerates[agglomerate].diameter
    }

    pub fn agglomerate_of_cell(&self, cell: usize) -> usize {
        self.poly.assignment[cell]
    }

    /// Values and gradients of every local basis function at each point.
    pub fn basis_eval(&self, agglomerate: usize, points: &[Point]) -> Result<(Vec<Vec<f64>>, Vec<Vec<Point>>)> {
        if agglomerate >= self.n_agglomerates() {
            return invalid(format!("agglomerate {agglomerate} out of range"));
        }
        let n = self.n_local();
        let mbr = self.mbr(agglomerate);
        let mut values = Vec::with_capacity(points.len());
        let mut grads = Vec::with_capacity(points.len());
        for x in points {
            let (mut v, mut g) = (vec![0.0; n], vec![[0.0; 3]; n]);
            self.basis.eval(mbr, x, &mut v, &mut g);
            values.push(v);
            grads.push(g);
        }
        Ok((values, grads))
    }

    /// `u_h(x)` and its gradient, with `x` taken in agglomerate `a`.
    pub fn evaluate(&self, coeffs: &[f64], a: usize, x: &Point) -> (f64, Point) {
        let n = self.n_local();
        let (mut v, mut g) = (vec![0.0; n], vec![[0.0; 3]; n]);
        self.basis.eval(self.mbr(a), x, &mut v, &mut g);
        let c = &coeffs[self.offset(a)..self.offset(a) + n];
        let mut u = 0.0;
        let mut du = [0.0; 3];
        for i in 0..n {
            u += c[i] * v[i];
            for k in 0..3 {
                du[k] += c[i] * g[i][k];
            }
        }
        (u, du)
    }

    /// Nodal interpolation for the tensor family, local L2 projection over
    /// the member cells otherwise.
    pub fn interpolate(&self, mesh: &BackgroundMesh, f: impl Fn(&Point) -> f64) -> Result<Vec<f64>> {
        let n = self.n_local();
        let mut out = vec![0.0; self.n_dofs()];
        for (a, agg) in self.poly.agglomerates.iter().enumerate() {
            let local = &mut out[a * n..(a + 1) * n];
            match self.family() {
                Family::Tensor => {
                    for (c, x) in local.iter_mut().zip(self.basis.lagrange_points(&agg.mbr)) {
                        *c = f(&x);
                    }
                }
                Family::Total => {
                    let mut mass = vec![0.0; n * n];
                    let mut rhs = vec![0.0; n];
                    let (mut v, mut g) = (vec![0.0; n], vec![[0.0; 3]; n]);
                    for &cell in &agg.cells {
                        let rule = cell_quadrature(mesh, cell, 2 * self.degree() + 2);
                        for (x, w) in rule.points.iter().zip(&rule.weights) {
                            self.basis.eval(&agg.mbr, x, &mut v, &mut g);
                            let fx = f(x);
                            for i in 0..n {
                                rhs[i] += w * fx * v[i];
                                for j in 0..n {
                                    mass[i * n + j] += w * v[i] * v[j];
                                }
                            }
                        }
                    }
                    local.copy_from_slice(&DenseCholesky::factor(n, &mass)?.solve(&rhs));
                }
            }
        }
        Ok(out)
    }

    /// `u_h` at every fine cell centroid.
    pub fn cell_center_values(&self, mesh: &BackgroundMesh, coeffs: &[f64]) -> Vec<f64> {
        (0..mesh.n_cells())
            .map(|c| self.evaluate(coeffs, self.agglomerate_of_cell(c), &mesh.cell_centroid(c)).0)
            .collect()
    }
}
