use std::collections::HashMap;
use std::fmt::Write as _;

use super::problem::{ExactSolution, Problem};
use super::quadrature::{cell_quadrature, face_quadrature};
use super::space::DgSpace;
use crate::agglomeration::SkeletonFace;
use crate::error::{invalid, Result};
use crate::geometry::{dot, scale, Point};
use crate::linalg::{CsrMatrix, DirectSolver};
use crate::mesh::BackgroundMesh;

pub const DEFAULT_C_SIGMA: f64 = 10.0;

/// Largest system the direct solver accepts.
pub const DIRECT_DOF_CAP: usize = 20_000;

/// Symmetric system `A x = b` from the interior-penalty discretization.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
}

/// `C p² / h_K` on boundary faces, `C p² / min(h⁺, h⁻)` on interior ones.
pub fn penalty_sigma(face: &SkeletonFace, space: &DgSpace, c_sigma: f64) -> f64 {
    let p = space.degree() as f64;
    let h = match face.minus {
        None => space.diameter(face.plus),
        Some(m) => space.diameter(face.plus).min(space.diameter(m)),
    };
    c_sigma * p * p / h
}

struct Blocks {
    n: usize,
    map: HashMap<(usize, usize), Vec<f64>>,
}

impl Blocks {
    fn block(&mut self, a: usize, b: usize) -> &mut Vec<f64> {
        let n = self.n;
        self.map.entry((a, b)).or_insert_with(|| vec![0.0; n * n])
    }

    fn into_csr(self, n_blocks: usize) -> Result<CsrMatrix> {
        let n = self.n;
        let mut keys: Vec<(usize, usize)> = self.map.keys().copied().collect();
        keys.sort_unstable();
        let mut triplets = Vec::with_capacity(keys.len() * n * n);
        for (a, b) in keys {
            let blk = &self.map[&(a, b)];
            for i in 0..n {
                for j in 0..n {
                    triplets.push((a * n + i, b * n + j, blk[i * n + j]));
                }
            }
        }
        CsrMatrix::from_triplets(n_blocks * n, n_blocks * n, &triplets)
    }
}

/// Assembles the symmetric interior-penalty system with weak Dirichlet data.
pub fn assemble(mesh: &BackgroundMesh, space: &DgSpace, problem: &dyn Problem, c_sigma: f64) -> Result<LinearSystem> {
    let n = space.n_local();
    let q = |c: usize| 2 * space.degree_on_cell(mesh, c) + 1;
    let basis = space.basis();
    let poly = space.poly();
    let mut blocks = Blocks {
        n,
        map: HashMap::new(),
    };
    let mut rhs = vec![0.0; space.n_dofs()];
    let (mut v, mut g) = (vec![0.0; n], vec![[0.0; 3]; n]);
    let (mut v2, mut g2) = (vec![0.0; n], vec![[0.0; 3]; n]);

    for (a, agg) in poly.agglomerates.iter().enumerate() {
        let mut local = vec![0.0; n * n];
        let b = &mut rhs[a * n..(a + 1) * n];
        for &c in &agg.cells {
            let rule = cell_quadrature(mesh, c, q(c));
            for (x, &w) in rule.points.iter().zip(&rule.weights) {
                basis.eval(&agg.mbr, x, &mut v, &mut g);
                let fx = problem.source(x);
                for i in 0..n {
                    b[i] += w * fx * v[i];
                    for j in 0..n {
                        local[i * n + j] += w * dot(&g[i], &g[j]);
                    }
                }
            }
        }
        *blocks.block(a, a) = local;
    }

    for sf in &poly.skeleton {
        let rule = face_quadrature(mesh, sf.face, q(sf.plus_cell).max(sf.minus_cell.map_or(0, q)));
        let flip = mesh.faces()[sf.face].owner != sf.plus_cell;
        let sigma = penalty_sigma(sf, space, c_sigma);
        let pa = sf.plus;
        match sf.minus {
            None => {
                let mut m = vec![0.0; n * n];
                let b = &mut rhs[pa * n..(pa + 1) * n];
                for ((x, &w), nrm) in rule.points.iter().zip(&rule.weights).zip(&rule.normals) {
                    basis.eval(space.mbr(pa), x, &mut v, &mut g);
                    let dn: Vec<f64> = g.iter().map(|gi| dot(gi, nrm)).collect();
                    let gx = problem.dirichlet(x);
                    for i in 0..n {
                        b[i] += w * gx * (sigma * v[i] - dn[i]);
                        for j in 0..n {
                            m[i * n + j] += w * (-(dn[j] * v[i]) - dn[i] * v[j] + sigma * (v[i] * v[j]));
                        }
                    }
                }
                let blk = blocks.block(pa, pa);
                for (x, y) in blk.iter_mut().zip(&m) {
                    *x += y;
                }
            }
            Some(mb) => {
                let mut m = [vec![0.0; n * n], vec![0.0; n * n], vec![0.0; n * n], vec![0.0; n * n]];
                for ((x, &w), nrm) in rule.points.iter().zip(&rule.weights).zip(&rule.normals) {
                    let nrm: Point = if flip { scale(nrm, -1.0) } else { *nrm };
                    basis.eval(space.mbr(pa), x, &mut v, &mut g);
                    basis.eval(space.mbr(mb), x, &mut v2, &mut g2);
                    let sides: [(&[f64], Vec<f64>, f64); 2] = [
                        (&v, g.iter().map(|gi| dot(gi, &nrm)).collect(), 1.0),
                        (&v2, g2.iter().map(|gi| dot(gi, &nrm)).collect(), -1.0),
                    ];
                    for (s, (vs, dns, ss)) in sides.iter().enumerate() {
                        for (t, (vt, dnt, st)) in sides.iter().enumerate() {
                            let blk = &mut m[2 * s + t];
                            for i in 0..n {
                                for j in 0..n {
                                    let t1 = -0.5 * ss * dnt[j] * vs[i];
                                    let t2 = -0.5 * st * dns[i] * vt[j];
                                    blk[i * n + j] += w * (t1 + t2 + sigma * (ss * st) * (vs[i] * vt[j]));
                                }
                            }
                        }
                    }
                }
                let ids = [pa, mb];
                for (k, mk) in m.iter().enumerate() {
                    let blk = blocks.block(ids[k / 2], ids[k % 2]);
                    for (x, y) in blk.iter_mut().zip(mk) {
                        *x += y;
                    }
                }
            }
        }
    }
    Ok(LinearSystem {
        matrix: blocks.into_csr(space.n_agglomerates())?,
        rhs,
    })
}

/// Direct sparse Cholesky solve; refuses systems above [`DIRECT_DOF_CAP`].
pub fn solve_direct(system: &LinearSystem) -> Result<Vec<f64>> {
    let n = system.matrix.nrows();
    if n > DIRECT_DOF_CAP {
        return invalid(format!(
            "{n} DoFs exceed the direct-solver cap of {DIRECT_DOF_CAP}; use the r3mg solver mode"
        ));
    }
    Ok(DirectSolver::factor(&system.matrix)?.solve(&system.rhs))
}

/// Broken L2 and H1-seminorm errors with quadrature exact to twice the
/// local polynomial degree plus two.
pub fn compute_errors(
    mesh: &BackgroundMesh,
    space: &DgSpace,
    coeffs: &[f64],
    exact: &dyn ExactSolution,
) -> Result<(f64, f64)> {
    if coeffs.len() != space.n_dofs() {
        return invalid(format!("{} coefficients for {} DoFs", coeffs.len(), space.n_dofs()));
    }
    let n = space.n_local();
    let basis = space.basis();
    let (mut v, mut g) = (vec![0.0; n], vec![[0.0; 3]; n]);
    let (mut l2, mut h1) = (0.0, 0.0);
    for (a, agg) in space.poly().agglomerates.iter().enumerate() {
        let c = &coeffs[a * n..(a + 1) * n];
        for &cell in &agg.cells {
            let rule = cell_quadrature(mesh, cell, 2 * space.degree_on_cell(mesh, cell) + 2);
            for (x, &w) in rule.points.iter().zip(&rule.weights) {
                basis.eval(&agg.mbr, x, &mut v, &mut g);
                let mut uh = 0.0;
                let mut duh = [0.0; 3];
                for i in 0..n {
                    uh += c[i] * v[i];
                    for k in 0..3 {
                        duh[k] += c[i] * g[i][k];
                    }
                }
                let du = exact.grad_u(x);
                l2 += w * (uh - exact.u(x)).powi(2);
                h1 += w * (0..3).map(|k| (duh[k] - du[k]).powi(2)).sum::<f64>();
            }
        }
    }
    Ok((l2.sqrt(), h1.sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRow {
    pub p: usize,
    pub dofs: usize,
    pub l2: f64,
    pub h1semi: f64,
}

pub fn error_table_csv(rows: &[ErrorRow]) -> String {
    let mut s = String::from("p,dofs,l2,h1semi\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{}", r.p, r.dofs, r.l2, r.h1semi);
    }
    s
}

/// Least-squares slope of `log(err)` against `log(h)`.
pub fn observed_order(h: &[f64], err: &[f64]) -> f64 {
    let xs: Vec<f64> = h.iter().map(|x| x.ln()).collect();
    let ys: Vec<f64> = err.iter().map(|x| x.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let num: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}
