//! Polynomial bases on an agglomerate's bounding box.
//!
//! `Q_p` uses tensor-product Lagrange polynomials on Gauss-Lobatto-Legendre
//! nodes of the box. `P_p` uses monomials in box coordinates scaled to
//! `[-1, 1]`, orthonormalized for the mean inner product on the box.

use serde::{Deserialize, Serialize};

use super::quadrature::gll_nodes;
use crate::error::{invalid, Result};
use crate::geometry::Point;
use crate::linalg::DenseCholesky;
use crate::spatial_index::Aabb;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// `Q_p`, degree `p` in each coordinate.
    Tensor,
    /// `P_p`, total degree `p`.
    Total,
}

impl std::str::FromStr for Family {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "q" | "tensor" => Ok(Family::Tensor),
            "p" | "total" => Ok(Family::Total),
            _ => invalid(format!("unknown basis family {s:?} (tensor | total)")),
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::Tensor => "tensor",
            Family::Total => "total",
        })
    }
}

pub fn local_dim(p: usize, dim: usize, family: Family) -> usize {
    match family {
        Family::Tensor => (p + 1).pow(dim as u32),
        Family::Total => (1..=dim).fold(1, |acc, k| acc * (p + k) / k),
    }
}

/// Reference basis for one degree, family and dimension.
#[derive(Debug, Clone)]
pub struct ReferenceBasis {
    p: usize,
    dim: usize,
    family: Family,
    nodes: Vec<f64>,
    /// Lagrange denominators per node.
    denom: Vec<f64>,
    exponents: Vec<[usize; 3]>,
    /// Row `i` holds the monomial coefficients of basis function `i`.
    coeffs: Vec<f64>,
}

impl ReferenceBasis {
    pub fn new(p: usize, dim: usize, family: Family) -> Result<Self> {
        if p == 0 {
            return invalid("polynomial degree must be at least 1");
        }
        if !(2..=3).contains(&dim) {
            return invalid(format!("dimension {dim} not supported"));
        }
        let nodes = gll_nodes(p);
        let denom = (0..=p)
            .map(|i| (0..=p).filter(|&j| j != i).map(|j| nodes[i] - nodes[j]).product())
            .collect();
        let mut exponents = Vec::new();
        let mut coeffs = Vec::new();
        if family == Family::Total {
            for deg in 0..=p {
                if dim == 2 {
                    for a in (0..=deg).rev() {
                        exponents.push([a, deg - a, 0]);
                    }
                } else {
                    for a in (0..=deg).rev() {
                        for b in (0..=deg - a).rev() {
                            exponents.push([a, b, deg - a - b]);
                        }
                    }
                }
            }
            let n = exponents.len();
            // mean of t^k over [-1, 1]
            let mean = |k: usize| if k % 2 == 1 { 0.0 } else { 1.0 / (k as f64 + 1.0) };
            let mut gram = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    gram[i * n + j] = (0..dim).map(|k| mean(exponents[i][k] + exponents[j][k])).product();
                }
            }
            let chol = DenseCholesky::factor(n, &gram)?;
            // rows of L^{-1}: solve L x = e_i by forward substitution of the factor
            coeffs = vec![0.0; n * n];
            for i in 0..n {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                let col = chol.forward(&e);
                for (j, c) in col.iter().enumerate() {
                    coeffs[j * n + i] = *c;
                }
            }
        }
        Ok(Self {
            p,
            dim,
            family,
            nodes,
            denom,
            exponents,
            coeffs,
        })
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn len(&self) -> usize {
        local_dim(self.p, self.dim, self.family)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Lagrange nodes on `[0,1]` per direction (tensor family).
    pub fn nodes_1d(&self) -> &[f64] {
        &self.nodes
    }

    /// Physical Lagrange nodes of the box, in basis order (tensor family).
    pub fn lagrange_points(&self, mbr: &Aabb) -> Vec<Point> {
        let n = self.p + 1;
        (0..self.len())
            .map(|idx| {
                let mut x = [0.0; 3];
                let mut rest = idx;
                for (k, xk) in x.iter_mut().enumerate().take(self.dim) {
                    *xk = mbr.lo[k] + self.nodes[rest % n] * mbr.extent(k);
                    rest /= n;
                }
                x
            })
            .collect()
    }

    fn lagrange_1d(&self, s: f64, val: &mut [f64], der: &mut [f64]) {
        let n = self.p + 1;
        for i in 0..n {
            let mut v = 1.0;
            let mut d = 0.0;
            for j in 0..n {
                if j == i {
                    continue;
                }
                let f = s - self.nodes[j];
                d = d * f + v;
                v *= f;
            }
            val[i] = v / self.denom[i];
            der[i] = d / self.denom[i];
        }
    }

    /// Values and physical gradients of all basis functions at `x` for the
    /// box `mbr`. Output slices have length [`len`](Self::len).
    pub fn eval(&self, mbr: &Aabb, x: &Point, values: &mut [f64], grads: &mut [Point]) {
        let dim = self.dim;
        match self.family {
            Family::Tensor => {
                let n = self.p + 1;
                let mut v1 = [[0.0; 16]; 3];
                let mut d1 = [[0.0; 16]; 3];
                assert!(n <= 16, "degree too high");
                for k in 0..dim {
                    let h = mbr.extent(k);
                    let s = (x[k] - mbr.lo[k]) / h;
                    self.lagrange_1d(s, &mut v1[k][..n], &mut d1[k][..n]);
                    for d in d1[k][..n].iter_mut() {
                        *d /= h;
                    }
                }
                if dim == 2 {
                    for j in 0..n {
                        for i in 0..n {
                            let a = i + n * j;
                            values[a] = v1[0][i] * v1[1][j];
                            grads[a] = [d1[0][i] * v1[1][j], v1[0][i] * d1[1][j], 0.0];
                        }
                    }
                } else {
                    for l in 0..n {
                        for j in 0..n {
                            for i in 0..n {
                                let a = i + n * (j + n * l);
                                values[a] = v1[0][i] * v1[1][j] * v1[2][l];
                                grads[a] = [
                                    d1[0][i] * v1[1][j] * v1[2][l],
                                    v1[0][i] * d1[1][j] * v1[2][l],
                                    v1[0][i] * v1[1][j] * d1[2][l],
                                ];
                            }
                        }
                    }
                }
            }
            Family::Total => {
                let p = self.p;
                let mut pw = [[0.0; 16]; 3];
                let mut dpw = [[0.0; 16]; 3];
                for k in 0..dim {
                    let h = mbr.extent(k);
                    let t = 2.0 * (x[k] - mbr.lo[k]) / h - 1.0;
                    pw[k][0] = 1.0;
                    for e in 1..=p {
                        pw[k][e] = pw[k][e - 1] * t;
                        dpw[k][e] = e as f64 * pw[k][e - 1] * 2.0 / h;
                    }
                }
                let m = self.exponents.len();
                let mut mv = vec![0.0; m];
                let mut mg = vec![[0.0; 3]; m];
                for (i, ex) in self.exponents.iter().enumerate() {
                    let mut v = 1.0;
                    for k in 0..dim {
                        v *= pw[k][ex[k]];
                    }
                    mv[i] = v;
                    for k in 0..dim {
                        let mut g = dpw[k][ex[k]];
                        for o in 0..dim {
                            if o != k {
                                g *= pw[o][ex[o]];
                            }
                        }
                        mg[i][k] = g;
                    }
                }
                for a in 0..m {
                    let row = &self.coeffs[a * m..a * m + a + 1];
                    let mut v = 0.0;
                    let mut g = [0.0; 3];
                    for (c, (x, gx)) in row.iter().zip(mv.iter().zip(&mg)) {
                        v += c * x;
                        for k in 0..3 {
                            g[k] += c * gx[k];
                        }
                    }
                    values[a] = v;
                    grads[a] = g;
                }
            }
        }
    }
}
