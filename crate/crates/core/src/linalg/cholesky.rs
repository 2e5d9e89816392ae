//! Direct SPD solvers: dense Cholesky for small systems and an envelope
//! (skyline) Cholesky under reverse Cuthill-McKee ordering for larger ones.

use std::collections::VecDeque;

use super::CsrMatrix;
use crate::error::{Error, Result};

/// Systems up to this size are factored densely.
pub const DENSE_LIMIT: usize = 400;

#[derive(Debug, Clone)]
pub struct DenseCholesky {
    n: usize,
    l: Vec<f64>,
}

impl DenseCholesky {
    /// Factors a row-major symmetric matrix.
    pub fn factor(n: usize, a: &[f64]) -> Result<Self> {
        assert_eq!(a.len(), n * n);
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = a[i * n + j];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if s <= 0.0 || !s.is_finite() {
                        return Err(Error::NotPositiveDefinite { row: i, pivot: s });
                    }
                    l[i * n + i] = s.sqrt();
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        Ok(Self { n, l })
    }

    /// Solves `L y = b`.
    pub fn forward(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.l[i * n + k] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        y
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = self.forward(b);
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= self.l[k * n + i] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        y
    }
}

/// Reverse Cuthill-McKee ordering of the symmetric sparsity graph;
/// `perm[new] = old`.
pub fn rcm_ordering(a: &CsrMatrix) -> Vec<usize> {
    let n = a.nrows();
    let degree: Vec<usize> = (0..n).map(|i| a.row(i).0.len()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));
    for &start in &by_degree {
        if visited[start] {
            continue;
        }
        // pseudo-peripheral start: walk to the farthest low-degree node twice
        let mut root = start;
        for _ in 0..2 {
            let last = bfs_last(a, root, &degree);
            if last == root {
                break;
            }
            root = last;
        }
        let root = if visited[root] { start } else { root };
        let mut queue = VecDeque::from([root]);
        visited[root] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> = a.row(v).0.iter().copied().filter(|&u| !visited[u]).collect();
            nbrs.sort_by_key(|&u| (degree[u], u));
            for u in nbrs {
                visited[u] = true;
                queue.push_back(u);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_last(a: &CsrMatrix, root: usize, degree: &[usize]) -> usize {
    let n = a.nrows();
    let mut dist = vec![usize::MAX; n];
    dist[root] = 0;
    let mut queue = VecDeque::from([root]);
    let mut last = root;
    while let Some(v) = queue.pop_front() {
        if dist[v] > dist[last] || (dist[v] == dist[last] && degree[v] < degree[last]) {
            last = v;
        }
        for &u in a.row(v).0 {
            if dist[u] == usize::MAX {
                dist[u] = dist[v] + 1;
                queue.push_back(u);
            }
        }
    }
    last
}

/// Row-oriented envelope Cholesky: row `i` of `L` is stored densely from
/// its first structural nonzero to the diagonal.
#[derive(Debug, Clone)]
pub struct SkylineCholesky {
    perm: Vec<usize>,
    first: Vec<usize>,
    offset: Vec<usize>,
    values: Vec<f64>,
}

impl SkylineCholesky {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows();
        let perm = rcm_ordering(a);
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (new, &old) in perm.iter().enumerate() {
            for &j in a.row(old).0 {
                first[new] = first[new].min(inv[j]);
            }
        }
        let mut offset = Vec::with_capacity(n + 1);
        offset.push(0);
        for i in 0..n {
            offset.push(offset[i] + i - first[i] + 1);
        }
        let mut values = vec![0.0; offset[n]];
        for (new, &old) in perm.iter().enumerate() {
            let (cols, vals) = a.row(old);
            for (&j, &v) in cols.iter().zip(vals) {
                let jn = inv[j];
                if jn <= new {
                    values[offset[new] + jn - first[new]] += v;
                }
            }
        }
        for i in 0..n {
            let fi = first[i];
            for j in fi..=i {
                let fj = first[j];
                let start = fi.max(fj);
                let ri = offset[i] - fi;
                let rj = offset[j] - fj;
                let s: f64 = (start..j).map(|k| values[ri + k] * values[rj + k]).sum();
                let aij = values[ri + j] - s;
                if i == j {
                    if aij <= 0.0 || !aij.is_finite() {
                        return Err(Error::NotPositiveDefinite { row: perm[i], pivot: aij });
                    }
                    values[ri + j] = aij.sqrt();
                } else {
                    values[ri + j] = aij / values[rj + j];
                }
            }
        }
        Ok(Self {
            perm,
            first,
            offset,
            values,
        })
    }

    pub fn envelope_size(&self) -> usize {
        self.values.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.perm.len();
        let mut y: Vec<f64> = self.perm.iter().map(|&o| b[o]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.values[self.offset[i]..self.offset[i + 1]];
            let s: f64 = row[..i - fi].iter().zip(&y[fi..i]).map(|(l, x)| l * x).sum();
            y[i] = (y[i] - s) / row[i - fi];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.values[self.offset[i]..self.offset[i + 1]];
            y[i] /= row[i - fi];
            let xi = y[i];
            for (yk, l) in y[fi..i].iter_mut().zip(&row[..i - fi]) {
                *yk -= l * xi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

/// Dense factorization for small systems, skyline otherwise.
#[derive(Debug, Clone)]
pub enum DirectSolver {
    Dense(DenseCholesky),
    Skyline(SkylineCholesky),
}

impl DirectSolver {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows();
        if n <= DENSE_LIMIT {
            Ok(Self::Dense(DenseCholesky::factor(n, &a.to_dense())?))
        } else {
            Ok(Self::Skyline(SkylineCholesky::factor(a)?))
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        match self {
            Self::Dense(d) => d.solve(b),
            Self::Skyline(s) => s.solve(b),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::SplitMix64;

    /// 2D five-point Laplacian on an n x n grid, shuffled.
    fn laplacian(n: usize, shuffle: u64) -> CsrMatrix {
        let mut map: Vec<usize> = (0..n * n).collect();
        let mut rng = SplitMix64::new(shuffle);
        for i in (1..map.len()).rev() {
            map.swap(i, (rng.next_u64() % (i as u64 + 1)) as usize);
        }
        let mut t = Vec::new();
        for j in 0..n {
            for i in 0..n {
                let r = map[j * n + i];
                t.push((r, r, 4.0));
                if i > 0 {
                    t.push((r, map[j * n + i - 1], -1.0));
                }
                if i + 1 < n {
                    t.push((r, map[j * n + i + 1], -1.0));
                }
                if j > 0 {
                    t.push((r, map[(j - 1) * n + i], -1.0));
                }
                if j + 1 < n {
                    t.push((r, map[(j + 1) * n + i], -1.0));
                }
            }
        }
        CsrMatrix::from_triplets(n * n, n * n, &t).unwrap()
    }

    #[test]
    fn skyline_matches_residual() {
        let a = laplacian(30, 4);
        let s = SkylineCholesky::factor(&a).unwrap();
        let b: Vec<f64> = (0..900).map(|i| (i as f64 * 0.37).sin()).collect();
        let x = s.solve(&b);
        let r: f64 = a.matvec(&x).iter().zip(&b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
        assert!(r < 1e-12, "{r}");
        // RCM keeps the envelope near n * bandwidth for a grid
        assert!(s.envelope_size() < 900 * 70, "{}", s.envelope_size());
    }

    #[test]
    fn dense_and_skyline_agree() {
        let a = laplacian(8, 1);
        let b: Vec<f64> = (0..64).map(|i| i as f64).collect();
        let d = DenseCholesky::factor(64, &a.to_dense()).unwrap().solve(&b);
        let s = SkylineCholesky::factor(&a).unwrap().solve(&b);
        for (x, y) in d.iter().zip(&s) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn indefinite_rejected() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)]).unwrap();
        assert!(matches!(DenseCholesky::factor(2, &a.to_dense()), Err(Error::NotPositiveDefinite { row: 1, .. })));
        assert!(matches!(SkylineCholesky::factor(&a), Err(Error::NotPositiveDefinite { .. })));
    }

    #[test]
    fn rcm_is_permutation() {
        let a = laplacian(12, 9);
        let mut p = rcm_ordering(&a);
        p.sort();
        assert_eq!(p, (0..144).collect::<Vec<_>>());
    }
}
