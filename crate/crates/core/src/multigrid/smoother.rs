use crate::error::{invalid, Result};
use crate::linalg::{axpy, dot, norm2, CsrMatrix};
use crate::mesh::SplitMix64;

/// Largest Ritz value of `D^{-1/2} A D^{-1/2}` after `iters` Lanczos steps
/// from a seeded random start vector.
pub fn lanczos_lambda_max(a: &CsrMatrix, diag: &[f64], iters: usize, seed: u64) -> Result<f64> {
    let n = a.nrows();
    if let Some(i) = diag.iter().position(|&d| d <= 0.0 || !d.is_finite()) {
        return invalid(format!("non-positive diagonal entry {} at row {i}", diag[i]));
    }
    if n == 0 {
        return invalid("empty operator");
    }
    let inv_sqrt: Vec<f64> = diag.iter().map(|d| 1.0 / d.sqrt()).collect();
    let mut rng = SplitMix64::new(seed);
    let mut q: Vec<f64> = (0..n).map(|_| rng.next_signed()).collect();
    let nq = norm2(&q);
    q.iter_mut().for_each(|x| *x /= nq);
    let mut q_prev = vec![0.0; n];
    let (mut alpha, mut beta) = (Vec::new(), Vec::new());
    let mut tmp = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut b_prev = 0.0;
    for _ in 0..iters.max(1).min(n) {
        for i in 0..n {
            tmp[i] = q[i] * inv_sqrt[i];
        }
        a.matvec_into(&tmp, &mut w);
        for i in 0..n {
            w[i] = w[i] * inv_sqrt[i] - b_prev * q_prev[i];
        }
        let al = dot(&w, &q);
        axpy(-al, &q, &mut w);
        alpha.push(al);
        let b = norm2(&w);
        if b <= 1e-12 * al.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        beta.push(b);
        std::mem::swap(&mut q_prev, &mut q);
        for i in 0..n {
            q[i] = w[i] / b;
        }
        b_prev = b;
    }
    beta.truncate(alpha.len().saturating_sub(1));
    Ok(tridiagonal_max_eigenvalue(&alpha, &beta))
}

/// Number of eigenvalues of the symmetric tridiagonal matrix below `x`.
fn sturm_count(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..alpha.len() {
        let b2 = if i > 0 { beta[i - 1] * beta[i - 1] } else { 0.0 };
        d = alpha[i] - x - if i > 0 { b2 / d } else { 0.0 };
        if d == 0.0 {
            d = -f64::EPSILON * (alpha[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Largest eigenvalue by bisection on the Sturm sequence.
pub fn tridiagonal_max_eigenvalue(alpha: &[f64], beta: &[f64]) -> f64 {
    let n = alpha.len();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..n {
        let r = if i > 0 { beta[i - 1].abs() } else { 0.0 } + if i + 1 < n { beta[i].abs() } else { 0.0 };
        lo = lo.min(alpha[i] - r);
        hi = hi.max(alpha[i] + r);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(alpha, beta, mid) == n {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Chebyshev smoothing parameters on the Jacobi-scaled operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChebyshevParams {
    pub degree: usize,
    pub steps: usize,
    /// Eigenvalue interval `[lo, hi]` of `D^{-1} A` to damp.
    pub interval: (f64, f64),
}

impl ChebyshevParams {
    /// `[λ/ratio, factor·λ]` from a largest-eigenvalue estimate.
    pub fn from_estimate(lambda_max: f64, degree: usize, steps: usize, ratio: f64, factor: f64) -> Self {
        Self {
            degree,
            steps,
            interval: (lambda_max / ratio, factor * lambda_max),
        }
    }
}

/// Applies `steps` rounds of the degree-`degree` Chebyshev iteration with
/// Jacobi preconditioning to `A x = b`, updating `x` in place.
pub fn chebyshev_smooth(a: &CsrMatrix, inv_diag: &[f64], b: &[f64], x: &mut [f64], params: &ChebyshevParams) -> Result<()> {
    let (lo, hi) = params.interval;
    if !(lo > 0.0 && hi > lo) || params.degree == 0 {
        return invalid(format!("empty Chebyshev interval [{lo}, {hi}] or zero degree"));
    }
    let n = b.len();
    let theta = 0.5 * (hi + lo);
    let delta = 0.5 * (hi - lo);
    let sigma = theta / delta;
    let mut r = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut ad = vec![0.0; n];
    for _ in 0..params.steps {
        a.matvec_into(x, &mut r);
        for i in 0..n {
            r[i] = b[i] - r[i];
            d[i] = inv_diag[i] * r[i] / theta;
        }
        let mut rho = 1.0 / sigma;
        for k in 0..params.degree {
            axpy(1.0, &d, x);
            if k + 1 == params.degree {
                break;
            }
            a.matvec_into(&d, &mut ad);
            axpy(-1.0, &ad, &mut r);
            let rho_next = 1.0 / (2.0 * sigma - rho);
            for i in 0..n {
                d[i] = rho_next * rho * d[i] + 2.0 * rho_next / delta * inv_diag[i] * r[i];
            }
            rho = rho_next;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_matrix(d: &[f64]) -> CsrMatrix {
        let t: Vec<_> = d.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        CsrMatrix::from_triplets(d.len(), d.len(), &t).unwrap()
    }

    fn tridiag(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
                t.push((i - 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, &t).unwrap()
    }

    #[test]
    fn lanczos_trivial_cases() {
        let i = CsrMatrix::identity(10);
        assert!((lanczos_lambda_max(&i, &[1.0; 10], 20, 1).unwrap() - 1.0).abs() < 1e-12);
        let a = diag_matrix(&[1.0, 2.0, 3.0]);
        assert!((lanczos_lambda_max(&a, &[1.0, 2.0, 3.0], 20, 1).unwrap() - 1.0).abs() < 1e-12);
        assert!(lanczos_lambda_max(&a, &[1.0, 0.0, 3.0], 20, 1).is_err());
    }

    #[test]
    fn lanczos_on_laplacian() {
        let n = 200;
        let a = tridiag(n);
        let exact = (2.0 - 2.0 * (std::f64::consts::PI * n as f64 / (n as f64 + 1.0)).cos()) / 2.0;
        let est = lanczos_lambda_max(&a, &a.diagonal(), 20, 7).unwrap();
        assert!(est <= exact + 1e-12 && est > 0.95 * exact, "{est} vs {exact}");
    }

    #[test]
    fn sturm_bisection() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3
        assert!((tridiagonal_max_eigenvalue(&[2.0, 2.0], &[1.0]) - 3.0).abs() < 1e-13);
        assert_eq!(tridiagonal_max_eigenvalue(&[4.0], &[]), 4.0);
    }

    #[test]
    fn identity_contracts_fast() {
        let a = CsrMatrix::identity(5);
        let params = ChebyshevParams {
            degree: 5,
            steps: 1,
            interval: (1.0, 1.1),
        };
        let b = vec![1.0; 5];
        let mut x = vec![0.0; 5];
        for _ in 0..3 {
            let before: f64 = x.iter().map(|v| (v - 1.0f64).abs()).fold(0.0, f64::max);
            chebyshev_smooth(&a, &[1.0; 5], &b, &mut x, &params).unwrap();
            let after: f64 = x.iter().map(|v| (v - 1.0f64).abs()).fold(0.0, f64::max);
            assert!(after <= before / 10.0 || after < 1e-15);
        }
    }

    #[test]
    fn fixed_point_and_symmetry() {
        let a = tridiag(30);
        let inv: Vec<f64> = a.diagonal().iter().map(|d| 1.0 / d).collect();
        let lam = lanczos_lambda_max(&a, &a.diagonal(), 20, 3).unwrap();
        let params = ChebyshevParams::from_estimate(lam, 5, 2, 15.0, 1.1);
        let xs: Vec<f64> = (0..30).map(|i| (i as f64).sin()).collect();
        let b = a.matvec(&xs);
        let mut x = xs.clone();
        chebyshev_smooth(&a, &inv, &b, &mut x, &params).unwrap();
        for (u, v) in x.iter().zip(&xs) {
            assert!((u - v).abs() < 1e-13);
        }
        // x = S b from x0 = 0 is a symmetric linear map of b
        let apply = |r: &[f64]| {
            let mut z = vec![0.0; 30];
            chebyshev_smooth(&a, &inv, r, &mut z, &params).unwrap();
            z
        };
        let mut rng = SplitMix64::new(4);
        let r1: Vec<f64> = (0..30).map(|_| rng.next_signed()).collect();
        let r2: Vec<f64> = (0..30).map(|_| rng.next_signed()).collect();
        let lhs = dot(&apply(&r1), &r2);
        let rhs = dot(&r1, &apply(&r2));
        assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0));
        assert!(chebyshev_smooth(&a, &inv, &b, &mut x, &ChebyshevParams { degree: 5, steps: 1, interval: (1.0, 1.0) }).is_err());
    }
}
