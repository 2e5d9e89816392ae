use crate::error::{invalid, Error, Result};
use crate::linalg::{axpy, dot, norm2, CsrMatrix};

pub const DEFAULT_ABSTOL: f64 = 1e-12;
pub const DEFAULT_RELTOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOptions {
    pub abstol: f64,
    pub reltol: f64,
    pub maxit: usize,
}

impl Default for CgOptions {
    fn default() -> Self {
        Self {
            abstol: DEFAULT_ABSTOL,
            reltol: DEFAULT_RELTOL,
            maxit: 10_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Residual norms, starting with `‖r_0‖`.
    pub history: Vec<f64>,
}

/// Preconditioned conjugate gradients from a zero initial guess. Stops once
/// `‖r_k‖ ≤ max(abstol, reltol·‖r_0‖)`.
pub fn pcg<F>(a: &CsrMatrix, b: &[f64], mut precond: F, opts: &CgOptions) -> Result<CgOutcome>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let n = b.len();
    if a.nrows() != n || a.ncols() != n {
        return invalid(format!("{}x{} matrix with right-hand side of length {n}", a.nrows(), a.ncols()));
    }
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let r0 = norm2(&r);
    let target = opts.abstol.max(opts.reltol * r0);
    let mut history = vec![r0];
    if r0 <= target {
        return Ok(CgOutcome {
            x,
            iterations: 0,
            history,
        });
    }
    let mut z = precond(&r)?;
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 1..=opts.maxit {
        a.matvec_into(&p, &mut ap);
        let curvature = dot(&p, &ap);
        if curvature <= 0.0 || !curvature.is_finite() {
            return Err(Error::Breakdown { iteration: it, curvature });
        }
        let alpha = rz / curvature;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let rn = norm2(&r);
        history.push(rn);
        if rn <= target {
            return Ok(CgOutcome {
                x,
                iterations: it,
                history,
            });
        }
        z = precond(&r)?;
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let residual = *history.last().unwrap();
    Err(Error::NoConvergence {
        iterations: opts.maxit,
        residual,
        history,
    })
}

/// Unpreconditioned CG.
pub fn cg(a: &CsrMatrix, b: &[f64], opts: &CgOptions) -> Result<CgOutcome> {
    pcg(a, b, |r| Ok(r.to_vec()), opts)
}
