use std::f64::consts::PI;

use crate::error::{invalid, Result};
use crate::geometry::Point;

/// Data of `-Δu = f` in Ω, `u = g` on ∂Ω.
pub trait Problem {
    fn source(&self, x: &Point) -> f64;
    fn dirichlet(&self, x: &Point) -> f64;
}

pub trait ExactSolution {
    fn u(&self, x: &Point) -> f64;
    fn grad_u(&self, x: &Point) -> Point;
}

/// `u(x) = Π sin(π s_i x_i)` with `f = π² Σ s_i² u` and `g = u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedCase {
    dim: usize,
    scale: [f64; 3],
}

impl ManufacturedCase {
    pub fn new(dim: usize) -> Result<Self> {
        Self::with_scaling(dim, [1.0; 3])
    }

    /// Argument scaling per axis, e.g. `1 / L_i` on a box of side `L_i`.
    pub fn with_scaling(dim: usize, scale: [f64; 3]) -> Result<Self> {
        if !(2..=3).contains(&dim) {
            return invalid(format!("manufactured case needs d in {{2, 3}}, got {dim}"));
        }
        Ok(Self { dim, scale })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

impl ExactSolution for ManufacturedCase {
    fn u(&self, x: &Point) -> f64 {
        (0..self.dim).map(|k| (PI * self.scale[k] * x[k]).sin()).product()
    }

    fn grad_u(&self, x: &Point) -> Point {
        let mut g = [0.0; 3];
        for (k, gk) in g.iter_mut().enumerate().take(self.dim) {
            *gk = PI * self.scale[k] * (PI * self.scale[k] * x[k]).cos();
            for o in (0..self.dim).filter(|&o| o != k) {
                *gk *= (PI * self.scale[o] * x[o]).sin();
            }
        }
        g
    }
}

impl Problem for ManufacturedCase {
    fn source(&self, x: &Point) -> f64 {
        let s2: f64 = self.scale[..self.dim].iter().map(|s| s * s).sum();
        PI * PI * s2 * self.u(x)
    }

    fn dirichlet(&self, x: &Point) -> f64 {
        self.u(x)
    }
}

/// Constant source and boundary value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantData {
    pub f: f64,
    pub g: f64,
}

impl Problem for ConstantData {
    fn source(&self, _: &Point) -> f64 {
        self.f
    }

    fn dirichlet(&self, _: &Point) -> f64 {
        self.g
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::SplitMix64;

    #[test]
    fn center_values() {
        let c = ManufacturedCase::new(2).unwrap();
        assert!((c.u(&[0.5, 0.5, 0.0]) - 1.0).abs() < 1e-15);
        assert!((c.source(&[0.5, 0.5, 0.0]) - 2.0 * PI * PI).abs() < 1e-12);
        let c = ManufacturedCase::new(3).unwrap();
        assert!((c.source(&[0.5, 0.5, 0.5]) - 3.0 * PI * PI).abs() < 1e-12);
        assert!(ManufacturedCase::new(1).is_err());
    }

    #[test]
    fn laplacian_matches_source() {
        let mut rng = SplitMix64::new(5);
        for (dim, scale) in [(2, [1.0; 3]), (3, [1.0; 3]), (2, [0.5, 2.0, 1.0])] {
            let c = ManufacturedCase::with_scaling(dim, scale).unwrap();
            for _ in 0..100 {
                let x = [rng.next_f64(), rng.next_f64(), rng.next_f64()];
                // fourth-order central differences
                let h = 2e-3 / scale[..dim].iter().fold(0.0f64, |m, s| m.max(*s));
                let mut lap = 0.0;
                for k in 0..dim {
                    let at = |t: f64| {
                        let mut y = x;
                        y[k] += t;
                        c.u(&y)
                    };
                    lap += (-at(2.0 * h) + 16.0 * at(h) - 30.0 * at(0.0) + 16.0 * at(-h) - at(-2.0 * h)) / (12.0 * h * h);
                }
                let f_max = PI * PI * scale[..dim].iter().map(|s| s * s).sum::<f64>();
                let resid = -lap - c.source(&x);
                assert!(resid.abs() < 1e-10 * f_max, "{resid}");
                let g = c.grad_u(&x);
                for k in 0..dim {
                    let (mut xp, mut xm) = (x, x);
                    xp[k] += 1e-6;
                    xm[k] -= 1e-6;
                    assert!(((c.u(&xp) - c.u(&xm)) / 2e-6 - g[k]).abs() < 1e-7);
                }
            }
        }
    }
}
