//! Geometric multigrid on the nested agglomerate hierarchy: injection
//! transfers, Jacobi-scaled Chebyshev smoothing and a V-cycle used as a
//! preconditioner for conjugate gradients.

mod cg;
mod smoother;
mod transfer;

pub use cg::{cg, pcg, CgOptions, CgOutcome, DEFAULT_ABSTOL, DEFAULT_RELTOL};
pub use smoother::{chebyshev_smooth, lanczos_lambda_max, tridiagonal_max_eigenvalue, ChebyshevParams};
pub use transfer::build_injection;

use std::fmt::Write as _;

use crate::agglomeration::{build_polytopal_mesh, AgglomerateHierarchy};
use crate::dg::{assemble, build_space, DgSpace, Family, Problem};
use crate::error::{invalid, Result};
use crate::linalg::{CsrMatrix, DirectSolver};
use crate::mesh::BackgroundMesh;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MgParams {
    pub cheb_degree: usize,
    pub cheb_steps: usize,
    pub lanczos_iters: usize,
    /// Lower end of the smoothing interval is `λ̂ / lower_ratio`.
    pub lower_ratio: f64,
    /// Upper end is `upper_factor · λ̂`.
    pub upper_factor: f64,
    pub seed: u64,
}

impl Default for MgParams {
    fn default() -> Self {
        Self {
            cheb_degree: 5,
            cheb_steps: 10,
            lanczos_iters: 20,
            lower_ratio: 15.0,
            upper_factor: 1.1,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug)]
pub struct MgLevel {
    /// Index of this level in the agglomerate hierarchy.
    pub hierarchy_level: usize,
    pub space: DgSpace,
    pub matrix: CsrMatrix,
    inv_diag: Vec<f64>,
    smoother: Option<ChebyshevParams>,
}

impl MgLevel {
    pub fn n_dofs(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn smoother(&self) -> Option<&ChebyshevParams> {
        self.smoother.as_ref()
    }
}

/// Levels are stored finest first. `transfers[i]` prolongs from level `i + 1`
/// to level `i`; its transpose is the restriction.
#[derive(Debug)]
pub struct MgHierarchy {
    levels: Vec<MgLevel>,
    transfers: Vec<CsrMatrix>,
    coarse: DirectSolver,
    rhs: Vec<f64>,
}

/// Uses the `n_levels` finest levels of `hier`.
#[allow(clippy::too_many_arguments)]
pub fn build_mg(
    mesh: &BackgroundMesh,
    hier: &AgglomerateHierarchy,
    p: usize,
    family: Family,
    problem: &dyn Problem,
    c_sigma: f64,
    n_levels: usize,
    params: &MgParams,
) -> Result<MgHierarchy> {
    if n_levels == 0 || n_levels > hier.n_levels() {
        return invalid(format!("{n_levels} levels requested, hierarchy has {}", hier.n_levels()));
    }
    let list: Vec<usize> = (0..n_levels).collect();
    build_mg_levels(mesh, hier, &list, p, family, problem, c_sigma, params)
}

/// Uses the given hierarchy levels, finest first. The list must be strictly
/// increasing; it normally starts at the fine mesh level 0.
#[allow(clippy::too_many_arguments)]
pub fn build_mg_levels(
    mesh: &BackgroundMesh,
    hier: &AgglomerateHierarchy,
    levels: &[usize],
    p: usize,
    family: Family,
    problem: &dyn Problem,
    c_sigma: f64,
    params: &MgParams,
) -> Result<MgHierarchy> {
    if levels.is_empty() || levels.windows(2).any(|w| w[0] >= w[1]) || *levels.last().unwrap() >= hier.n_levels() {
        return invalid(format!("bad level list {levels:?} for a hierarchy of {} levels", hier.n_levels()));
    }
    if levels.len() < 2 {
        log::warn!("single-level multigrid reduces to a direct solve");
    }
    let mut mg_levels = Vec::with_capacity(levels.len());
    let mut rhs = Vec::new();
    for (k, &l) in levels.iter().enumerate() {
        let space = build_space(mesh, build_polytopal_mesh(mesh, hier.level(l))?, p, family)?;
        let system = assemble(mesh, &space, problem, c_sigma)?;
        if k == 0 {
            rhs = system.rhs;
        }
        let diag = system.matrix.diagonal();
        let smoother = if k + 1 < levels.len() {
            let lambda = lanczos_lambda_max(&system.matrix, &diag, params.lanczos_iters, params.seed)?;
            Some(ChebyshevParams::from_estimate(
                lambda,
                params.cheb_degree,
                params.cheb_steps,
                params.lower_ratio,
                params.upper_factor,
            ))
        } else {
            None
        };
        mg_levels.push(MgLevel {
            hierarchy_level: l,
            space,
            inv_diag: diag.iter().map(|d| 1.0 / d).collect(),
            matrix: system.matrix,
            smoother,
        });
    }
    let mut transfers = Vec::with_capacity(levels.len() - 1);
    for k in 0..levels.len() - 1 {
        let parent = hier.ancestor_map(levels[k], levels[k + 1]);
        transfers.push(build_injection(&mg_levels[k + 1].space, &mg_levels[k].space, &parent)?);
    }
    let coarse = DirectSolver::factor(&mg_levels.last().unwrap().matrix)?;
    Ok(MgHierarchy {
        levels: mg_levels,
        transfers,
        coarse,
        rhs,
    })
}

impl MgHierarchy {
    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, k: usize) -> &MgLevel {
        &self.levels[k]
    }

    /// Prolongation from level `k + 1` to level `k`.
    pub fn transfer(&self, k: usize) -> &CsrMatrix {
        &self.transfers[k]
    }

    /// DoFs per level, finest first.
    pub fn level_dofs(&self) -> Vec<usize> {
        self.levels.iter().map(MgLevel::n_dofs).collect()
    }

    pub fn finest(&self) -> &MgLevel {
        &self.levels[0]
    }

    /// Right-hand side assembled on the finest level.
    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    /// One V-cycle with zero initial guess applied to `b` on the finest level.
    pub fn v_cycle(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.finest().n_dofs() {
            return invalid(format!("vector of length {} for {} DoFs", b.len(), self.finest().n_dofs()));
        }
        self.cycle(0, b)
    }

    fn cycle(&self, k: usize, b: &[f64]) -> Result<Vec<f64>> {
        let level = &self.levels[k];
        let Some(smoother) = level.smoother.as_ref() else {
            return Ok(self.coarse.solve(b));
        };
        let a = &level.matrix;
        let mut x = vec![0.0; b.len()];
        chebyshev_smooth(a, &level.inv_diag, b, &mut x, smoother)?;
        let ax = a.matvec(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(bi, yi)| bi - yi).collect();
        let p = &self.transfers[k];
        let ec = self.cycle(k + 1, &p.matvec_transpose(&r))?;
        for (xi, e) in x.iter_mut().zip(p.matvec(&ec)) {
            *xi += e;
        }
        chebyshev_smooth(a, &level.inv_diag, b, &mut x, smoother)?;
        Ok(x)
    }

    /// PCG on the finest system with one V-cycle as preconditioner.
    pub fn solve(&self, opts: &CgOptions) -> Result<CgOutcome> {
        pcg(&self.finest().matrix, &self.rhs, |r| self.v_cycle(r), opts)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MgStudyRow {
    pub levels: usize,
    pub p: usize,
    pub dofs_finest: usize,
    pub iters_pcg: usize,
    pub iters_plain_cg: usize,
}

pub fn mg_study_csv(rows: &[MgStudyRow]) -> String {
    let mut s = String::from("levels,p,dofs_finest,iters_pcg,iters_plain_cg\n");
    for r in rows {
        let _ = writeln!(s, "{},{},{},{},{}", r.levels, r.p, r.dofs_finest, r.iters_pcg, r.iters_plain_cg);
    }
    s
}

#[cfg(test)]
mod tests;
