use crate::dg::{gauss_legendre, DgSpace, Family};
use crate::error::{invalid, Result};
use crate::linalg::CsrMatrix;

/// Prolongation `P: V_coarse -> V_fine` of the natural injection.
/// `parent[f]` is the coarse agglomerate containing fine agglomerate `f`.
///
/// For `Q_p` the coarse polynomial is sampled at the fine Lagrange nodes; for
/// `P_p` it is projected onto the fine orthonormal basis over the fine box,
/// which is exact since both spaces are polynomial on axis-aligned boxes.
pub fn build_injection(coarse: &DgSpace, fine: &DgSpace, parent: &[usize]) -> Result<CsrMatrix> {
    if coarse.degree() != fine.degree() || coarse.family() != fine.family() || coarse.dim() != fine.dim() {
        return invalid("injection needs spaces of equal degree, family and dimension");
    }
    if parent.len() != fine.n_agglomerates() || parent.iter().any(|&c| c >= coarse.n_agglomerates()) {
        return invalid("parent map does not match the spaces");
    }
    for (f, agg) in fine.poly().agglomerates.iter().enumerate() {
        if agg.cells.iter().any(|&c| coarse.agglomerate_of_cell(c) != parent[f]) {
            return invalid(format!("fine agglomerate {f} is not a child of coarse agglomerate {}", parent[f]));
        }
    }
    let n = fine.n_local();
    let basis = fine.basis();
    let dim = fine.dim();
    let mut triplets = Vec::with_capacity(fine.n_agglomerates() * n * n);
    let (mut v, mut g) = (vec![0.0; n], vec![[0.0; 3]; n]);
    let (mut vf, mut gf) = (vec![0.0; n], vec![[0.0; 3]; n]);
    match fine.family() {
        Family::Tensor => {
            for (f, agg) in fine.poly().agglomerates.iter().enumerate() {
                let c = parent[f];
                for (i, x) in basis.lagrange_points(&agg.mbr).iter().enumerate() {
                    basis.eval(coarse.mbr(c), x, &mut v, &mut g);
                    for (j, &val) in v.iter().enumerate() {
                        if val != 0.0 {
                            triplets.push((fine.offset(f) + i, coarse.offset(c) + j, val));
                        }
                    }
                }
            }
        }
        Family::Total => {
            let (gx, gw) = gauss_legendre(fine.degree() + 1);
            let m = gx.len();
            for (f, agg) in fine.poly().agglomerates.iter().enumerate() {
                let c = parent[f];
                let mut block = vec![0.0; n * n];
                for idx in 0..m.pow(dim as u32) {
                    let mut x = [0.0; 3];
                    let mut w = 1.0;
                    let mut rest = idx;
                    for (k, xk) in x.iter_mut().enumerate().take(dim) {
                        *xk = agg.mbr.lo[k] + gx[rest % m] * agg.mbr.extent(k);
                        w *= gw[rest % m];
                        rest /= m;
                    }
                    basis.eval(&agg.mbr, &x, &mut vf, &mut gf);
                    basis.eval(coarse.mbr(c), &x, &mut v, &mut g);
                    for i in 0..n {
                        for j in 0..n {
                            block[i * n + j] += w * vf[i] * v[j];
                        }
                    }
                }
                for i in 0..n {
                    for j in 0..n {
                        triplets.push((fine.offset(f) + i, coarse.offset(c) + j, block[i * n + j]));
                    }
                }
            }
        }
    }
    CsrMatrix::from_triplets(fine.n_dofs(), coarse.n_dofs(), &triplets)
}
