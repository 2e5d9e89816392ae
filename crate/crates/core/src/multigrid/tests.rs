use super::*;
use crate::agglomeration::{build_rtree_hierarchy, Partition};
use crate::dg::{solve_direct, ConstantData, LinearSystem, ManufacturedCase, DEFAULT_C_SIGMA};
use crate::geometry::Point;
use crate::linalg::{dot, max_abs};
use crate::mesh::{generate_structured_quad, SplitMix64};
use crate::spatial_index::TreeOrder;

const UNIT: [[f64; 2]; 2] = [[0.0, 0.0], [1.0, 1.0]];

fn hierarchy(m: &BackgroundMesh) -> AgglomerateHierarchy {
    build_rtree_hierarchy(m, TreeOrder::default_for_dim(m.dim()), false).unwrap()
}

fn space_on(m: &BackgroundMesh, part: &Partition, p: usize, family: Family) -> DgSpace {
    build_space(m, build_polytopal_mesh(m, part).unwrap(), p, family).unwrap()
}

/// Random point inside a random fine cell.
fn random_point(m: &BackgroundMesh, rng: &mut SplitMix64) -> (usize, Point) {
    let c = (rng.next_u64() % m.n_cells() as u64) as usize;
    let pts: Vec<Point> = m.cell_points(c).collect();
    let w: Vec<f64> = pts.iter().map(|_| rng.next_f64() + 1e-3).collect();
    let total: f64 = w.iter().sum();
    let mut x = [0.0; 3];
    for (p, wi) in pts.iter().zip(&w) {
        for k in 0..3 {
            x[k] += wi / total * p[k];
        }
    }
    (c, x)
}

#[test]
fn injection_identity_and_errors() {
    let m = generate_structured_quad(4, UNIT).unwrap();
    let one = Partition::new(vec![0; 16], 1).unwrap();
    let s = space_on(&m, &one, 2, Family::Tensor);
    let p = build_injection(&s, &s, &[0]).unwrap();
    for i in 0..9 {
        for j in 0..9 {
            let e = if i == j { 1.0 } else { 0.0 };
            assert!((p.get(i, j) - e).abs() < 1e-14);
        }
    }
    let t = space_on(&m, &one, 1, Family::Tensor);
    assert!(build_injection(&s, &t, &[0]).is_err());
    let h = hierarchy(&m);
    let fine = space_on(&m, h.level(0), 2, Family::Tensor);
    let coarse = space_on(&m, h.level(1), 2, Family::Tensor);
    let mut parent = h.parents(1).to_vec();
    assert!(build_injection(&coarse, &fine, &parent).is_ok());
    parent[0] = (parent[0] + 1) % 4;
    assert!(build_injection(&coarse, &fine, &parent).is_err());
}

#[test]
fn injection_preserves_constants() {
    let m = crate::mesh::generate_perturbed_quad(16, 0.3, 9, UNIT).unwrap();
    let h = hierarchy(&m);
    let mut rng = SplitMix64::new(11);
    for family in [Family::Tensor, Family::Total] {
        let fine = space_on(&m, h.level(1), 2, family);
        let coarse = space_on(&m, h.level(3), 2, family);
        let c = coarse.interpolate(&m, |_| 1.75).unwrap();
        let f = build_injection(&coarse, &fine, &h.ancestor_map(1, 3)).unwrap().matvec(&c);
        for _ in 0..100 {
            let (cell, x) = random_point(&m, &mut rng);
            let (v, _) = fine.evaluate(&f, fine.agglomerate_of_cell(cell), &x);
            assert!((v - 1.75).abs() < 1e-12, "{family:?} {v}");
        }
    }
}

#[test]
fn injection_is_exact_on_all_levels() {
    let m = generate_structured_quad(64, UNIT).unwrap();
    let h = hierarchy(&m);
    let mut rng = SplitMix64::new(5);
    for family in [Family::Tensor, Family::Total] {
        let spaces: Vec<DgSpace> = (0..h.n_levels()).map(|l| space_on(&m, h.level(l), 2, family)).collect();
        for l in 0..h.n_levels() - 1 {
            let (fine, coarse) = (&spaces[l], &spaces[l + 1]);
            let c: Vec<f64> = (0..coarse.n_dofs()).map(|_| rng.next_signed()).collect();
            let p = build_injection(coarse, fine, h.parents(l + 1)).unwrap();
            let f = p.matvec(&c);
            let mut worst: f64 = 0.0;
            for _ in 0..200 {
                let (cell, x) = random_point(&m, &mut rng);
                let (vf, _) = fine.evaluate(&f, fine.agglomerate_of_cell(cell), &x);
                let (vc, _) = coarse.evaluate(&c, coarse.agglomerate_of_cell(cell), &x);
                worst = worst.max((vf - vc).abs());
            }
            assert!(worst <= 1e-12 * max_abs(&c), "{family:?} level {l}: {worst}");
            // restriction through the explicit transpose is bitwise identical
            let r: Vec<f64> = (0..fine.n_dofs()).map(|_| rng.next_signed()).collect();
            assert_eq!(p.transpose().matvec(&r), p.matvec_transpose(&r));
        }
    }
}

#[test]
fn lanczos_against_dense_eigensolve() {
    let m = generate_structured_quad(16, UNIT).unwrap();
    let h = hierarchy(&m);
    // 4x4 blocks of 4x4 cells, Q1: 64 DoFs
    let s = space_on(&m, h.level(2), 1, Family::Tensor);
    let sys = assemble(&m, &s, &ConstantData { f: 1.0, g: 0.0 }, DEFAULT_C_SIGMA).unwrap();
    let n = sys.matrix.nrows();
    assert_eq!(n, 64);
    let d = sys.matrix.diagonal();
    let dense = sys.matrix.to_dense();
    let scaled = nalgebra::DMatrix::from_fn(n, n, |i, j| dense[i * n + j] / (d[i] * d[j]).sqrt());
    let exact = scaled.symmetric_eigenvalues().max();
    let est = lanczos_lambda_max(&sys.matrix, &d, 20, MgParams::default().seed).unwrap();
    assert!(est <= exact * (1.0 + 1e-10) && est >= 0.95 * exact, "{est} vs {exact}");
    assert_eq!(est, lanczos_lambda_max(&sys.matrix, &d, 20, MgParams::default().seed).unwrap());
}

fn build(m: &BackgroundMesh, h: &AgglomerateHierarchy, levels: &[usize]) -> MgHierarchy {
    build_mg_levels(m, h, levels, 1, Family::Tensor, &ConstantData { f: 1.0, g: 0.0 }, DEFAULT_C_SIGMA, &MgParams::default()).unwrap()
}

#[test]
fn single_level_is_a_direct_solve() {
    let m = generate_structured_quad(8, UNIT).unwrap();
    let h = hierarchy(&m);
    let mg = build(&m, &h, &[0]);
    let x = mg.v_cycle(mg.rhs()).unwrap();
    let direct = solve_direct(&LinearSystem {
        matrix: mg.finest().matrix.clone(),
        rhs: mg.rhs().to_vec(),
    })
    .unwrap();
    assert_eq!(x, direct);
    assert_eq!(mg.solve(&CgOptions::default()).unwrap().iterations, 1);
}

#[test]
fn v_cycle_is_linear_symmetric_positive() {
    let m = generate_structured_quad(16, UNIT).unwrap();
    let h = hierarchy(&m);
    let mg = build(&m, &h, &[0, 1, 2]);
    assert_eq!(mg.level_dofs(), vec![1024, 256, 64]);
    let n = mg.finest().n_dofs();
    let mut rng = SplitMix64::new(17);
    for _ in 0..3 {
        let b1: Vec<f64> = (0..n).map(|_| rng.next_signed()).collect();
        let b2: Vec<f64> = (0..n).map(|_| rng.next_signed()).collect();
        let (m1, m2) = (mg.v_cycle(&b1).unwrap(), mg.v_cycle(&b2).unwrap());
        let (l, r) = (dot(&m1, &b2), dot(&b1, &m2));
        assert!((l - r).abs() <= 1e-10 * l.abs().max(r.abs()), "{l} {r}");
        assert!(dot(&m1, &b1) > 0.0);
        let (alpha, beta) = (0.7, -2.3);
        let comb: Vec<f64> = b1.iter().zip(&b2).map(|(x, y)| alpha * x + beta * y).collect();
        let mc = mg.v_cycle(&comb).unwrap();
        let scale = max_abs(&mc);
        for i in 0..n {
            assert!((mc[i] - (alpha * m1[i] + beta * m2[i])).abs() <= 1e-12 * scale);
        }
    }
    assert!(mg.v_cycle(&[1.0]).is_err());
}

#[test]
fn two_level_iteration_contracts() {
    let m = generate_structured_quad(16, UNIT).unwrap();
    let h = hierarchy(&m);
    // 256 cells down to 16 agglomerates
    let mg = build(&m, &h, &[0, 2]);
    assert_eq!(mg.level(1).space.n_agglomerates(), 16);
    let a = &mg.finest().matrix;
    let b = mg.rhs();
    let exact = solve_direct(&LinearSystem {
        matrix: a.clone(),
        rhs: b.to_vec(),
    })
    .unwrap();
    let energy = |x: &[f64]| {
        let e: Vec<f64> = x.iter().zip(&exact).map(|(u, v)| u - v).collect();
        dot(&e, &a.matvec(&e)).sqrt()
    };
    let mut x = vec![0.0; b.len()];
    let mut prev = energy(&x);
    for _ in 0..5 {
        let ax = a.matvec(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(u, v)| u - v).collect();
        for (xi, c) in x.iter_mut().zip(mg.v_cycle(&r).unwrap()) {
            *xi += c;
        }
        let e = energy(&x);
        assert!(e < 0.5 * prev, "{e} vs {prev}");
        prev = e;
    }
}

#[test]
fn pcg_iterations_are_level_robust() {
    let m = generate_structured_quad(32, UNIT).unwrap();
    let h = hierarchy(&m);
    let mut iters = Vec::new();
    for n in 2..=4 {
        let mg = build_mg(&m, &h, 1, Family::Tensor, &ConstantData { f: 1.0, g: 0.0 }, DEFAULT_C_SIGMA, n, &MgParams::default()).unwrap();
        let out = mg.solve(&CgOptions::default()).unwrap();
        iters.push(out.iterations);
        let plain = cg(&mg.finest().matrix, mg.rhs(), &CgOptions::default()).unwrap();
        assert!(plain.iterations > 2 * out.iterations);
    }
    assert!(iters.iter().max().unwrap() - iters.iter().min().unwrap() <= 2, "{iters:?}");
    assert!(iters.iter().all(|&i| i <= 10), "{iters:?}");
}

#[test]
fn manufactured_solution_through_mg() {
    let m = generate_structured_quad(16, UNIT).unwrap();
    let h = hierarchy(&m);
    let case = ManufacturedCase::new(2).unwrap();
    let mg = build_mg(&m, &h, 2, Family::Total, &case, DEFAULT_C_SIGMA, 3, &MgParams::default()).unwrap();
    let out = mg.solve(&CgOptions::default()).unwrap();
    let direct = solve_direct(&LinearSystem {
        matrix: mg.finest().matrix.clone(),
        rhs: mg.rhs().to_vec(),
    })
    .unwrap();
    let diff: Vec<f64> = out.x.iter().zip(&direct).map(|(u, v)| u - v).collect();
    assert!(max_abs(&diff) < 1e-7 * max_abs(&direct));
}

#[test]
fn bad_level_lists() {
    let m = generate_structured_quad(8, UNIT).unwrap();
    let h = hierarchy(&m);
    let data = ConstantData { f: 1.0, g: 0.0 };
    let p = MgParams::default();
    for levels in [&[][..], &[2, 2], &[0, 2, 1], &[0, 9]] {
        assert!(build_mg_levels(&m, &h, levels, 1, Family::Tensor, &data, 10.0, &p).is_err());
    }
    assert!(build_mg(&m, &h, 1, Family::Tensor, &data, 10.0, 0, &p).is_err());
    assert!(build_mg(&m, &h, 1, Family::Tensor, &data, 10.0, h.n_levels() + 1, &p).is_err());
}

#[test]
fn study_csv() {
    let row = MgStudyRow {
        levels: 4,
        p: 1,
        dofs_finest: 16384,
        iters_pcg: 6,
        iters_plain_cg: 253,
    };
    assert_eq!(mg_study_csv(&[row]), "levels,p,dofs_finest,iters_pcg,iters_plain_cg\n4,1,16384,6,253\n");
}
