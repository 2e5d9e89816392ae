//! Graph-partition baseline: recursive inertial bisection of the cell
//! centroids, followed by a connectivity repair.

use super::partition::Partition;
use super::polytopal::components;
use crate::error::{invalid, Result};
use crate::geometry::Point;
use crate::mesh::{BackgroundMesh, SplitMix64};

fn principal_axis(points: &[Point], cells: &[usize], dim: usize, rng: &mut SplitMix64) -> Point {
    let n = cells.len() as f64;
    let mut mean = [0.0; 3];
    for &c in cells {
        for k in 0..dim {
            mean[k] += points[c][k] / n;
        }
    }
    let mut cov = [[0.0; 3]; 3];
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for &c in cells {
        for i in 0..dim {
            lo[i] = lo[i].min(points[c][i]);
            hi[i] = hi[i].max(points[c][i]);
            for j in 0..dim {
                cov[i][j] += (points[c][i] - mean[i]) * (points[c][j] - mean[j]);
            }
        }
    }
    let longest = || {
        let mut axis = [0.0; 3];
        let k = (0..dim)
            .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])).then(b.cmp(&a)))
            .unwrap_or(0);
        axis[k] = 1.0;
        axis
    };
    let mut v = [0.0; 3];
    for x in v.iter_mut().take(dim) {
        *x = rng.next_signed();
    }
    let mut lambda = 0.0;
    for _ in 0..100 {
        let mut w = [0.0; 3];
        for i in 0..dim {
            for j in 0..dim {
                w[i] += cov[i][j] * v[j];
            }
        }
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            return longest();
        }
        lambda = norm;
        v = w.map(|x| x / norm);
    }
    // Nearly isotropic clouds have no meaningful principal direction.
    let trace: f64 = (0..dim).map(|i| cov[i][i]).sum();
    let rest = (trace - lambda) / (dim - 1) as f64;
    if lambda - rest <= 1e-6 * lambda {
        return longest();
    }
    let lead = (0..dim).max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs())).unwrap_or(0);
    if v[lead] < 0.0 {
        v = v.map(|x| -x);
    }
    v
}

fn bisect(
    points: &[Point],
    dim: usize,
    mut cells: Vec<usize>,
    parts: usize,
    first: usize,
    rng: &mut SplitMix64,
    out: &mut [usize],
) {
    if parts == 1 {
        for c in cells {
            out[c] = first;
        }
        return;
    }
    let axis = principal_axis(points, &cells, dim, rng);
    let proj = |c: usize| (0..dim).map(|k| points[c][k] * axis[k]).sum::<f64>();
    cells.sort_by(|&a, &b| proj(a).total_cmp(&proj(b)).then(a.cmp(&b)));
    let left_parts = parts / 2;
    let cut = (cells.len() * left_parts + parts / 2) / parts;
    let right = cells.split_off(cut.clamp(left_parts, cells.len() - (parts - left_parts)));
    bisect(points, dim, cells, left_parts, first, rng, out);
    bisect(points, dim, right, parts - left_parts, first + left_parts, rng, out);
}

/// Moves every non-largest component of a part to the neighbouring part it
/// shares the most faces with, until all parts are connected.
fn repair(mesh: &BackgroundMesh, assignment: &mut [usize], n_parts: usize) {
    for _ in 0..4 * n_parts.max(4) {
        let mut groups = vec![Vec::new(); n_parts];
        for (c, &p) in assignment.iter().enumerate() {
            groups[p].push(c);
        }
        let mut moved = false;
        for cells in &groups {
            for comp in components(mesh, assignment, cells).into_iter().skip(1) {
                let mut votes = std::collections::BTreeMap::<usize, usize>::new();
                for &c in &comp {
                    for &f in mesh.cell_faces(c) {
                        let face = &mesh.faces()[f];
                        let Some(nb) = face.neighbor else { continue };
                        let other = if face.owner == c { nb } else { face.owner };
                        if assignment[other] != assignment[c] {
                            *votes.entry(assignment[other]).or_default() += 1;
                        }
                    }
                }
                if let Some((&target, _)) = votes.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))) {
                    for &c in &comp {
                        assignment[c] = target;
                    }
                    moved = true;
                }
            }
        }
        if !moved {
            return;
        }
    }
}

pub fn graph_partition_baseline(mesh: &BackgroundMesh, n_parts: usize, seed: u64) -> Result<Partition> {
    let n = mesh.n_cells();
    if n_parts == 0 || n_parts > n {
        return invalid(format!("n_parts must lie in 1..={n}, got {n_parts}"));
    }
    let points: Vec<Point> = (0..n).map(|c| mesh.cell_centroid(c)).collect();
    let mut rng = SplitMix64::new(seed);
    let mut assignment = vec![0; n];
    bisect(&points, mesh.dim(), (0..n).collect(), n_parts, 0, &mut rng, &mut assignment);
    repair(mesh, &mut assignment, n_parts);
    Partition::new(assignment, n_parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_perturbed_quad, generate_structured_quad, generate_structured_quad_counts};

    const UNIT: [[f64; 2]; 2] = [[0.0, 0.0], [1.0, 1.0]];

    fn connected(m: &BackgroundMesh, p: &Partition) -> bool {
        p.groups()
            .iter()
            .all(|g| components(m, p.assignment(), g).len() == 1)
    }

    #[test]
    fn one_part() {
        let m = generate_structured_quad(5, UNIT).unwrap();
        let p = graph_partition_baseline(&m, 1, 0).unwrap();
        assert!(p.assignment().iter().all(|&a| a == 0));
    }

    #[test]
    fn strip_of_two() {
        let m = generate_structured_quad_counts([2, 1], [[0.0, 0.0], [2.0, 1.0]]).unwrap();
        let p = graph_partition_baseline(&m, 2, 3).unwrap();
        assert_eq!(p.assignment(), &[0, 1]);
    }

    #[test]
    fn sixteen_parts_balanced_and_connected() {
        let m = generate_structured_quad(32, UNIT).unwrap();
        let p = graph_partition_baseline(&m, 16, 42).unwrap();
        assert_eq!(p.n_parts(), 16);
        assert!(connected(&m, &p));
        for s in p.sizes() {
            assert!((48..=80).contains(&s), "size {s}");
        }
    }

    #[test]
    fn perturbed_grid_repairs_to_connected() {
        let m = generate_perturbed_quad(30, 0.4, 7, UNIT).unwrap();
        for parts in [3, 7, 20] {
            let p = graph_partition_baseline(&m, parts, 11).unwrap();
            assert!(connected(&m, &p));
            let target = 900 / parts;
            let slack = (900usize.div_ceil(parts)) / 4 + 1;
            for s in p.sizes() {
                assert!(s.abs_diff(target) <= slack, "parts {parts}, size {s}");
            }
        }
    }

    #[test]
    fn out_of_range() {
        let m = generate_structured_quad(2, UNIT).unwrap();
        assert!(graph_partition_baseline(&m, 0, 0).is_err());
        assert!(graph_partition_baseline(&m, 5, 0).is_err());
    }

    #[test]
    fn seeded_runs_agree() {
        let m = generate_perturbed_quad(12, 0.3, 1, UNIT).unwrap();
        assert_eq!(
            graph_partition_baseline(&m, 5, 9).unwrap(),
            graph_partition_baseline(&m, 5, 9).unwrap()
        );
    }
}
