//! Gauss rules on fine cells and faces, in physical coordinates.

use crate::geometry::{add, cross, norm, scale, sub, Point};
use crate::mesh::{trilinear_jacobian, BackgroundMesh, CellKind, HEX_CORNERS, QUAD_CORNERS};

/// Gauss-Legendre nodes and weights on `[0, 1]`; weights sum to 1.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, t);
            dp = d;
            let step = p / d;
            t -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, t);
        if d != 0.0 {
            dp = d;
        }
        x[n - 1 - i] = 0.5 * (1.0 + t);
        w[n - 1 - i] = 1.0 / ((1.0 - t * t) * dp * dp);
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, d)
}

/// Gauss-Lobatto-Legendre nodes on `[0, 1]`, ascending, `p + 1` of them.
pub fn gll_nodes(p: usize) -> Vec<f64> {
    if p == 0 {
        return vec![0.5];
    }
    let n = p;
    let mut x: Vec<f64> = (0..=n).map(|i| (std::f64::consts::PI * i as f64 / n as f64).cos()).collect();
    for _ in 0..100 {
        let mut delta = 0.0f64;
        for xi in x.iter_mut() {
            let t = *xi;
            let (mut p0, mut p1) = (1.0, t);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let step = (t * p1 - p0) / ((n + 1) as f64 * p1);
            *xi = t - step;
            delta = delta.max(step.abs());
        }
        if delta < 1e-16 {
            break;
        }
    }
    let mut out: Vec<f64> = x.iter().map(|t| 0.5 * (1.0 - t)).collect();
    out[0] = 0.0;
    out[n] = 1.0;
    out
}

/// Gauss points per direction for exactness `q` on a line.
pub fn points_for_exactness(q: usize) -> usize {
    (q + 2) / 2
}

#[derive(Debug, Clone, Default)]
pub struct QuadRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct FaceRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    /// Unit normals, outward from the face owner.
    pub normals: Vec<Point>,
}

/// Rule exact to total degree `q` on affine cells; tensor Gauss on
/// quads/hexes, collapsed Gauss on triangles/tetrahedra.
pub fn cell_quadrature(mesh: &BackgroundMesh, c: usize, q: usize) -> QuadRule {
    let cell = mesh.cell(c);
    let v = |i: usize| *mesh.vertex(cell.vertices[i]);
    let mut rule = QuadRule::default();
    match cell.kind {
        CellKind::Quad => {
            let (x, w) = gauss_legendre(points_for_exactness(q));
            for (a, &s) in x.iter().enumerate() {
                for (b, &t) in x.iter().enumerate() {
                    let mut p = [0.0; 3];
                    let (mut ds, mut dt) = ([0.0; 3], [0.0; 3]);
                    for (k, &(i, j)) in QUAD_CORNERS.iter().enumerate() {
                        let fs = if i == 0 { 1.0 - s } else { s };
                        let ft = if j == 0 { 1.0 - t } else { t };
                        let gs = if i == 0 { -1.0 } else { 1.0 };
                        let gt = if j == 0 { -1.0 } else { 1.0 };
                        p = add(&p, &scale(&v(k), fs * ft));
                        ds = add(&ds, &scale(&v(k), gs * ft));
                        dt = add(&dt, &scale(&v(k), fs * gt));
                    }
                    rule.points.push(p);
                    rule.weights.push(w[a] * w[b] * (ds[0] * dt[1] - ds[1] * dt[0]).abs());
                }
            }
        }
        CellKind::Hex => {
            let (x, w) = gauss_legendre(points_for_exactness(q));
            let verts = mesh.vertices();
            for (a, &s) in x.iter().enumerate() {
                for (b, &t) in x.iter().enumerate() {
                    for (e, &r) in x.iter().enumerate() {
                        let mut p = [0.0; 3];
                        for (k, &(i, j, l)) in HEX_CORNERS.iter().enumerate() {
                            let f = (if i == 0 { 1.0 - s } else { s })
                                * (if j == 0 { 1.0 - t } else { t })
                                * (if l == 0 { 1.0 - r } else { r });
                            p = add(&p, &scale(&v(k), f));
                        }
                        let jac = trilinear_jacobian(cell, verts, [s, t, r]);
                        let det = crate::geometry::dot(&jac[0], &cross(&jac[1], &jac[2]));
                        rule.points.push(p);
                        rule.weights.push(w[a] * w[b] * w[e] * det.abs());
                    }
                }
            }
        }
        CellKind::Tri => {
            let (x, w) = gauss_legendre(points_for_exactness(q + 1));
            let (e1, e2) = (sub(&v(1), &v(0)), sub(&v(2), &v(0)));
            let det = (e1[0] * e2[1] - e1[1] * e2[0]).abs();
            for (a, &u) in x.iter().enumerate() {
                for (b, &s) in x.iter().enumerate() {
                    let (xi, eta) = (u, s * (1.0 - u));
                    rule.points.push(add(&v(0), &add(&scale(&e1, xi), &scale(&e2, eta))));
                    rule.weights.push(w[a] * w[b] * (1.0 - u) * det);
                }
            }
        }
        CellKind::Tet => {
            let (x, w) = gauss_legendre(points_for_exactness(q + 2));
            let (e1, e2, e3) = (sub(&v(1), &v(0)), sub(&v(2), &v(0)), sub(&v(3), &v(0)));
            let det = crate::geometry::dot(&e1, &cross(&e2, &e3)).abs();
            for (a, &u) in x.iter().enumerate() {
                for (b, &s) in x.iter().enumerate() {
                    for (e, &r) in x.iter().enumerate() {
                        let xi = u;
                        let eta = s * (1.0 - u);
                        let zeta = r * (1.0 - u) * (1.0 - s);
                        let p = add(&v(0), &add(&scale(&e1, xi), &add(&scale(&e2, eta), &scale(&e3, zeta))));
                        rule.points.push(p);
                        rule.weights.push(w[a] * w[b] * w[e] * (1.0 - u).powi(2) * (1.0 - s) * det);
                    }
                }
            }
        }
    }
    rule
}

/// Rule of exactness `q` on fine face `f`.
pub fn face_quadrature(mesh: &BackgroundMesh, f: usize, q: usize) -> FaceRule {
    let face = &mesh.faces()[f];
    let v = |i: usize| *mesh.vertex(face.vertices[i]);
    let mut rule = FaceRule::default();
    match face.vertices.len() {
        2 => {
            let (x, w) = gauss_legendre(points_for_exactness(q));
            let d = sub(&v(1), &v(0));
            let len = norm(&d);
            let n = [d[1] / len, -d[0] / len, 0.0];
            for (&t, &wt) in x.iter().zip(&w) {
                rule.points.push(add(&v(0), &scale(&d, t)));
                rule.weights.push(wt * len);
                rule.normals.push(n);
            }
        }
        3 => {
            let (x, w) = gauss_legendre(points_for_exactness(q + 1));
            let (e1, e2) = (sub(&v(1), &v(0)), sub(&v(2), &v(0)));
            let c = cross(&e1, &e2);
            let det = norm(&c);
            let n = scale(&c, 1.0 / det);
            for (a, &u) in x.iter().enumerate() {
                for (b, &s) in x.iter().enumerate() {
                    let (xi, eta) = (u, s * (1.0 - u));
                    rule.points.push(add(&v(0), &add(&scale(&e1, xi), &scale(&e2, eta))));
                    rule.weights.push(w[a] * w[b] * (1.0 - u) * det);
                    rule.normals.push(n);
                }
            }
        }
        _ => {
            let (x, w) = gauss_legendre(points_for_exactness(q));
            let corners = [v(0), v(1), v(2), v(3)];
            for (a, &s) in x.iter().enumerate() {
                for (b, &t) in x.iter().enumerate() {
                    let shape = [(1.0 - s) * (1.0 - t), s * (1.0 - t), s * t, (1.0 - s) * t];
                    let ds = [-(1.0 - t), 1.0 - t, t, -t];
                    let dt = [-(1.0 - s), -s, s, 1.0 - s];
                    let (mut p, mut js, mut jt) = ([0.0; 3], [0.0; 3], [0.0; 3]);
                    for k in 0..4 {
                        p = add(&p, &scale(&corners[k], shape[k]));
                        js = add(&js, &scale(&corners[k], ds[k]));
                        jt = add(&jt, &scale(&corners[k], dt[k]));
                    }
                    let c = cross(&js, &jt);
                    let det = norm(&c);
                    rule.points.push(p);
                    rule.weights.push(w[a] * w[b] * det);
                    rule.normals.push(scale(&c, 1.0 / det));
                }
            }
        }
    }
    rule
}
