//! Area of geodesic triangles, its gradient, and the cotangent Laplacian.

use crate::s3core::Vec4;

use super::mesh::TriMeshS3;

/// Component of `a` orthogonal to `span(b, c)` and `|b ∧ c|`.
fn perp(a: &Vec4, b: &Vec4, c: &Vec4) -> (Vec4, f64) {
    let bn = b.norm();
    let u1 = b / bn;
    let c1 = c - u1 * u1.dot(c);
    let cn = c1.norm();
    let u2 = c1 / cn;
    (a - u1 * u1.dot(a) - u2 * u2.dot(a), bn * cn)
}

/// Area of the geodesic triangle with unit vertices `a, b, c`:
/// `tan(E/2) = |a ∧ b ∧ c| / (1 + a·b + b·c + c·a)`.
pub fn triangle_area(a: &Vec4, b: &Vec4, c: &Vec4) -> f64 {
    let (ap, bc) = perp(a, b, c);
    let n = ap.norm() * bc;
    let d = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    2.0 * n.atan2(d)
}

/// Area and its ambient gradient with respect to each vertex.
pub fn triangle_area_gradient(a: &Vec4, b: &Vec4, c: &Vec4) -> (f64, [Vec4; 3]) {
    let d = 1.0 + a.dot(b) + b.dot(c) + c.dot(a);
    let mut n = 0.0;
    let mut dn = [Vec4::zeros(); 3];
    for (slot, (x, y, z)) in [(a, b, c), (b, c, a), (c, a, b)].into_iter().enumerate() {
        let (xp, yz) = perp(x, y, z);
        let len = xp.norm();
        if slot == 0 {
            n = len * yz;
        }
        if len > 0.0 {
            dn[slot] = xp * (yz / len);
        }
    }
    let dd = [b + c, c + a, a + b];
    let scale = 2.0 / (n * n + d * d);
    let grad = std::array::from_fn(|i| (dn[i] * d - dd[i] * n) * scale);
    (2.0 * n.atan2(d), grad)
}

/// Cotangent weights `wᵢⱼ = ½(cot α + cot β)` of the chordal (flat) triangles.
#[derive(Clone, Debug)]
pub struct CotanLaplacian {
    pub neighbours: Vec<Vec<(u32, f64)>>,
}

impl CotanLaplacian {
    pub fn new(mesh: &TriMeshS3) -> CotanLaplacian {
        let mut acc: Vec<Vec<(u32, f64)>> = vec![Vec::new(); mesh.vertex_count()];
        for tri in mesh.triangles() {
            let x = tri.map(|v| *mesh.vertex(v as usize).coords());
            for corner in 0..3 {
                let (i, j) = ((corner + 1) % 3, (corner + 2) % 3);
                let u = x[i] - x[corner];
                let v = x[j] - x[corner];
                let dot = u.dot(&v);
                let cross = (u.norm_squared() * v.norm_squared() - dot * dot).max(0.0).sqrt();
                let cot = if cross > 0.0 { dot / cross } else { 0.0 };
                let (a, b) = (tri[i], tri[j]);
                acc[a as usize].push((b, 0.5 * cot));
                acc[b as usize].push((a, 0.5 * cot));
            }
        }
        let neighbours = acc
            .into_iter()
            .map(|mut row| {
                row.sort_by_key(|&(j, _)| j);
                let mut merged: Vec<(u32, f64)> = Vec::with_capacity(row.len());
                for (j, w) in row {
                    match merged.last_mut() {
                        Some((k, acc)) if *k == j => *acc += w,
                        _ => merged.push((j, w)),
                    }
                }
                merged
            })
            .collect();
        CotanLaplacian { neighbours }
    }

    /// `Σⱼ wᵢⱼ (xⱼ − xᵢ)` for a vertex-valued field.
    pub fn apply_at(&self, i: usize, x: &[Vec4]) -> Vec4 {
        self.neighbours[i]
            .iter()
            .map(|&(j, w)| (x[j as usize] - x[i]) * w)
            .sum()
    }

    /// Solves `(Σⱼ wᵢⱼ)dᵢ − Σⱼ wᵢⱼ dⱼ = rᵢ` on the free vertices with `d = 0`
    /// elsewhere, by conjugate gradients on each coordinate.
    pub fn solve_dirichlet(&self, free: &[bool], rhs: &[Vec4], tol: f64, max_iter: usize) -> Option<Vec<Vec4>> {
        let n = rhs.len();
        let diag: Vec<f64> = self
            .neighbours
            .iter()
            .map(|r| r.iter().map(|&(_, w)| w).sum())
            .collect();
        let apply = |x: &[f64], out: &mut [f64]| {
            for i in 0..n {
                out[i] = if free[i] {
                    let mut s = diag[i] * x[i];
                    for &(j, w) in &self.neighbours[i] {
                        if free[j as usize] {
                            s -= w * x[j as usize];
                        }
                    }
                    s
                } else {
                    0.0
                };
            }
        };
        let mut result = vec![Vec4::zeros(); n];
        for coord in 0..4 {
            let b: Vec<f64> = (0..n).map(|i| if free[i] { rhs[i][coord] } else { 0.0 }).collect();
            let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
            if bnorm == 0.0 {
                continue;
            }
            let precond = |r: &[f64]| -> Vec<f64> {
                (0..n)
                    .map(|i| if free[i] && diag[i] > 0.0 { r[i] / diag[i] } else { 0.0 })
                    .collect()
            };
            let mut x = vec![0.0; n];
            let mut r = b.clone();
            let mut z = precond(&r);
            let mut p = z.clone();
            let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
            let mut ap = vec![0.0; n];
            let mut converged = false;
            for _ in 0..max_iter {
                apply(&p, &mut ap);
                let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
                if pap <= 0.0 {
                    return None;
                }
                let alpha = rz / pap;
                for i in 0..n {
                    x[i] += alpha * p[i];
                    r[i] -= alpha * ap[i];
                }
                if r.iter().map(|v| v * v).sum::<f64>().sqrt() <= tol * bnorm {
                    converged = true;
                    break;
                }
                z = precond(&r);
                let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
                let beta = rz_new / rz;
                rz = rz_new;
                for i in 0..n {
                    p[i] = z[i] + beta * p[i];
                }
            }
            if !converged {
                return None;
            }
            for i in 0..n {
                result[i][coord] = x[i];
            }
        }
        Some(result)
    }
}

/// Per-vertex `|ν · Σⱼ wᵢⱼ(xⱼ − xᵢ)| / h²` at interior vertices, with `ν`
/// the vertex normal and `h` the mean length of the incident edges; zero on
/// the boundary.
pub fn mean_curvature_residuals(mesh: &TriMeshS3) -> Vec<f64> {
    let lap = CotanLaplacian::new(mesh);
    let x: Vec<Vec4> = mesh.vertices().iter().map(|v| *v.coords()).collect();
    let normals = mesh.vertex_normals();
    (0..mesh.vertex_count())
        .map(|i| {
            if mesh.is_boundary(i) || lap.neighbours[i].is_empty() {
                return 0.0;
            }
            let h = lap.neighbours[i]
                .iter()
                .map(|&(j, _)| (x[j as usize] - x[i]).norm())
                .sum::<f64>()
                / lap.neighbours[i].len() as f64;
            normals[i].dot(&lap.apply_at(i, &x)).abs() / (h * h)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::s3core::PointS3;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn octant_has_area_half_pi() {
        let e = |i: usize| Vec4::from_fn(|r, _| if r == i { 1.0 } else { 0.0 });
        assert!((triangle_area(&e(0), &e(1), &e(2)) - FRAC_PI_2).abs() < 1e-14);
        assert!((triangle_area(&e(1), &e(2), &e(3)) - FRAC_PI_2).abs() < 1e-14);
    }

    #[test]
    fn area_matches_girard_on_random_triangles() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let p = [0; 3].map(|_| *PointS3::random(&mut rng).coords());
            // Angles at each vertex between the tangent directions to the other two.
            let angle = |a: &Vec4, b: &Vec4, c: &Vec4| {
                let tb = b - a * a.dot(b);
                let tc = c - a * a.dot(c);
                (tb.dot(&tc) / (tb.norm() * tc.norm())).clamp(-1.0, 1.0).acos()
            };
            let excess = angle(&p[0], &p[1], &p[2]) + angle(&p[1], &p[2], &p[0]) + angle(&p[2], &p[0], &p[1])
                - std::f64::consts::PI;
            assert!((triangle_area(&p[0], &p[1], &p[2]) - excess).abs() < 1e-9);
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let base = *PointS3::random(&mut rng).coords();
        for _ in 0..50 {
            let mut pts = [0; 3].map(|_| {
                let q = *PointS3::random(&mut rng).coords();
                (base + q * 0.3).normalize()
            });
            let (_, grad) = triangle_area_gradient(&pts[0], &pts[1], &pts[2]);
            for v in 0..3 {
                let dir = *PointS3::random(&mut rng).coords();
                let t = dir - pts[v] * pts[v].dot(&dir);
                let h = 1e-6;
                let orig = pts[v];
                pts[v] = (orig + t * h).normalize();
                let fp = triangle_area(&pts[0], &pts[1], &pts[2]);
                pts[v] = (orig - t * h).normalize();
                let fm = triangle_area(&pts[0], &pts[1], &pts[2]);
                pts[v] = orig;
                let fd = (fp - fm) / (2.0 * h);
                assert!((fd - grad[v].dot(&t)).abs() < 1e-7, "{fd} vs {}", grad[v].dot(&t));
            }
        }
    }

    #[test]
    fn laplacian_solve_inverts_operator() {
        let v = [
            [1.0, 0.0, 0.0, 0.0],
            [0.9, 0.1, 0.0, 0.0],
            [0.9, 0.1, 0.1, 0.0],
            [0.9, 0.0, 0.1, 0.0],
        ]
        .map(|c| PointS3::normalize(Vec4::from(c)).unwrap());
        let mesh = TriMeshS3::from_triangles(v.to_vec(), vec![[0, 1, 2], [0, 2, 3]])
            .unwrap()
            .subdivide()
            .subdivide();
        let lap = CotanLaplacian::new(&mesh);
        let free: Vec<bool> = (0..mesh.vertex_count()).map(|i| !mesh.is_boundary(i)).collect();
        let rhs: Vec<Vec4> = (0..mesh.vertex_count())
            .map(|i| Vec4::new(1.0, i as f64, 0.0, -2.0))
            .collect();
        let d = lap.solve_dirichlet(&free, &rhs, 1e-13, 500).unwrap();
        for i in 0..mesh.vertex_count() {
            if free[i] {
                let back = -lap.apply_at(i, &d);
                assert!((back - rhs[i]).norm() < 1e-9);
            } else {
                assert_eq!(d[i], Vec4::zeros());
            }
        }
    }
}
