//! Graphicality of a disc over the axis rotation: every orbit of the rotation
//! fixing `C̃₀⁰` meets the disc once.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::lattice::axis::{self_intersection, winding_number};
use crate::lattice::{boundary_parts, Lattice};
use crate::s3core::{PointS3, Vec4};

use super::mesh::{cone_coefficients, TriMeshS3};
use super::{disc_cell, PlateauError};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphicalReport {
    pub triangles: usize,
    /// All projected triangles have the same orientation.
    pub orientation_consistent: bool,
    /// `|Σ signed area(projected triangle) − area(projected boundary)|`.
    pub area_balance: f64,
    pub boundary_simple: bool,
    pub boundary_winding: i64,
    /// Triangles away from the corners whose plane nearly contains the rotation field.
    pub tangent_triangles: usize,
    /// Triangles near the corners, where transversality is not asserted.
    pub corner_triangles: usize,
    pub min_transversality: f64,
    pub orbits: usize,
    /// Orbits meeting the disc other than exactly once.
    pub bad_orbits: usize,
    pub bad_orbit_witness: Option<[f64; 4]>,
}

impl GraphicalReport {
    pub fn passed(&self) -> bool {
        self.orientation_consistent
            && self.area_balance < 1e-9
            && self.boundary_simple
            && self.boundary_winding.abs() == 1
            && self.tangent_triangles == 0
            && self.bad_orbits == 0
    }
}

type P2 = [f64; 2];

fn signed_area(a: P2, b: P2, c: P2) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
}

/// Separating-axis test on the edge normals of both triangles; contact
/// within `eps` does not count as overlap.
fn triangles_overlap(t: &[P2; 3], u: &[P2; 3], eps: f64) -> bool {
    for tri in [t, u] {
        for e in 0..3 {
            let (a, b) = (tri[e], tri[(e + 1) % 3]);
            let axis = [b[1] - a[1], a[0] - b[0]];
            let len = axis[0].hypot(axis[1]);
            if len == 0.0 {
                continue;
            }
            let proj = |p: &P2| (p[0] * axis[0] + p[1] * axis[1]) / len;
            let (tmin, tmax) = t
                .iter()
                .map(proj)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
            let (umin, umax) = u
                .iter()
                .map(proj)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
            if tmax <= umin + eps || umax <= tmin + eps {
                return false;
            }
        }
    }
    true
}

/// First pair of overlapping projected triangles, by a uniform grid on bounding boxes.
fn first_overlap(tris: &[[P2; 3]], eps: f64) -> Option<(usize, usize)> {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in tris.iter().flatten() {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let n = ((tris.len() as f64).sqrt().ceil() as usize).max(1);
    let size = [
        (hi[0] - lo[0]).max(1e-300) / n as f64,
        (hi[1] - lo[1]).max(1e-300) / n as f64,
    ];
    let cell = |p: f64, d: usize| (((p - lo[d]) / size[d]).floor() as isize).clamp(0, n as isize - 1) as usize;
    let mut grid: Vec<Vec<usize>> = vec![Vec::new(); n * n];
    for (i, t) in tris.iter().enumerate() {
        let (x0, x1) = (
            t.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min),
            t.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max),
        );
        let (y0, y1) = (
            t.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min),
            t.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max),
        );
        for cx in cell(x0, 0)..=cell(x1, 0) {
            for cy in cell(y0, 1)..=cell(y1, 1) {
                grid[cx * n + cy].push(i);
            }
        }
    }
    let mut best: Option<(usize, usize)> = None;
    for bucket in &grid {
        for (a, &i) in bucket.iter().enumerate() {
            for &j in &bucket[a + 1..] {
                if best.is_some_and(|b| b <= (i, j)) {
                    continue;
                }
                if triangles_overlap(&tris[i], &tris[j], eps) {
                    best = Some((i, j));
                }
            }
        }
    }
    best
}

/// Checks that the disc projects injectively to the plane of `C̃₀⁰` and that
/// `orbits` random rotation orbits through `Ω₀⁰` each meet it exactly once.
///
/// An overlap of projected triangles is returned as an error naming the pair.
pub fn verify_graphical<R: Rng + ?Sized>(
    mesh: &TriMeshS3,
    lat: &Lattice,
    orbits: usize,
    rng: &mut R,
) -> Result<GraphicalReport, PlateauError> {
    let idx = disc_cell(lat);
    let axis = lat.axis(&idx);
    let [a1, a2] = axis.basis();
    let [f1, f2] = axis.orthocomplement().basis();
    let project = |p: &PointS3| [p.coords().dot(&f1), p.coords().dot(&f2)];

    let projected: Vec<[P2; 3]> = (0..mesh.triangle_count())
        .map(|t| mesh.triangle_points(t).map(|p| project(&p)))
        .collect();
    let scale = mesh.mean_edge_length();
    if let Some((a, b)) = first_overlap(&projected, 1e-12 * scale) {
        return Err(PlateauError::GraphicalityViolation { a, b });
    }
    let areas: Vec<f64> = projected.iter().map(|t| signed_area(t[0], t[1], t[2])).collect();
    let orientation_consistent = areas.iter().all(|&a| a > 0.0) || areas.iter().all(|&a| a < 0.0);

    let loops = mesh.boundary_loops();
    let (boundary_simple, boundary_winding, polygon_area) = match loops.as_slice() {
        [lp] => {
            let poly: Vec<P2> = lp.iter().map(|&v| project(mesh.vertex(v as usize))).collect();
            let area: f64 = (0..poly.len())
                .map(|i| {
                    let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
                    0.5 * (p[0] * q[1] - p[1] * q[0])
                })
                .sum();
            (
                self_intersection(&poly).is_none(),
                winding_number(&poly, [0.0, 0.0]),
                area,
            )
        }
        _ => (false, 0, 0.0),
    };
    let area_balance = (areas.iter().sum::<f64>() - polygon_area).abs();

    let corners = boundary_parts(lat, &idx).vertices;
    let field = |p: &Vec4| a2 * a1.dot(p) - a1 * a2.dot(p);
    let mut tangent_triangles = 0;
    let mut corner_triangles = 0;
    let mut min_transversality = f64::INFINITY;
    for t in 0..mesh.triangle_count() {
        let pts = mesh.triangle_points(t);
        let centre = PointS3::normalize(pts.iter().map(|p| *p.coords()).sum()).expect("short triangle");
        let size = (0..3).map(|e| pts[e].chord(&pts[(e + 1) % 3])).fold(0.0, f64::max);
        if corners.iter().any(|c| c.chord(&centre) < 2.0 * size) {
            corner_triangles += 1;
            continue;
        }
        let k = field(centre.coords());
        let n = mesh.triangle_normal(t);
        let tr = (k.dot(&n) / (k.norm() * n.norm())).abs();
        min_transversality = min_transversality.min(tr);
        if tr < 1e-4 {
            tangent_triangles += 1;
        }
    }

    let cell = lat.tetra(&idx);
    let normals: Vec<Vec4> = (0..mesh.triangle_count()).map(|t| mesh.triangle_normal(t)).collect();
    let tris: Vec<[Vec4; 3]> = (0..mesh.triangle_count())
        .map(|t| mesh.triangle_points(t).map(|p| *p.coords()))
        .collect();
    let mut bad_orbits = 0;
    let mut bad_orbit_witness = None;
    for _ in 0..orbits {
        let x = *cell.random_point(rng).coords();
        let (u, v) = (a1.dot(&x), a2.dot(&x));
        let c = x - a1 * u - a2 * v;
        let r = u.hypot(v);
        let (u1, u2) = ((a1 * u + a2 * v) / r, (a2 * u - a1 * v) / r);
        let mut hits: Vec<Vec4> = Vec::new();
        for (n, tri) in normals.iter().zip(&tris) {
            let (p, q, s) = (r * n.dot(&u1), r * n.dot(&u2), -n.dot(&c));
            let rr = p.hypot(q);
            if rr == 0.0 || s.abs() > rr {
                continue;
            }
            let phi = q.atan2(p);
            let delta = (s / rr).acos();
            for theta in [phi + delta, phi - delta] {
                let y = c + (u1 * theta.cos() + u2 * theta.sin()) * r;
                let inside =
                    cone_coefficients(&tri[0], &tri[1], &tri[2], &y).is_some_and(|w| w.iter().all(|&z| z >= -1e-12));
                if inside && hits.iter().all(|h| (h - y).norm() > 1e-9) {
                    hits.push(y);
                }
            }
        }
        if hits.len() != 1 {
            bad_orbits += 1;
            bad_orbit_witness.get_or_insert(x.into());
        }
    }

    Ok(GraphicalReport {
        triangles: mesh.triangle_count(),
        orientation_consistent,
        area_balance,
        boundary_simple,
        boundary_winding,
        tangent_triangles,
        corner_triangles,
        min_transversality,
        orbits,
        bad_orbits,
        bad_orbit_witness,
    })
}
