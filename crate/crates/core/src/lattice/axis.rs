//! Orbits of the rotations along the axis of a cell `Ωᵢʲ`.
//!
//! The rotations are `R^t = R_{C̃}^t` with `C̃` the orthocomplement of the axis
//! `S(tᵢ, tʲ)`; they turn the axis plane and fix `C̃`.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::Rng;
use serde::Serialize;

use crate::s3core::{killing_eval, orbit_project, rotate_about, GreatCircle, PointS3, SphericalTetrahedron};

use super::boundary::{boundary_parts, boundary_side, random_in_triangle};
use super::{CellIndex, Lattice, Variant};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct AxisRotationConfig {
    pub n_orbits: usize,
    pub samples_per_orbit: usize,
    /// Points per arc when projecting `Q`.
    pub quad_samples: usize,
}

impl Default for AxisRotationConfig {
    fn default() -> Self {
        AxisRotationConfig {
            n_orbits: 256,
            samples_per_orbit: 512,
            quad_samples: 128,
        }
    }
}

/// The single point shared by `R^{±π/2}Ω` and `Ω`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ContactCase {
    /// `{tᵢ}`.
    Lower,
    /// `{tʲ}`.
    Upper,
}

#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub item: &'static str,
    pub witness: [f64; 4],
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct AxisRotationReport {
    pub cell: CellIndex,
    /// Contact at `t = +π/2` and `t = −π/2`.
    pub contact: [Option<ContactCase>; 2],
    pub orbits_checked: usize,
    pub orbits_through_quad: usize,
    /// Winding number of the projected quadrilateral around the projected pole `tᵢ`.
    pub winding: i64,
    pub violations: Vec<Violation>,
}

impl AxisRotationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

const INSIDE_TOL: f64 = 1e-10;
const STRICT: f64 = 1e-9;

struct Cell<'a> {
    tetra: &'a SphericalTetrahedron,
    quarters: Vec<SphericalTetrahedron>,
    c_tilde: GreatCircle,
}

impl Cell<'_> {
    fn at(&self, x: &PointS3, t: f64) -> PointS3 {
        rotate_about(&self.c_tilde, t).apply(x)
    }

    fn min_coeff(&self, x: &PointS3, t: f64) -> f64 {
        self.tetra.membership(&self.at(x, t)).min_coeff()
    }

    /// Sign change of the minimum cone coefficient between `inside` and `outside`.
    fn crossing(&self, x: &PointS3, mut inside: f64, mut outside: f64) -> f64 {
        for _ in 0..80 {
            let mid = 0.5 * (inside + outside);
            if self.min_coeff(x, mid) >= 0.0 {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        inside
    }
}

pub fn axis_rotation_report<R: Rng + ?Sized>(
    lat: &Lattice,
    idx: &CellIndex,
    config: &AxisRotationConfig,
    rng: &mut R,
) -> AxisRotationReport {
    let axis = lat.axis(idx);
    let cell = Cell {
        tetra: lat.tetra(idx),
        quarters: Variant::QUARTERS
            .iter()
            .map(|v| {
                lat.variant_tetra(idx.i2, idx.j2, *v)
                    .expect("quarter cells are non-degenerate")
            })
            .collect(),
        c_tilde: axis.orthocomplement(),
    };
    let mut report = AxisRotationReport {
        cell: *idx,
        contact: [None, None],
        orbits_checked: 0,
        orbits_through_quad: 0,
        winding: 0,
        violations: Vec::new(),
    };
    let (ti, tj) = (lat.t_lower(idx.i2), lat.t_upper(idx.j2));

    check_rotated_copies(&cell, ti, tj, &mut report);

    let parts = boundary_parts(lat, idx);
    let n = config.n_orbits.max(4);
    for o in 0..n {
        let (x, on_quad) = match o {
            0 => (cell.tetra.centroid(), false),
            _ if o % 4 == 1 => (parts.quad.point_at(4.0 * rng.random::<f64>()), true),
            _ if o % 4 == 2 => {
                let tri = if rng.random::<bool>() {
                    &parts.plus
                } else {
                    &parts.minus
                };
                (random_in_triangle(&tri[rng.random_range(0..2)], rng), false)
            }
            _ => (cell.tetra.random_point(rng), false),
        };
        report.orbits_checked += 1;
        if on_quad {
            report.orbits_through_quad += 1;
            check_quad_orbit(&cell, &x, config.samples_per_orbit, &mut report);
        } else {
            check_orbit(&cell, &x, config.samples_per_orbit, &mut report);
        }
    }

    check_projection(
        &cell,
        &axis,
        &ti,
        &parts.quad.polyline(config.quad_samples),
        n,
        rng,
        &mut report,
    );
    report
}

fn violation(report: &mut AxisRotationReport, item: &'static str, p: &PointS3, detail: String) {
    report.violations.push(Violation {
        item,
        witness: p.to_array(),
        detail,
    });
}

/// Rotated copies are disjoint for `|t| ∈ (π/2, 3π/2)` and touch in one point at `±π/2`.
fn check_rotated_copies(cell: &Cell, ti: PointS3, tj: PointS3, report: &mut AxisRotationReport) {
    let rotated = |t: f64| {
        let g = rotate_about(&cell.c_tilde, t);
        SphericalTetrahedron::new(cell.tetra.vertices().map(|v| g.apply(&v))).expect("isometric image")
    };
    for s in 0..32 {
        let t = FRAC_PI_2 + PI * (s as f64 + 0.5) / 32.0;
        let common = cell.tetra.intersection_vertices(&rotated(t), 1e-12);
        if let Some(p) = common.first() {
            violation(report, "rotated-disjoint", p, format!("R^t Ω meets Ω at t = {t}"));
        }
    }
    for (slot, t) in [FRAC_PI_2, -FRAC_PI_2].into_iter().enumerate() {
        let common = cell.tetra.intersection_vertices(&rotated(t), 1e-10);
        match common.as_slice() {
            [p] if p.chord(&ti) < 1e-9 => report.contact[slot] = Some(ContactCase::Lower),
            [p] if p.chord(&tj) < 1e-9 => report.contact[slot] = Some(ContactCase::Upper),
            _ => violation(
                report,
                "rotated-contact",
                common.first().unwrap_or(&ti),
                format!("R^{t} Ω ∩ Ω has {} extreme points", common.len()),
            ),
        }
    }
}

fn quarter_signature(cell: &Cell, p: &PointS3) -> [bool; 4] {
    std::array::from_fn(|q| cell.quarters[q].membership(p).min_coeff() >= -STRICT)
}

/// An orbit through a point of the cell that is not on `Q`.
fn check_orbit(cell: &Cell, x: &PointS3, n: usize, report: &mut AxisRotationReport) {
    let ts: Vec<f64> = (0..n).map(|s| TAU * s as f64 / n as f64).collect();
    let inside: Vec<bool> = ts.iter().map(|&t| cell.min_coeff(x, t) >= -INSIDE_TOL).collect();
    if inside.iter().all(|&b| b) {
        violation(report, "orbit-arc", x, "orbit lies inside the cell".into());
        return;
    }
    // Cyclic run of inside samples through s = 0.
    let mut fwd = 0;
    while inside[(fwd + 1) % n] {
        fwd += 1;
    }
    let mut back = 0;
    while inside[(n - back - 1) % n] {
        back += 1;
    }
    let run = fwd + back + 1;
    let total = inside.iter().filter(|&&b| b).count();
    if total != run {
        violation(
            report,
            "orbit-arc",
            x,
            format!("{total} inside samples but a run of {run}"),
        );
    }

    // Quarter cells: every strictly interior sample lies in the same quarters.
    let mut signature: Option<[bool; 4]> = None;
    for (s, &t) in ts.iter().enumerate() {
        if inside[s] && cell.min_coeff(x, t) > STRICT {
            let p = cell.at(x, t);
            let sig = quarter_signature(cell, &p);
            match signature {
                None => signature = Some(sig),
                Some(prev) if prev != sig => {
                    violation(report, "quarter-cells", &p, format!("quarters {sig:?} vs {prev:?}"));
                }
                _ => {}
            }
        }
    }

    let step = TAU / n as f64;
    let t_fwd = cell.crossing(x, fwd as f64 * step, (fwd + 1) as f64 * step);
    let t_back = cell.crossing(x, -(back as f64) * step, -((back + 1) as f64) * step);
    let ends = [cell.at(x, t_back), cell.at(x, t_fwd)];
    let sides = ends.map(|e| boundary_side(cell.tetra, &e, 1e-8));
    if ends[0].chord(&ends[1]) < 1e-7 {
        // The orbit only touches the cell; then the touching point is on Q.
        if !(sides[0].plus && sides[0].minus) {
            violation(
                report,
                "boundary-crossings",
                &ends[0],
                "single contact point off Q".into(),
            );
        }
    } else if sides[0].plus == sides[1].plus || sides[0].minus == sides[1].minus {
        violation(
            report,
            "boundary-crossings",
            &ends[0],
            format!("endpoint sides {:?} and {:?}", sides[0], sides[1]),
        );
    }

    // Transversality at the endpoints, away from the vertices.
    for e in &ends {
        if cell.tetra.vertices().iter().any(|v| v.chord(e) < 1e-3) {
            continue;
        }
        let k = killing_eval(&cell.c_tilde, e).dir;
        let kn = k.norm();
        if kn < 1e-12 {
            continue;
        }
        let coeffs = cell.tetra.coefficients(e.coords());
        for (f, c) in coeffs.iter().enumerate() {
            if c.abs() < 1e-8 {
                let dot = (k / kn).dot(&cell.tetra.face_normal(f)).abs();
                if dot < 1e-6 {
                    violation(report, "transversality", e, format!("|K·n| = {dot:e} on face {f}"));
                }
            }
        }
    }
}

/// An orbit through a point of `Q` meets the cell only there.
fn check_quad_orbit(cell: &Cell, x: &PointS3, n: usize, report: &mut AxisRotationReport) {
    let near = [1e-3, -1e-3];
    let far = (1..n).map(|s| TAU * s as f64 / n as f64);
    for t in near.into_iter().chain(far) {
        let c = cell.min_coeff(x, t);
        if c >= -INSIDE_TOL {
            violation(
                report,
                "quad-orbit",
                &cell.at(x, t),
                format!("second intersection at t = {t}"),
            );
            return;
        }
    }
}

/// `Π(Ω)` is the disc bounded by `Π(Q)`: the projected quad is a simple closed
/// curve winding once around the pole, and interior points project inside it.
fn check_projection<R: Rng + ?Sized>(
    cell: &Cell,
    axis: &GreatCircle,
    pole: &PointS3,
    quad: &[PointS3],
    n_points: usize,
    rng: &mut R,
    report: &mut AxisRotationReport,
) {
    let [f1, f2] = cell.c_tilde.basis();
    let plane = |p: &PointS3| -> [f64; 2] {
        let q = orbit_project(axis, pole, p).expect("tᵢ lies on the axis");
        [q.coords().dot(&f1), q.coords().dot(&f2)]
    };
    let curve: Vec<[f64; 2]> = quad.iter().map(plane).collect();
    if let Some((a, b)) = self_intersection(&curve) {
        violation(
            report,
            "projected-disc",
            &quad[a],
            format!("segments {a} and {b} of Π(Q) cross"),
        );
    }
    let origin = plane(pole);
    report.winding = winding_number(&curve, origin);
    if report.winding.abs() != 1 {
        violation(
            report,
            "projected-disc",
            pole,
            format!("winding number {}", report.winding),
        );
    }
    for _ in 0..n_points {
        let p = cell.tetra.random_point(rng);
        let w = winding_number(&curve, plane(&p));
        if w != report.winding {
            violation(report, "projected-disc", &p, format!("interior point has winding {w}"));
            break;
        }
    }
}

/// Winding number of the closed polygon around `o`.
pub(crate) fn winding_number(curve: &[[f64; 2]], o: [f64; 2]) -> i64 {
    let mut total = 0.0;
    for s in 0..curve.len() {
        let a = curve[s];
        let b = curve[(s + 1) % curve.len()];
        let (ax, ay) = (a[0] - o[0], a[1] - o[1]);
        let (bx, by) = (b[0] - o[0], b[1] - o[1]);
        total += (ax * by - ay * bx).atan2(ax * bx + ay * by);
    }
    (total / TAU).round() as i64
}

/// First pair of non-adjacent crossing segments of a closed polygon.
pub(crate) fn self_intersection(curve: &[[f64; 2]]) -> Option<(usize, usize)> {
    let n = curve.len();
    let orient = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    for a in 0..n {
        for b in a + 2..n {
            if a == 0 && b == n - 1 {
                continue;
            }
            let (p, q) = (curve[a], curve[(a + 1) % n]);
            let (r, s) = (curve[b], curve[(b + 1) % n]);
            let d1 = orient(p, q, r);
            let d2 = orient(p, q, s);
            let d3 = orient(r, s, p);
            let d4 = orient(r, s, q);
            if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
                return Some((a, b));
            }
        }
    }
    None
}
