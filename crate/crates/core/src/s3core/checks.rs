//! Residuals for the elementary incidence facts about `C`, `C⊥`, the spheres
//! `Σ_φ`, `Σ^φ` and the circles `C_φ^{φ'}`.
//!
//! Every item evaluates to a non-negative residual; a wrong discrete outcome
//! (an intersection of the wrong kind) is reported as `f64::INFINITY`.

use std::f64::consts::FRAC_PI_2;

use serde::Serialize;

use super::angle::PiRational;
use super::circle::{CircleIntersection, GreatCircle, GreatSphere};
use super::frame::{circle, p_lower, p_upper, sigma_lower, sigma_upper};
use super::point::{PointS3, Vec4};

/// Residual of each checklist item at one choice of angles.
#[derive(Clone, Debug, Serialize)]
pub struct BasicGeometryResiduals {
    pub antipodal_shift: f64,
    pub circle_meets_axes: f64,
    pub hemispheres: f64,
    pub sphere_meets_axes: f64,
    pub spheres_meet_in_circle: f64,
    pub orthocomplement: f64,
    pub sphere_pencil: f64,
    pub circle_trichotomy: f64,
}

impl BasicGeometryResiduals {
    pub fn items(&self) -> [(&'static str, f64); 8] {
        [
            ("antipodal_shift", self.antipodal_shift),
            ("circle_meets_axes", self.circle_meets_axes),
            ("hemispheres", self.hemispheres),
            ("sphere_meets_axes", self.sphere_meets_axes),
            ("spheres_meet_in_circle", self.spheres_meet_in_circle),
            ("orthocomplement", self.orthocomplement),
            ("sphere_pencil", self.sphere_pencil),
            ("circle_trichotomy", self.circle_trichotomy),
        ]
    }

    pub fn max(&self) -> f64 {
        self.items().iter().map(|(_, r)| *r).fold(0.0, f64::max)
    }
}

/// Angle between two lines, folded into `[0, π/2]`.
fn line_angle(a: f64) -> f64 {
    let a = a.rem_euclid(std::f64::consts::PI);
    a.min(std::f64::consts::PI - a)
}

fn line_angle_between(u: &Vec4, v: &Vec4) -> f64 {
    let (u, v) = (u.normalize(), v.normalize());
    let cos = u.dot(&v);
    (v - u * cos).norm().atan2(cos.abs())
}

/// Distance of the intersection of two circles from the antipodal pair `{p, −p}`.
fn meets_at(a: &GreatCircle, b: &GreatCircle, p: &PointS3) -> f64 {
    match a.intersect(b) {
        CircleIntersection::Points(q) => q.chord(p).min(q.chord(&p.antipode())),
        _ => f64::INFINITY,
    }
}

/// The sphere meets the circle exactly in `{p, −p}`, orthogonally.
fn sphere_meets_circle_at(s: &GreatSphere, c: &GreatCircle, p: &PointS3) -> f64 {
    match s.intersect_circle(c) {
        Some(q) => {
            let pos = q.chord(p).min(q.chord(&p.antipode()));
            let tangent = c.tangent_at(p);
            let orth = line_angle_between(&tangent, s.normal());
            pos.max(orth)
        }
        None => f64::INFINITY,
    }
}

fn sphere_residuals(a: &GreatSphere, b: &GreatSphere, phi: PiRational, psi: PiRational, axis: &GreatCircle) -> f64 {
    let expected_angle = line_angle((psi - phi).radians());
    let angle = (a.angle_with(b) - expected_angle).abs();
    let set = if phi.eq_mod_pi(&psi) {
        if a.same_set(b, 1e-12) {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        match a.intersect(b) {
            Some(c) => (c.projector() - axis.projector()).amax(),
            None => f64::INFINITY,
        }
    };
    angle.max(set)
}

/// Residual of the hemisphere `base ⋇ pole` having boundary `base` and pole `pole`,
/// and of `Σ` being the union of the two hemispheres over antipodal poles.
fn hemisphere_residual(base: &GreatCircle, pole: &PointS3, sphere: &GreatSphere) -> f64 {
    let mut worst: f64 = 0.0;
    for a in 0..8 {
        let q = base.point_at(a as f64 * std::f64::consts::TAU / 8.0);
        for s in 0..=4 {
            let t = s as f64 / 4.0;
            // Cone point over q towards the pole, and its mirror over −pole.
            for apex in [*pole, pole.antipode()] {
                let x = super::point::geodesic(&q, &apex, t).expect("q ⟂ pole");
                worst = worst.max((x.distance(&apex) - (1.0 - t) * FRAC_PI_2).abs());
                worst = worst.max(sphere.signed(x.coords()).abs());
                if s == 0 {
                    worst = worst.max(base.plane_distance(x.coords()));
                }
            }
        }
    }
    worst
}

/// Evaluates the checklist at `(φ₁, φ₁')` with `(φ₂, φ₂')` as the second
/// pair for the two-object items.
pub fn basic_geometry(
    phi1: PiRational,
    phi1_up: PiRational,
    phi2: PiRational,
    phi2_up: PiRational,
) -> BasicGeometryResiduals {
    let (a, a_up) = (phi1.radians(), phi1_up.radians());
    let (b, b_up) = (phi2.radians(), phi2_up.radians());
    let pi = std::f64::consts::PI;
    let c = GreatCircle::c();
    let cp = GreatCircle::c_perp();

    let antipodal_shift = [
        p_lower(a + pi).coords() + p_lower(a).coords(),
        p_upper(a + pi).coords() + p_upper(a).coords(),
    ]
    .iter()
    .map(|v| v.norm())
    .chain([
        (sigma_lower(a + pi).normal().dot(sigma_lower(a).normal()).abs() - 1.0).abs(),
        (sigma_upper(a + pi).normal().dot(sigma_upper(a).normal()).abs() - 1.0).abs(),
    ])
    .fold(0.0, f64::max);

    let cc = circle(a, a_up);
    let circle_meets_axes = {
        let at_c = meets_at(&cc, &c, &p_lower(a));
        let at_cp = meets_at(&cc, &cp, &p_upper(a_up));
        let orth_c = (line_angle_between(&cc.tangent_at(&p_lower(a)), &c.tangent_at(&p_lower(a))) - FRAC_PI_2).abs();
        let orth_cp =
            (line_angle_between(&cc.tangent_at(&p_upper(a_up)), &cp.tangent_at(&p_upper(a_up))) - FRAC_PI_2).abs();
        // The four quarter arcs close up the circle.
        let corners = [p_lower(a), p_upper(a_up), p_lower(a + pi), p_upper(a_up + pi)];
        let arcs: f64 = (0..4).map(|i| corners[i].distance(&corners[(i + 1) % 4])).sum();
        let on_circle = corners
            .iter()
            .map(|p| cc.plane_distance(p.coords()))
            .fold(0.0, f64::max);
        at_c.max(at_cp)
            .max(orth_c)
            .max(orth_cp)
            .max((arcs - std::f64::consts::TAU).abs())
            .max(on_circle)
    };

    let hemispheres = hemisphere_residual(&c, &p_upper(a_up), &sigma_upper(a_up)).max(hemisphere_residual(
        &cp,
        &p_lower(a),
        &sigma_lower(a),
    ));

    let sphere_meets_axes = sphere_meets_circle_at(&sigma_upper(a), &cp, &p_upper(a)).max(sphere_meets_circle_at(
        &sigma_lower(a),
        &c,
        &p_lower(a),
    ));

    let spheres_meet_in_circle = {
        let (s1, s2) = (sigma_lower(a), sigma_upper(a_up));
        let set = match s1.intersect(&s2) {
            Some(x) => (x.projector() - cc.projector()).amax(),
            None => f64::INFINITY,
        };
        set.max((s1.angle_with(&s2) - FRAC_PI_2).abs())
    };

    let orthocomplement = {
        let perp = cc.orthocomplement();
        (perp.projector() - circle(a + FRAC_PI_2, a_up + FRAC_PI_2).projector()).amax()
    };

    let sphere_pencil = sphere_residuals(&sigma_upper(a), &sigma_upper(b), phi1, phi2, &c).max(sphere_residuals(
        &sigma_lower(a),
        &sigma_lower(b),
        phi1,
        phi2,
        &cp,
    ));

    let circle_trichotomy = {
        let c2 = circle(b, b_up);
        let same_lower = phi1.eq_mod_pi(&phi2);
        let same_upper = phi1_up.eq_mod_pi(&phi2_up);
        let got = cc.intersect(&c2);
        match (same_lower, same_upper) {
            (true, true) => match got {
                CircleIntersection::Same => 0.0,
                _ => f64::INFINITY,
            },
            (false, false) => match got {
                CircleIntersection::Empty => 0.0,
                _ => f64::INFINITY,
            },
            (true, false) => {
                let p = p_lower(a);
                let angle = line_angle_between(&cc.tangent_at(&p), &c2.tangent_at(&p));
                meets_at(&cc, &c2, &p).max((angle - line_angle((phi2_up - phi1_up).radians())).abs())
            }
            (false, true) => {
                let p = p_upper(a_up);
                let angle = line_angle_between(&cc.tangent_at(&p), &c2.tangent_at(&p));
                meets_at(&cc, &c2, &p).max((angle - line_angle((phi2 - phi1).radians())).abs())
            }
        }
    };

    BasicGeometryResiduals {
        antipodal_shift,
        circle_meets_axes,
        hemispheres,
        sphere_meets_axes,
        spheres_meet_in_circle,
        orthocomplement,
        sphere_pencil,
        circle_trichotomy,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checklist_holds_on_a_grid_of_rational_angles() {
        // Denominators 1..8 give both generic and coincident (mod π) pairs.
        let angles: Vec<PiRational> = (0..16).map(|n| PiRational::new(n, 8)).collect();
        let mut seen_kinds = [false; 4];
        for idx in 0..64 {
            let p1 = angles[idx % 16];
            let p1u = angles[(idx * 7 + 3) % 16];
            let p2 = angles[(idx / 4) % 16];
            let p2u = angles[(idx * 5 + 1) % 16];
            seen_kinds[(p1.eq_mod_pi(&p2) as usize) * 2 + p1u.eq_mod_pi(&p2u) as usize] = true;
            let r = basic_geometry(p1, p1u, p2, p2u);
            assert!(r.max() < 1e-9, "{p1} {p1u} {p2} {p2u}: {r:?}");
        }
        assert!(seen_kinds.iter().all(|&k| k), "{seen_kinds:?}");
    }

    #[test]
    fn generic_circles_are_disjoint() {
        let r = basic_geometry(
            PiRational::ZERO,
            PiRational::ZERO,
            PiRational::new(1, 3),
            PiRational::new(1, 5),
        );
        assert_eq!(r.circle_trichotomy, 0.0);
        let c1 = circle(0.0, 0.0);
        let c2 = circle(PiRational::new(1, 3).radians(), PiRational::new(1, 5).radians());
        assert_eq!(c1.intersect(&c2), CircleIntersection::Empty);
    }
}
