use nalgebra::{Matrix4, Matrix4x2};
use serde::{Deserialize, Serialize};

use super::isometry::{Isometry4, Mat4};
use super::point::{PointS3, TangentVector, Vec4, UNIT_TOL};
use super::GeometryError;

/// An oriented great circle: the unit circle of the 2-plane spanned by the
/// ordered orthonormal pair `(e1, e2)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreatCircle {
    e1: PointS3,
    e2: PointS3,
}

/// A great two-sphere `{p : p·n = 0}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GreatSphere {
    n: Vec4,
}

/// Result of intersecting two great circles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CircleIntersection {
    Empty,
    /// A pair of antipodal points.
    Points(PointS3),
    Same,
}

impl GreatCircle {
    pub fn new(e1: PointS3, e2: PointS3) -> Result<Self, GeometryError> {
        if e1.dot(&e2).abs() > UNIT_TOL {
            return Err(GeometryError::InvalidInput(format!(
                "circle basis is not orthogonal (e1·e2 = {})",
                e1.dot(&e2)
            )));
        }
        Ok(GreatCircle { e1, e2 })
    }

    /// The great circle through two distinct, non-antipodal points, oriented from `p` towards `q`.
    pub fn through(p: &PointS3, q: &PointS3) -> Result<Self, GeometryError> {
        let w = q.coords() - p.coords() * p.dot(q);
        if w.norm() < 1e-12 {
            return Err(GeometryError::InvalidInput(
                "points do not determine a great circle".into(),
            ));
        }
        Ok(GreatCircle {
            e1: *p,
            e2: PointS3::normalize(w)?,
        })
    }

    /// `C = S(p₀, p_{π/2})`, the x¹x²-circle.
    pub fn c() -> Self {
        GreatCircle {
            e1: PointS3::from_unit_unchecked(Vec4::x()),
            e2: PointS3::from_unit_unchecked(Vec4::y()),
        }
    }

    /// `C⊥ = S(p⁰, p^{π/2})`, the x³x⁴-circle.
    pub fn c_perp() -> Self {
        GreatCircle {
            e1: PointS3::from_unit_unchecked(Vec4::z()),
            e2: PointS3::from_unit_unchecked(Vec4::w()),
        }
    }

    pub fn e1(&self) -> &PointS3 {
        &self.e1
    }

    pub fn e2(&self) -> &PointS3 {
        &self.e2
    }

    pub fn basis(&self) -> [Vec4; 2] {
        [*self.e1.coords(), *self.e2.coords()]
    }

    pub fn point_at(&self, theta: f64) -> PointS3 {
        PointS3::from_unit_unchecked(self.e1.coords() * theta.cos() + self.e2.coords() * theta.sin())
    }

    /// Orthogonal projector onto the plane of the circle.
    pub fn projector(&self) -> Mat4 {
        let [a, b] = self.basis();
        a * a.transpose() + b * b.transpose()
    }

    /// Chordal distance from `p` to the plane, `|p − Π p|`.
    pub fn plane_distance(&self, p: &Vec4) -> f64 {
        (p - self.projector() * p).norm()
    }

    pub fn contains(&self, p: &PointS3, tol: f64) -> bool {
        self.plane_distance(p.coords()) <= tol
    }

    /// The totally orthogonal circle, oriented so that `det[e1, e2, f1, f2] = +1`.
    ///
    /// With this convention `C⊥` of the x¹x²-circle is `(p⁰ → p^{π/2})` and the
    /// complement of the complement returns the original orientation.
    pub fn orthocomplement(&self) -> GreatCircle {
        let [a, b] = self.basis();
        let residual = |v: Vec4, fam: &[Vec4]| fam.iter().fold(v, |acc, f| acc - f * f.dot(&v));
        let pick = |fam: &[Vec4]| {
            // First maximum wins, so C⊥ of the x¹x²-circle comes out as (e₃, e₄).
            let mut best = residual(Vec4::x(), fam);
            for i in 1..4 {
                let r = residual(Vec4::ith(i, 1.0), fam);
                if r.norm() > best.norm() + 1e-12 {
                    best = r;
                }
            }
            best.normalize()
        };
        let f1 = pick(&[a, b]);
        let mut f2 = pick(&[a, b, f1]);
        if Matrix4::from_columns(&[a, b, f1, f2]).determinant() < 0.0 {
            f2 = -f2;
        }
        GreatCircle {
            e1: PointS3::from_unit_unchecked(f1),
            e2: PointS3::from_unit_unchecked(f2),
        }
    }

    /// Same point set, regardless of orientation.
    pub fn same_set(&self, other: &GreatCircle, tol: f64) -> bool {
        (self.projector() - other.projector()).amax() <= tol
    }

    /// Reflection through the circle, `R_{S(C)}`.
    pub fn reflection(&self) -> Isometry4 {
        Isometry4::from_matrix_unchecked(self.projector() * 2.0 - Mat4::identity())
    }

    /// Unit tangent of the circle at one of its points.
    pub fn tangent_at(&self, p: &PointS3) -> Vec4 {
        let [a, b] = self.basis();
        // d/dθ (cos θ a + sin θ b) = −sin θ a + cos θ b
        let (c, s) = (p.coords().dot(&a), p.coords().dot(&b));
        (b * c - a * s).normalize()
    }

    pub fn intersect(&self, other: &GreatCircle) -> CircleIntersection {
        // Points a·e1 + b·e2 lying in the other plane: null space of (I − Π₂)[e1 e2].
        let proj = Mat4::identity() - other.projector();
        let [a, b] = self.basis();
        let m = Matrix4x2::from_columns(&[proj * a, proj * b]);
        let svd = m.svd(false, true);
        let mut order = [0usize, 1];
        order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
        let small = svd.singular_values[order[0]];
        let large = svd.singular_values[order[1]];
        if large < 1e-9 {
            return CircleIntersection::Same;
        }
        if small > 1e-9 {
            return CircleIntersection::Empty;
        }
        let v_t = svd.v_t.expect("requested V");
        let coeffs = v_t.row(order[0]);
        let p = a * coeffs[0] + b * coeffs[1];
        CircleIntersection::Points(PointS3::normalize(p).expect("unit combination"))
    }
}

impl GreatSphere {
    pub fn from_normal(n: Vec4) -> Result<Self, GeometryError> {
        if (n.norm() - 1.0).abs() > UNIT_TOL {
            return Err(GeometryError::InvalidInput("sphere normal is not unit".into()));
        }
        Ok(GreatSphere { n })
    }

    /// The great sphere `S(span(a, b, c))`.
    pub fn spanned_by(a: &Vec4, b: &Vec4, c: &Vec4) -> Result<Self, GeometryError> {
        let n = super::point::cross4(a, b, c);
        if n.norm() < 1e-12 {
            return Err(GeometryError::InvalidInput("degenerate sphere span".into()));
        }
        Ok(GreatSphere { n: n.normalize() })
    }

    /// `S(C, p)` for a circle and a point off its plane.
    pub fn containing(circle: &GreatCircle, p: &PointS3) -> Result<Self, GeometryError> {
        let [a, b] = circle.basis();
        Self::spanned_by(&a, &b, p.coords())
    }

    pub fn normal(&self) -> &Vec4 {
        &self.n
    }

    pub fn signed(&self, p: &Vec4) -> f64 {
        self.n.dot(p)
    }

    pub fn contains(&self, p: &PointS3, tol: f64) -> bool {
        self.signed(p.coords()).abs() <= tol
    }

    pub fn reflection(&self) -> Isometry4 {
        Isometry4::sphere_reflection(&self.n)
    }

    pub fn same_set(&self, other: &GreatSphere, tol: f64) -> bool {
        (self.n.dot(&other.n).abs() - 1.0).abs() <= tol
    }

    /// Angle in `[0, π/2]` between the spheres along their common circle.
    pub fn angle_with(&self, other: &GreatSphere) -> f64 {
        let cos = self.n.dot(&other.n);
        (other.n - self.n * cos).norm().atan2(cos.abs())
    }

    /// The common great circle of two distinct spheres.
    pub fn intersect(&self, other: &GreatSphere) -> Option<GreatCircle> {
        if self.same_set(other, 1e-12) {
            return None;
        }
        let c = GreatCircle::new(
            PointS3::from_unit_unchecked(self.n),
            PointS3::normalize(other.n - self.n * self.n.dot(&other.n)).ok()?,
        )
        .ok()?;
        Some(c.orthocomplement())
    }

    /// Intersection with a great circle: `None` if the circle lies in the
    /// sphere, otherwise one of the two antipodal intersection points.
    pub fn intersect_circle(&self, c: &GreatCircle) -> Option<PointS3> {
        let [a, b] = c.basis();
        let (sa, sb) = (self.n.dot(&a), self.n.dot(&b));
        if sa.abs() < 1e-12 && sb.abs() < 1e-12 {
            return None;
        }
        Some(PointS3::from_unit_unchecked((a * sb - b * sa).normalize()))
    }
}

/// `R_C^φ`: fixes `C` pointwise and rotates `C⊥` by `φ` along its orientation.
pub fn rotate_about(c: &GreatCircle, phi: f64) -> Isometry4 {
    let perp = c.orthocomplement();
    let [f1, f2] = perp.basis();
    let (s, co) = phi.sin_cos();
    let m = c.projector()
        + (f1 * f1.transpose() + f2 * f2.transpose()) * co
        + (f2 * f1.transpose() - f1 * f2.transpose()) * s;
    Isometry4::from_matrix_unchecked(m)
}

/// `R^C_φ = R_{C⊥}^φ`: slides along `C`, moving `p₀` to `p_φ`.
pub fn rotate_along(c: &GreatCircle, phi: f64) -> Isometry4 {
    rotate_about(&c.orthocomplement(), phi)
}

/// The Killing field `K_C = ∂_φ R_C^φ |_{φ=0}` at `p`.
pub fn killing_eval(c: &GreatCircle, p: &PointS3) -> TangentVector {
    let [f1, f2] = c.orthocomplement().basis();
    let dir = f2 * f1.dot(p.coords()) - f1 * f2.dot(p.coords());
    TangentVector { base: *p, dir }
}

/// `Π^C_pole`: the point where the `K^C`-orbit of `x` meets the closed
/// hemisphere `C⊥ ⋇ pole`.
///
/// `K^C` rotates the plane of `C` and fixes its complement, so the projection
/// keeps the `C⊥` component and turns the `C` component onto `pole`.
pub fn orbit_project(c: &GreatCircle, pole: &PointS3, x: &PointS3) -> Result<PointS3, GeometryError> {
    if !c.contains(pole, 1e-10) {
        return Err(GeometryError::InvalidInput("pole is not on the circle".into()));
    }
    let along = c.projector() * x.coords();
    let rest = x.coords() - along;
    Ok(PointS3::from_unit_unchecked(rest + pole.coords() * along.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn orthonormal_pair(a: &Vec4, b: &Vec4) -> bool {
        (a.norm() - 1.0).abs() < 1e-10 && (b.norm() - 1.0).abs() < 1e-10 && a.dot(b).abs() < 1e-10
    }

    fn random_circle(rng: &mut ChaCha8Rng) -> GreatCircle {
        let p = PointS3::random(rng);
        let q = PointS3::random(rng);
        GreatCircle::through(&p, &q).unwrap()
    }

    #[test]
    fn orthocomplement_of_c_is_c_perp_with_orientation() {
        let perp = GreatCircle::c().orthocomplement();
        assert_eq!(perp.e1().to_array(), [0.0, 0.0, 1.0, 0.0]);
        assert_eq!(perp.e2().to_array(), [0.0, 0.0, 0.0, 1.0]);
        let back = perp.orthocomplement();
        assert_eq!(back, GreatCircle::c());
    }

    #[test]
    fn double_orthocomplement_is_the_same_set() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..32 {
            let c = random_circle(&mut rng);
            let cc = c.orthocomplement().orthocomplement();
            assert!(cc.same_set(&c, 1e-12));
            let [a, b] = c.basis();
            let [f1, f2] = c.orthocomplement().basis();
            assert!(orthonormal_pair(&f1, &f2));
            assert!(a.dot(&f1).abs() < 1e-12 && b.dot(&f2).abs() < 1e-12);
        }
    }

    #[test]
    fn rotate_about_fixes_axis_and_turns_complement() {
        let c = GreatCircle::c();
        for phi in [0.0, 0.4, 2.0, -1.3] {
            let r = rotate_about(&c, phi);
            assert!(r.apply(&PointS3::on_c(0.0)).chord(&PointS3::on_c(0.0)) < 1e-15);
        }
        let r = rotate_about(&c, FRAC_PI_2);
        let img = r.apply(&PointS3::on_c_perp(0.0));
        assert!((img.coords() - Vec4::new(0.0, 0.0, 0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn rotations_compose_additively() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..16 {
            let c = random_circle(&mut rng);
            let (a, b) = (0.7, -2.1);
            let lhs = rotate_about(&c, a).compose(&rotate_about(&c, b));
            assert!(lhs.distance(&rotate_about(&c, a + b)) < 1e-12);
            assert!(rotate_about(&c, a).is_orthogonal(1e-10));
            assert!((rotate_about(&c, a).det() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn rotate_along_moves_base_point_along_c() {
        let c = GreatCircle::c();
        assert!(rotate_along(&c, 0.0).distance(&Isometry4::identity()) < 1e-15);
        let img = rotate_along(&c, FRAC_PI_2).apply(&PointS3::on_c(0.0));
        assert!((img.coords() - Vec4::new(0.0, 1.0, 0.0, 0.0)).norm() < 1e-15);
        for phi in [0.3, 1.9] {
            let r = rotate_along(&c, phi);
            assert!(r.apply(&PointS3::on_c(0.0)).chord(&PointS3::on_c(phi)) < 1e-15);
            for t in [0.0, 1.0, 2.5] {
                let q = PointS3::on_c_perp(t);
                assert!(r.apply(&q).chord(&q) < 1e-15);
            }
        }
    }

    #[test]
    fn killing_field_vanishes_on_axis_and_is_unit_on_complement() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = random_circle(&mut rng);
        for t in [0.0, 1.0, 4.0] {
            assert!(killing_eval(&c, &c.point_at(t)).norm() < 1e-15);
            let q = c.orthocomplement().point_at(t);
            assert!((killing_eval(&c, &q).norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn killing_field_matches_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..20 {
            let c = random_circle(&mut rng);
            let p = PointS3::random(&mut rng);
            let h = 1e-6;
            let fd = (rotate_about(&c, h).apply(&p).coords() - rotate_about(&c, -h).apply(&p).coords()) / (2.0 * h);
            let k = killing_eval(&c, &p);
            assert!((fd - k.dir).norm() < 1e-6);
            assert!(k.dir.dot(p.coords()).abs() < 1e-12);
            // |K_C(p)| is the sine of the distance from p to C.
            let dist = p.distance(&PointS3::normalize(c.projector() * p.coords()).unwrap());
            assert!((k.norm() - dist.sin()).abs() < 1e-9);
        }
    }

    #[test]
    fn orbit_projection_fixes_hemisphere_and_complement() {
        let c = GreatCircle::c();
        let pole = PointS3::on_c(0.0);
        let on_hemi = PointS3::normalize(Vec4::new(0.5, 0.0, 0.3, -0.4)).unwrap();
        assert!(orbit_project(&c, &pole, &on_hemi).unwrap().chord(&on_hemi) < 1e-15);
        let q = PointS3::on_c_perp(1.1);
        assert!(orbit_project(&c, &pole, &q).unwrap().chord(&q) < 1e-15);
        for phi in [0.0, 1.0, PI, 5.0] {
            let img = orbit_project(&c, &pole, &PointS3::on_c(phi)).unwrap();
            assert!(img.chord(&pole) < 1e-15);
        }
        assert!(orbit_project(&c, &PointS3::on_c_perp(0.0), &q).is_err());
    }

    #[test]
    fn orbit_projection_is_constant_on_orbits_and_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..32 {
            let c = random_circle(&mut rng);
            let pole = c.point_at(rng.random::<f64>() * 6.0);
            let x = PointS3::random(&mut rng);
            let px = orbit_project(&c, &pole, &x).unwrap();
            assert!(orbit_project(&c, &pole, &px).unwrap().chord(&px) < 1e-12);
            for s in 0..16 {
                let t = s as f64 * 0.4;
                let y = rotate_along(&c, t).apply(&x);
                assert!(orbit_project(&c, &pole, &y).unwrap().chord(&px) < 1e-9);
            }
        }
    }

    #[test]
    fn orbits_are_planar_circles() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let c = random_circle(&mut rng);
        let x = PointS3::random(&mut rng);
        let pts: Vec<Vec4> = [0.3, 1.4, 2.9, 4.4]
            .iter()
            .map(|&t| *rotate_along(&c, t).apply(&x).coords())
            .collect();
        // Four points are affinely coplanar iff the three difference vectors have rank 2.
        let d = Matrix4x2::from_columns(&[pts[1] - pts[0], pts[2] - pts[0]]);
        let basis = d.svd(true, false).u.unwrap();
        let third = pts[3] - pts[0];
        let off = third - basis.column(0) * basis.column(0).dot(&third) - basis.column(1) * basis.column(1).dot(&third);
        assert!(off.norm() < 1e-9);
    }

    #[test]
    fn circle_intersections() {
        let c = GreatCircle::c();
        assert_eq!(c.intersect(&c.orthocomplement()), CircleIntersection::Empty);
        assert_eq!(
            c.intersect(&GreatCircle::through(&PointS3::on_c(1.0), &PointS3::on_c(2.0)).unwrap()),
            CircleIntersection::Same
        );
        let other = GreatCircle::through(&PointS3::on_c(0.5), &PointS3::on_c_perp(0.2)).unwrap();
        match c.intersect(&other) {
            CircleIntersection::Points(p) => {
                assert!(p.chord(&PointS3::on_c(0.5)) < 1e-12 || p.chord(&PointS3::on_c(0.5 + PI)) < 1e-12)
            }
            r => panic!("unexpected {r:?}"),
        }
    }
}
