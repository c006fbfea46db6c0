use nalgebra::Vector4;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::GeometryError;

pub type Vec4 = Vector4<f64>;

/// Tolerance on `|x| = 1` for points of the three-sphere.
pub const UNIT_TOL: f64 = 1e-12;

/// Geodesics are rejected once the endpoints are this close to antipodal.
pub const ANTIPODAL_CUTOFF: f64 = 1e-10;

/// A point of the unit three-sphere in R⁴.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 4]", try_from = "[f64; 4]")]
pub struct PointS3(Vec4);

impl PointS3 {
    /// Wraps `x`, rejecting vectors that are not unit length within [`UNIT_TOL`].
    pub fn new(x: Vec4) -> Result<Self, GeometryError> {
        let n = x.norm();
        if (n - 1.0).abs() > UNIT_TOL || !n.is_finite() {
            return Err(GeometryError::InvalidInput(format!(
                "point is not on the unit sphere (|x| = {n})"
            )));
        }
        Ok(PointS3(x))
    }

    /// Radially projects a non-zero vector onto the sphere.
    pub fn normalize(x: Vec4) -> Result<Self, GeometryError> {
        let n = x.norm();
        if n < 1e-300 || !n.is_finite() {
            return Err(GeometryError::InvalidInput("cannot normalize a zero vector".into()));
        }
        Ok(PointS3(x / n))
    }

    /// Caller guarantees `x` is (numerically) unit length.
    pub(crate) fn from_unit_unchecked(x: Vec4) -> Self {
        PointS3(x)
    }

    pub fn from_coords(c: [f64; 4]) -> Result<Self, GeometryError> {
        Self::new(Vec4::new(c[0], c[1], c[2], c[3]))
    }

    /// `p_φ = (cos φ, sin φ, 0, 0)` on the circle `C`.
    pub fn on_c(phi: f64) -> Self {
        PointS3(Vec4::new(phi.cos(), phi.sin(), 0.0, 0.0))
    }

    /// `p^φ = (0, 0, cos φ, sin φ)` on the circle `C⊥`.
    pub fn on_c_perp(phi: f64) -> Self {
        PointS3(Vec4::new(0.0, 0.0, phi.cos(), phi.sin()))
    }

    /// Uniformly distributed point (normalized Gaussian vector).
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let v = Vec4::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
            if let Ok(p) = Self::normalize(v) {
                return p;
            }
        }
    }

    pub fn coords(&self) -> &Vec4 {
        &self.0
    }

    pub fn to_array(&self) -> [f64; 4] {
        [self.0[0], self.0[1], self.0[2], self.0[3]]
    }

    pub fn dot(&self, other: &PointS3) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn antipode(&self) -> PointS3 {
        PointS3(-self.0)
    }

    /// Chordal distance `|p − q|` in R⁴.
    pub fn chord(&self, other: &PointS3) -> f64 {
        (self.0 - other.0).norm()
    }

    /// Great-circle distance, computed from the chord for accuracy near 0 and π.
    pub fn distance(&self, other: &PointS3) -> f64 {
        2.0 * (0.5 * self.chord(other)).min(1.0).asin()
    }

    /// Projects `v` onto the tangent space at this point.
    pub fn tangent_part(&self, v: &Vec4) -> Vec4 {
        v - self.0 * self.0.dot(v)
    }
}

impl From<PointS3> for [f64; 4] {
    fn from(p: PointS3) -> Self {
        p.to_array()
    }
}

impl TryFrom<[f64; 4]> for PointS3 {
    type Error = GeometryError;
    fn try_from(c: [f64; 4]) -> Result<Self, Self::Error> {
        // Serialized points have been rounded by the JSON writer; renormalize.
        let v = Vec4::new(c[0], c[1], c[2], c[3]);
        if (v.norm() - 1.0).abs() > 1e-9 {
            return Err(GeometryError::InvalidInput("serialized point off sphere".into()));
        }
        PointS3::normalize(v)
    }
}

/// A tangent vector `dir` at `base`, with `dir · base = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentVector {
    pub base: PointS3,
    pub dir: Vec4,
}

impl TangentVector {
    pub fn new(base: PointS3, dir: Vec4) -> Result<Self, GeometryError> {
        if base.coords().dot(&dir).abs() > UNIT_TOL * dir.norm().max(1.0) {
            return Err(GeometryError::InvalidInput(
                "tangent vector not orthogonal to its base point".into(),
            ));
        }
        Ok(TangentVector { base, dir })
    }

    pub fn norm(&self) -> f64 {
        self.dir.norm()
    }
}

fn check_not_antipodal(p: &PointS3, q: &PointS3) -> Result<f64, GeometryError> {
    let angle = p.distance(q);
    if angle > std::f64::consts::PI - ANTIPODAL_CUTOFF {
        return Err(GeometryError::DegenerateGeodesic { angle });
    }
    Ok(angle)
}

/// Point at parameter `t ∈ [0, 1]` along the minimizing geodesic from `p` to `q`,
/// traversed at constant speed.
pub fn geodesic(p: &PointS3, q: &PointS3, t: f64) -> Result<PointS3, GeometryError> {
    let angle = check_not_antipodal(p, q)?;
    if angle < 1e-15 {
        return Ok(*p);
    }
    let s = angle.sin();
    let a = ((1.0 - t) * angle).sin() / s;
    let b = (t * angle).sin() / s;
    PointS3::normalize(p.coords() * a + q.coords() * b)
}

/// Length of the minimizing geodesic `p̄q`.
pub fn arc_length(p: &PointS3, q: &PointS3) -> Result<f64, GeometryError> {
    check_not_antipodal(p, q)
}

pub fn midpoint(p: &PointS3, q: &PointS3) -> Result<PointS3, GeometryError> {
    check_not_antipodal(p, q)?;
    PointS3::normalize(p.coords() + q.coords())
}

/// Chordal distance from `p` to the minimizing arc `āb`.
pub fn arc_distance(a: &PointS3, b: &PointS3, p: &PointS3) -> f64 {
    let e2 = (b.coords() - a.coords() * a.dot(b)).normalize();
    let end = a.distance(b);
    let theta = p.coords().dot(&e2).atan2(p.dot(a)).clamp(0.0, end);
    let q = a.coords() * theta.cos() + e2 * theta.sin();
    (p.coords() - q).norm()
}

/// Generalized cross product of three vectors in R⁴: orthogonal to all
/// three, with `det[u, v, w, n] = |n|²`.
pub fn cross4(u: &Vec4, v: &Vec4, w: &Vec4) -> Vec4 {
    let minor = |skip: usize| {
        let cols: Vec<usize> = (0..4).filter(|&c| c != skip).collect();
        let m = |r: &Vec4, i: usize| r[cols[i]];
        m(u, 0) * (m(v, 1) * m(w, 2) - m(v, 2) * m(w, 1)) - m(u, 1) * (m(v, 0) * m(w, 2) - m(v, 2) * m(w, 0))
            + m(u, 2) * (m(v, 0) * m(w, 1) - m(v, 1) * m(w, 0))
    };
    Vec4::new(-minor(0), minor(1), -minor(2), minor(3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Matrix4;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rejects_off_sphere() {
        assert!(PointS3::from_coords([1.0, 1.0, 0.0, 0.0]).is_err());
        assert!(PointS3::normalize(Vec4::zeros()).is_err());
    }

    #[test]
    fn geodesic_endpoints_and_midpoint() {
        let p = PointS3::on_c(0.0);
        let q = PointS3::on_c(std::f64::consts::FRAC_PI_2);
        assert!(geodesic(&p, &q, 0.0).unwrap().chord(&p) < 1e-15);
        assert!(geodesic(&p, &q, 1.0).unwrap().chord(&q) < 1e-15);
        let h = geodesic(&p, &q, 0.5).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        assert!((h.coords() - Vec4::new(r, r, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn antipodal_geodesic_is_an_error() {
        let p = PointS3::on_c(0.3);
        assert!(matches!(
            geodesic(&p, &p.antipode(), 0.5),
            Err(GeometryError::DegenerateGeodesic { .. })
        ));
    }

    #[test]
    fn arc_length_matches_numeric_integration() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let p = PointS3::random(&mut rng);
            let q = PointS3::random(&mut rng);
            let n = 20_000;
            let mut len = 0.0;
            let mut prev = p;
            for s in 1..=n {
                let cur = geodesic(&p, &q, s as f64 / n as f64).unwrap();
                len += cur.distance(&prev);
                prev = cur;
            }
            let closed = p.dot(&q).clamp(-1.0, 1.0).acos();
            assert!((len - closed).abs() < 1e-12, "{len} vs {closed}");
            assert!((arc_length(&p, &q).unwrap() - closed).abs() < 1e-12);
        }
    }

    #[test]
    fn geodesic_has_constant_speed() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = PointS3::random(&mut rng);
        let q = PointS3::random(&mut rng);
        let pts: Vec<_> = (0..=10).map(|s| geodesic(&p, &q, s as f64 / 10.0).unwrap()).collect();
        let d0 = pts[0].distance(&pts[1]);
        for w in pts.windows(2) {
            assert!((w[0].distance(&w[1]) - d0).abs() < 1e-12);
        }
    }

    #[test]
    fn cross4_is_orthogonal_and_positively_oriented() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let u = *PointS3::random(&mut rng).coords();
        let v = *PointS3::random(&mut rng).coords();
        let w = *PointS3::random(&mut rng).coords();
        let n = cross4(&u, &v, &w);
        assert!(n.dot(&u).abs() < 1e-14 && n.dot(&v).abs() < 1e-14 && n.dot(&w).abs() < 1e-14);
        let m = Matrix4::from_columns(&[u, v, w, n]);
        assert!((m.determinant() - n.norm_squared()).abs() < 1e-12);
    }
}
