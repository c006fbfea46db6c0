use rand::Rng;

use crate::s3core::{arc_distance, geodesic, PointS3, SphericalTetrahedron};

use super::{CellIndex, Family, Lattice};

/// `Qᵢʲ`: the closed geodesic quadrilateral
/// `t_{i−½} → t^{j−½} → t_{i+½} → t^{j+½} → t_{i−½}`.
#[derive(Clone, Debug)]
pub struct LawsonQuad {
    corners: [PointS3; 4],
}

impl LawsonQuad {
    pub fn corners(&self) -> &[PointS3; 4] {
        &self.corners
    }

    pub fn arcs(&self) -> [(PointS3, PointS3); 4] {
        std::array::from_fn(|a| (self.corners[a], self.corners[(a + 1) % 4]))
    }

    /// Point at parameter `s ∈ [0, 4)`: arc `⌊s⌋` at its fractional position.
    pub fn point_at(&self, s: f64) -> PointS3 {
        let s = s.rem_euclid(4.0);
        let a = (s.floor() as usize).min(3);
        let (p, q) = self.arcs()[a];
        geodesic(&p, &q, s - a as f64).expect("quad corners are orthogonal")
    }

    /// `n` points per arc, starting at each corner.
    pub fn polyline(&self, n: usize) -> Vec<PointS3> {
        (0..4 * n).map(|s| self.point_at(s as f64 / n as f64)).collect()
    }

    /// Chordal distance to the nearest arc.
    pub fn distance(&self, p: &PointS3) -> f64 {
        self.arcs()
            .iter()
            .map(|(a, b)| arc_distance(a, b, p))
            .fold(f64::INFINITY, f64::min)
    }
}

/// `∂₊Ω`, `∂₋Ω`, `Q` and the vertex set `Q̸` of a cell of `Ω`.
///
/// Triangles are listed by their vertices; `∂₊` is the pair of faces opposite
/// the vertices on `C`, `∂₋` the pair opposite the vertices on `C⊥`.
#[derive(Clone, Debug)]
pub struct BoundaryParts {
    pub plus: [[PointS3; 3]; 2],
    pub minus: [[PointS3; 3]; 2],
    pub quad: LawsonQuad,
    pub vertices: [PointS3; 4],
}

pub fn boundary_parts(lat: &Lattice, idx: &CellIndex) -> BoundaryParts {
    debug_assert_eq!(idx.family, Family::Omega);
    let (i2, j2) = (idx.i2, idx.j2);
    let (lm, lp) = (lat.t_lower(i2 - 1), lat.t_lower(i2 + 1));
    let (um, up) = (lat.t_upper(j2 - 1), lat.t_upper(j2 + 1));
    BoundaryParts {
        plus: [[lm, um, up], [lp, um, up]],
        minus: [[lm, lp, um], [lm, lp, up]],
        quad: LawsonQuad {
            corners: [lm, um, lp, up],
        },
        vertices: [lm, lp, um, up],
    }
}

/// Where a point of a closed cell of `Ω` sits on its boundary, read off the
/// cone coefficients (vertex order `t_{i−½}, t_{i+½}, t^{j−½}, t^{j+½}`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BoundarySide {
    pub plus: bool,
    pub minus: bool,
}

pub fn boundary_side(t: &SphericalTetrahedron, p: &PointS3, tol: f64) -> BoundarySide {
    let c = t.coefficients(p.coords());
    BoundarySide {
        plus: c[0].abs() <= tol || c[1].abs() <= tol,
        minus: c[2].abs() <= tol || c[3].abs() <= tol,
    }
}

/// Random point of the geodesic triangle `⟨a b c⟩`.
pub(crate) fn random_in_triangle<R: Rng + ?Sized>(tri: &[PointS3; 3], rng: &mut R) -> PointS3 {
    let w: [f64; 3] = std::array::from_fn(|_| -rng.random::<f64>().max(1e-300).ln());
    let v = tri[0].coords() * w[0] + tri[1].coords() * w[1] + tri[2].coords() * w[2];
    PointS3::normalize(v).expect("positive combination")
}

/// Largest violation of `∂Ω = ∂₊ ∪ ∂₋` and `Q = ∂₊ ∩ ∂₋` over random boundary
/// samples, measured independently of the cone coefficients.
pub fn boundary_parts_residual<R: Rng + ?Sized>(lat: &Lattice, idx: &CellIndex, samples: usize, rng: &mut R) -> f64 {
    let t = lat.tetra(idx);
    let parts = boundary_parts(lat, idx);
    let in_any = |tris: &[[PointS3; 3]; 2], p: &PointS3| -> f64 {
        tris.iter()
            .map(|tri| triangle_distance(tri, p))
            .fold(f64::INFINITY, f64::min)
    };
    let mut worst: f64 = 0.0;
    for s in 0..samples {
        // A random point of a random face, or of a random edge.
        let face = s % 4;
        let mut tri: Vec<PointS3> = (0..4).filter(|&v| v != face).map(|v| *t.vertex(v)).collect();
        if s % 3 == 0 {
            tri[2] = tri[1];
        }
        let p = random_in_triangle(&[tri[0], tri[1], tri[2]], rng);
        let d_plus = in_any(&parts.plus, &p);
        let d_minus = in_any(&parts.minus, &p);
        worst = worst.max(d_plus.min(d_minus));
        if d_plus < 1e-12 && d_minus < 1e-12 {
            worst = worst.max(parts.quad.distance(&p));
        }
    }
    // Every point of Q lies on both parts.
    for p in parts.quad.polyline(32) {
        worst = worst.max(in_any(&parts.plus, &p)).max(in_any(&parts.minus, &p));
    }
    worst
}

/// Chordal distance from `p` to the geodesic triangle, computed in the 3-space of
/// the triangle: zero iff `p` is in its cone.
fn triangle_distance(tri: &[PointS3; 3], p: &PointS3) -> f64 {
    // Project onto span, then check sign of barycentric coordinates by solving the 3×3 Gram system.
    let g = nalgebra::Matrix3::from_fn(|r, c| tri[r].dot(&tri[c]));
    let rhs = nalgebra::Vector3::from_fn(|r, _| tri[r].dot(p));
    let Some(w) = g.lu().solve(&rhs) else {
        return f64::INFINITY;
    };
    let proj = tri[0].coords() * w[0] + tri[1].coords() * w[1] + tri[2].coords() * w[2];
    let off = (p.coords() - proj).norm();
    if w.iter().all(|&x| x >= -1e-12) {
        off
    } else {
        // Outside the cone: distance to the nearest edge.
        let edge = |a: &PointS3, b: &PointS3| arc_distance(a, b, p);
        edge(&tri[0], &tri[1])
            .min(edge(&tri[1], &tri[2]))
            .min(edge(&tri[0], &tri[2]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeParams;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_2;

    fn setup() -> (Lattice, CellIndex) {
        let l = Lattice::build(LatticeParams::new(3, 2).unwrap());
        let idx = CellIndex::omega(l.params(), 0, 0);
        (l, idx)
    }

    #[test]
    fn minus_part_of_omega_zero() {
        let (l, idx) = setup();
        let b = boundary_parts(&l, &idx);
        assert_eq!(b.minus[0], [l.t_lower(-1), l.t_lower(1), l.t_upper(-1)]);
        assert_eq!(b.minus[1], [l.t_lower(-1), l.t_lower(1), l.t_upper(1)]);
        assert_eq!(b.vertices, *l.tetra(&idx).vertices());
    }

    #[test]
    fn quad_arcs_are_quarter_circles() {
        let (l, idx) = setup();
        let b = boundary_parts(&l, &idx);
        for (p, q) in b.quad.arcs() {
            assert!((p.distance(&q) - FRAC_PI_2).abs() < 1e-14);
        }
        let pl = b.quad.polyline(10);
        assert_eq!(pl.len(), 40);
        assert!(pl.iter().all(|p| b.quad.distance(p) < 1e-14));
    }

    #[test]
    fn boundary_decomposition_holds() {
        let (l, idx) = setup();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let r = boundary_parts_residual(&l, &idx, 2000, &mut rng);
        assert!(r < 1e-10, "{r}");
    }

    #[test]
    fn sides_from_coefficients() {
        let (l, idx) = setup();
        let t = l.tetra(&idx);
        let b = boundary_parts(&l, &idx);
        let q = b.quad.point_at(0.3);
        assert_eq!(
            boundary_side(t, &q, 1e-12),
            BoundarySide {
                plus: true,
                minus: true
            }
        );
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let p = random_in_triangle(&b.plus[0], &mut rng);
        assert_eq!(
            boundary_side(t, &p, 1e-12),
            BoundarySide {
                plus: true,
                minus: false
            }
        );
        assert_eq!(
            boundary_side(t, &t.centroid(), 1e-12),
            BoundarySide {
                plus: false,
                minus: false
            }
        );
    }
}
