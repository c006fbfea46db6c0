use nalgebra::Matrix4;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::isometry::Mat4;
use super::point::{arc_length, PointS3, Vec4};
use super::GeometryError;

/// Cone coefficients at or above `-MEMBERSHIP_TOL` count as inside (closed cells).
pub const MEMBERSHIP_TOL: f64 = 1e-10;

/// Vertex pairs of the six edges, in a fixed order.
pub const EDGES: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// A spherical tetrahedron: the iterated geodesic cone over four linearly
/// independent points.
///
/// A point lies in the tetrahedron iff it is a non-negative combination of
/// the vertices, so membership reduces to one 4×4 solve. Face `f` is the face
/// opposite vertex `f`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SphericalTetrahedron {
    vertices: [PointS3; 4],
    #[serde(skip, default = "Mat4::zeros")]
    inverse: Mat4,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Membership {
    pub inside: bool,
    pub coeffs: [f64; 4],
}

impl Membership {
    pub fn min_coeff(&self) -> f64 {
        self.coeffs.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

impl SphericalTetrahedron {
    pub fn new(vertices: [PointS3; 4]) -> Result<Self, GeometryError> {
        let m = Matrix4::from_columns(&vertices.map(|v| *v.coords()));
        let det = m.determinant();
        if det.abs() <= 1e-10 {
            return Err(GeometryError::InvalidTetrahedron { det });
        }
        let inverse = m.try_inverse().ok_or(GeometryError::InvalidTetrahedron { det })?;
        Ok(SphericalTetrahedron { vertices, inverse })
    }

    pub fn vertices(&self) -> &[PointS3; 4] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &PointS3 {
        &self.vertices[i]
    }

    /// Cone coefficients `c` with `p = Σ cᵢ vᵢ`.
    pub fn coefficients(&self, p: &Vec4) -> [f64; 4] {
        let c = self.inverse * p;
        [c[0], c[1], c[2], c[3]]
    }

    pub fn membership(&self, p: &PointS3) -> Membership {
        self.membership_with_tol(p, MEMBERSHIP_TOL)
    }

    pub fn membership_with_tol(&self, p: &PointS3, tol: f64) -> Membership {
        let coeffs = self.coefficients(p.coords());
        Membership {
            inside: coeffs.iter().all(|&c| c >= -tol),
            coeffs,
        }
    }

    pub fn contains(&self, p: &PointS3) -> bool {
        self.membership(p).inside
    }

    /// Inward unit normal of the 3-plane containing face `f` (opposite vertex `f`).
    pub fn face_normal(&self, f: usize) -> Vec4 {
        let row = self.inverse.row(f).transpose();
        row.normalize()
    }

    pub fn edge_vertices(&self, edge: usize) -> (PointS3, PointS3) {
        let (a, b) = EDGES[edge];
        (self.vertices[a], self.vertices[b])
    }

    pub fn edge_length(&self, edge: usize) -> f64 {
        let (a, b) = self.edge_vertices(edge);
        arc_length(&a, &b).expect("tetrahedron vertices are never antipodal")
    }

    /// Interior dihedral angle along `edge`.
    pub fn dihedral_angle(&self, edge: usize) -> f64 {
        let (a, b) = EDGES[edge];
        let mut others = (0..4).filter(|&i| i != a && i != b);
        let (c, d) = (others.next().unwrap(), others.next().unwrap());
        let cos = self.face_normal(c).dot(&self.face_normal(d));
        std::f64::consts::PI - cos.clamp(-1.0, 1.0).acos()
    }

    pub fn centroid(&self) -> PointS3 {
        let s: Vec4 = self.vertices.iter().map(|v| v.coords()).sum();
        PointS3::normalize(s).expect("vertices are linearly independent")
    }

    /// Random point with strictly positive cone coefficients.
    pub fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> PointS3 {
        let w: [f64; 4] = std::array::from_fn(|_| -rng.random::<f64>().max(1e-300).ln());
        let s: Vec4 = (0..4).map(|i| self.vertices[i].coords() * w[i]).sum();
        PointS3::normalize(s).expect("positive combination is non-zero")
    }

    /// Extreme points of `self ∩ other`, empty when the tetrahedra are disjoint.
    ///
    /// A common point is `Σ aᵢvᵢ = Σ bⱼwⱼ` with `a, b ≥ 0`; substituting
    /// `a = V⁻¹W b` leaves the polytope `{b ≥ 0, Σb = 1, V⁻¹W b ≥ 0}`, whose
    /// vertices are found by trying every choice of three active constraints.
    pub fn intersection_vertices(&self, other: &SphericalTetrahedron, tol: f64) -> Vec<PointS3> {
        let w = Matrix4::from_columns(&other.vertices.map(|v| *v.coords()));
        let m = self.inverse * w;
        // Constraint rows: b_r ≥ 0 for r < 4, (M b)_{r-4} ≥ 0 for r ≥ 4.
        let row = |r: usize| -> Vec4 {
            if r < 4 {
                Vec4::ith(r, 1.0)
            } else {
                m.row(r - 4).transpose()
            }
        };
        let mut out: Vec<PointS3> = Vec::new();
        for a in 0..8 {
            for b in a + 1..8 {
                for c in b + 1..8 {
                    let sys = Matrix4::from_rows(&[
                        row(a).transpose(),
                        row(b).transpose(),
                        row(c).transpose(),
                        Vec4::repeat(1.0).transpose(),
                    ]);
                    let Some(bv) = sys.lu().solve(&Vec4::new(0.0, 0.0, 0.0, 1.0)) else {
                        continue;
                    };
                    if (0..8).all(|r| row(r).dot(&bv) >= -tol) {
                        if let Ok(p) = PointS3::normalize(w * bv) {
                            if out.iter().all(|q| q.chord(&p) > 1e-9) {
                                out.push(p);
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Restores the cached inverse after deserialization.
    pub fn rebuild(self) -> Result<Self, GeometryError> {
        Self::new(self.vertices)
    }
}
