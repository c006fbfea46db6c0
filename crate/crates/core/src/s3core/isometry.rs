use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use super::point::{PointS3, Vec4};
use super::GeometryError;

pub type Mat4 = Matrix4<f64>;

/// Tolerance for `mᵀm = I` and `|det m| = 1`.
pub const ORTHO_TOL: f64 = 1e-10;

/// An orthogonal transformation of R⁴ restricted to the three-sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 16]", try_from = "[f64; 16]")]
pub struct Isometry4(Mat4);

impl Isometry4 {
    pub fn identity() -> Self {
        Isometry4(Mat4::identity())
    }

    pub fn new(m: Mat4) -> Result<Self, GeometryError> {
        let iso = Isometry4(m);
        if !iso.is_orthogonal(ORTHO_TOL) {
            return Err(GeometryError::InvalidInput(format!(
                "matrix is not orthogonal (defect {:e})",
                iso.orthogonality_defect()
            )));
        }
        Ok(iso)
    }

    pub(crate) fn from_matrix_unchecked(m: Mat4) -> Self {
        Isometry4(m)
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    /// Reflection `R_V = Π_V − Π_{V⊥}` through the span of an orthonormal family.
    ///
    /// Zero vectors give the antipodal map, four give the identity.
    pub fn reflection(basis: &[Vec4]) -> Result<Self, GeometryError> {
        check_orthonormal(basis)?;
        let mut proj = Mat4::zeros();
        for e in basis {
            proj += e * e.transpose();
        }
        Ok(Isometry4(proj * 2.0 - Mat4::identity()))
    }

    /// Reflection through the great sphere with unit normal `n`.
    pub fn sphere_reflection(n: &Vec4) -> Self {
        Isometry4(Mat4::identity() - n * n.transpose() * 2.0)
    }

    pub fn apply(&self, p: &PointS3) -> PointS3 {
        PointS3::from_unit_unchecked(self.0 * p.coords())
    }

    pub fn apply_vec(&self, v: &Vec4) -> Vec4 {
        self.0 * v
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Isometry4) -> Isometry4 {
        Isometry4(self.0 * other.0)
    }

    pub fn inverse(&self) -> Isometry4 {
        Isometry4(self.0.transpose())
    }

    pub fn det(&self) -> f64 {
        self.0.determinant()
    }

    /// `true` for elements of SO(4).
    pub fn is_rotation(&self) -> bool {
        self.det() > 0.0
    }

    pub fn orthogonality_defect(&self) -> f64 {
        (self.0.transpose() * self.0 - Mat4::identity()).amax()
    }

    pub fn is_orthogonal(&self, tol: f64) -> bool {
        self.orthogonality_defect() <= tol && (self.det().abs() - 1.0).abs() <= tol
    }

    /// Max-abs entry distance.
    pub fn distance(&self, other: &Isometry4) -> f64 {
        (self.0 - other.0).amax()
    }

    pub fn row_major(&self) -> [f64; 16] {
        let mut out = [0.0; 16];
        for r in 0..4 {
            for c in 0..4 {
                out[4 * r + c] = self.0[(r, c)];
            }
        }
        out
    }
}

impl From<Isometry4> for [f64; 16] {
    fn from(g: Isometry4) -> Self {
        g.row_major()
    }
}

impl TryFrom<[f64; 16]> for Isometry4 {
    type Error = GeometryError;
    fn try_from(v: [f64; 16]) -> Result<Self, Self::Error> {
        let m = Mat4::from_row_slice(&v);
        let iso = Isometry4(m);
        // JSON round-trips lose the last bits; accept them.
        if !iso.is_orthogonal(1e-9) {
            return Err(GeometryError::InvalidInput(
                "serialized matrix is not orthogonal".into(),
            ));
        }
        Ok(iso)
    }
}

pub(crate) fn check_orthonormal(basis: &[Vec4]) -> Result<(), GeometryError> {
    if basis.len() > 4 {
        return Err(GeometryError::InvalidInput("more than four basis vectors".into()));
    }
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate().skip(i) {
            let target = if i == j { 1.0 } else { 0.0 };
            if (a.dot(b) - target).abs() > ORTHO_TOL {
                return Err(GeometryError::InvalidInput(format!(
                    "basis is not orthonormal (<e{i}, e{j}> = {})",
                    a.dot(b)
                )));
            }
        }
    }
    Ok(())
}

/// `R_V p = Π_V p − Π_{V⊥} p` for `V` spanned by an orthonormal `basis`.
pub fn reflect(basis: &[Vec4], p: &PointS3) -> Result<PointS3, GeometryError> {
    check_orthonormal(basis)?;
    let proj: Vec4 = basis.iter().map(|e| e * e.dot(p.coords())).sum();
    Ok(PointS3::from_unit_unchecked(proj * 2.0 - p.coords()))
}
