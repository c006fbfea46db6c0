//! The fixed coordinate frame: `C` is the x¹x²-circle, `C⊥` the x³x⁴-circle,
//! `p₀ = e₁`, `p_{π/2} = e₂`, `p⁰ = e₃`, `p^{π/2} = e₄`.

use super::circle::{GreatCircle, GreatSphere};
use super::point::{PointS3, Vec4};

/// `p_φ ∈ C`.
pub fn p_lower(phi: f64) -> PointS3 {
    PointS3::on_c(phi)
}

/// `p^φ ∈ C⊥`.
pub fn p_upper(phi: f64) -> PointS3 {
    PointS3::on_c_perp(phi)
}

/// `Σ_φ = S(C⊥, p_φ)`; its unit normal is `p_{φ+π/2}`.
pub fn sigma_lower(phi: f64) -> GreatSphere {
    let (s, c) = phi.sin_cos();
    GreatSphere::from_normal(Vec4::new(-s, c, 0.0, 0.0)).expect("unit normal")
}

/// `Σ^φ = S(C, p^φ)`; its unit normal is `p^{φ+π/2}`.
pub fn sigma_upper(phi: f64) -> GreatSphere {
    let (s, c) = phi.sin_cos();
    GreatSphere::from_normal(Vec4::new(0.0, 0.0, -s, c)).expect("unit normal")
}

/// `C_φ^{φ'} = S(p_φ, p^{φ'})`, oriented from `p_φ` to `p^{φ'}`.
pub fn circle(phi: f64, phi_up: f64) -> GreatCircle {
    GreatCircle::new(p_lower(phi), p_upper(phi_up)).expect("p_φ ⟂ p^φ'")
}
