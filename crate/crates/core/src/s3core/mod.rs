//! Spherical geometry in the unit three-sphere: points, isometries, great
//! circles and spheres, rotations and Killing fields, tetrahedra.

mod angle;
pub mod checks;
mod circle;
pub mod frame;
mod isometry;
mod point;
mod tetra;

pub use angle::PiRational;
pub use circle::{
    killing_eval, orbit_project, rotate_about, rotate_along, CircleIntersection, GreatCircle, GreatSphere,
};
pub use isometry::{reflect, Isometry4, Mat4, ORTHO_TOL};
pub use point::{
    arc_distance, arc_length, cross4, geodesic, midpoint, PointS3, TangentVector, Vec4, ANTIPODAL_CUTOFF, UNIT_TOL,
};
pub use tetra::{Membership, SphericalTetrahedron, EDGES, MEMBERSHIP_TOL};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("geodesic endpoints are (nearly) antipodal: angle {angle}")]
    DegenerateGeodesic { angle: f64 },
    #[error("vertices do not span R⁴ (det = {det:e})")]
    InvalidTetrahedron { det: f64 },
}
