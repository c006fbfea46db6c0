//! Spherical tessellations, finite symmetry groups and numerically minimized
//! Lawson discs and surfaces in the three-sphere.

pub mod groups;
pub mod harness;
pub mod lattice;
pub mod plateau;
pub mod s3core;
pub mod surface;

pub use s3core::{
    GeometryError, GreatCircle, GreatSphere, Isometry4, PiRational, PointS3, SphericalTetrahedron, TangentVector,
};
