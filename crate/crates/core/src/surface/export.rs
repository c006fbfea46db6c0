//! Stereographic OBJ export and the JSON sidecar that records the projection.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::lattice::Lattice;
use crate::plateau::{MeshDocument, TriMeshS3};
use crate::s3core::{PointS3, Vec4};

use super::SurfaceTopology;

/// Projection pole `−t^{⌊k/2⌋}`, a lattice point the surface avoids.
pub fn export_pole(lat: &Lattice) -> PointS3 {
    lat.t_upper(2 * (lat.params().k() / 2)).antipode()
}

/// Orthonormal basis of `pole⊥`.
pub fn projection_basis(pole: &PointS3) -> [Vec4; 3] {
    let p = *pole.coords();
    let mut basis: Vec<Vec4> = Vec::with_capacity(3);
    for i in 0..4 {
        let mut v = Vec4::from_fn(|r, _| if r == i { 1.0 } else { 0.0 });
        v -= p * p.dot(&v);
        for u in &basis {
            v -= u * u.dot(&v);
        }
        if v.norm() > 0.3 && basis.len() < 3 {
            basis.push(v.normalize());
        }
    }
    [basis[0], basis[1], basis[2]]
}

/// `x ↦ (x − (x·P)P)/(1 − x·P)` in the given basis of `P⊥`.
pub fn stereographic(pole: &PointS3, basis: &[Vec4; 3], x: &PointS3) -> [f64; 3] {
    let s = 1.0 - x.dot(pole);
    basis.map(|b| b.dot(x.coords()) / s)
}

/// Writes `v x y z` lines and 1-based `f` lines.
pub fn stereographic_obj<W: Write>(mesh: &TriMeshS3, pole: &PointS3, mut out: W) -> std::io::Result<()> {
    let basis = projection_basis(pole);
    for v in mesh.vertices() {
        let [x, y, z] = stereographic(pole, &basis, v);
        writeln!(out, "v {x:.17e} {y:.17e} {z:.17e}")?;
    }
    for t in mesh.triangles() {
        writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SurfaceDocument {
    pub m: i64,
    pub k: i64,
    pub level: u32,
    pub pole: [f64; 4],
    pub basis: [[f64; 4]; 3],
    pub topology: SurfaceTopology,
    pub mesh: MeshDocument,
}

impl SurfaceDocument {
    pub fn new(lat: &Lattice, level: u32, mesh: &TriMeshS3, topology: SurfaceTopology) -> SurfaceDocument {
        let pole = export_pole(lat);
        SurfaceDocument {
            m: lat.params().m(),
            k: lat.params().k(),
            level,
            pole: pole.to_array(),
            basis: projection_basis(&pole).map(|b| b.into()),
            topology,
            mesh: mesh.document(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeParams;

    #[test]
    fn basis_is_orthonormal_and_orthogonal_to_pole() {
        let lat = Lattice::build(LatticeParams::new(4, 3).unwrap());
        let p = export_pole(&lat);
        let b = projection_basis(&p);
        for i in 0..3 {
            assert!(b[i].dot(p.coords()).abs() < 1e-15);
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((b[i].dot(&b[j]) - want).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn antipode_of_pole_goes_to_origin() {
        let lat = Lattice::build(LatticeParams::new(3, 2).unwrap());
        let p = export_pole(&lat);
        let b = projection_basis(&p);
        assert_eq!(stereographic(&p, &b, &p.antipode()), [0.0; 3]);
        let q = lat.t_lower(0);
        let y = stereographic(&p, &b, &q);
        assert!((y.iter().map(|c| c * c).sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn obj_lines() {
        let lat = Lattice::build(LatticeParams::new(3, 2).unwrap());
        let pts: Vec<PointS3> = [0, 2, 1, 3]
            .iter()
            .map(|&i| {
                *lat.tetra(&crate::lattice::CellIndex::omega(lat.params(), 0, 0))
                    .vertex(i)
            })
            .collect();
        let d = TriMeshS3::from_triangles(pts, vec![[0, 1, 2], [1, 0, 3]]).unwrap();
        let mut buf = Vec::new();
        stereographic_obj(&d, &export_pole(&lat), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().filter(|l| l.starts_with("v ")).count(), 4);
        assert_eq!(
            text.lines().filter(|l| l.starts_with("f ")).collect::<Vec<_>>(),
            ["f 1 2 3", "f 2 1 4"]
        );
    }
}
