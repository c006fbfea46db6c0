//! The closed surface `M[m,k]` assembled from copies of the disc, with its
//! topology, symmetries, umbilics and the Gauss–Bonnet ledger on `Ω̲`.

mod export;
mod ledger;
mod umbilic;

pub use export::{export_pole, projection_basis, stereographic, stereographic_obj, SurfaceDocument};
pub use ledger::{ledger, BoundaryCase, CellLedger, Crossing, EdgeKind, LedgerReport};
pub use umbilic::{umbilic_probe, UmbilicCandidate, UmbilicReport};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::groups::FiniteGroup;
use crate::lattice::{CellIndex, Family, Lattice};
use crate::plateau::{MeshError, PointGrid, TriMeshS3};
use crate::s3core::{PointS3, Vec4};

/// Chordal distance below which boundary vertices of different copies are merged.
pub const WELD_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SurfaceError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("boundary vertex {vertex:?} has no partner after welding")]
    WeldFailure { vertex: [f64; 4] },
    #[error("copy {copy} leaves its cell (cone coefficient {coefficient:e})")]
    CopyOutsideCell { copy: usize, coefficient: f64 },
    #[error("candidate point {point:?} is not on the mesh (distance {distance:e})")]
    ProbeMiss { point: [f64; 4], distance: f64 },
    #[error("cutting along {cell:?} failed: {detail}")]
    Cut { cell: CellIndex, detail: String },
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

/// Where one copy of the disc came from.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CopyRecord {
    pub cell: CellIndex,
    /// Index of the group element that carries `Ω₀⁰` to `cell`.
    pub element: usize,
    /// Range of triangle indices of the copy in the welded mesh.
    pub triangles: (usize, usize),
}

#[derive(Clone, Debug)]
pub struct ClosedSurfaceMesh {
    pub mesh: TriMeshS3,
    pub copies: Vec<CopyRecord>,
}

/// `⋃_g g·D` over `g ∈ 𝒢^{C_Q}`, welded and consistently oriented.
pub fn assemble(lat: &Lattice, disc: &TriMeshS3, grp: &FiniteGroup) -> Result<ClosedSurfaceMesh, SurfaceError> {
    let home = lat.tetra(&CellIndex::omega(lat.params(), 0, 0));
    let home_centre = home.centroid();
    let mut parts = Vec::with_capacity(grp.order());
    let mut copies = Vec::with_capacity(grp.order());
    let mut seen = BTreeSet::new();
    let mut offset = 0;
    for (e, g) in grp.elements().iter().enumerate() {
        let centre = g.apply(&home_centre);
        let cell = *lat
            .locate(&centre, Family::Omega)
            .first()
            .ok_or_else(|| SurfaceError::InvalidInput(format!("element {e} moves Ω₀⁰ off the tessellation")))?;
        if !seen.insert((cell.i2, cell.j2)) {
            return Err(SurfaceError::InvalidInput(format!("element {e} repeats cell {cell:?}")));
        }
        let copy = disc.transformed(g);
        let t = lat.tetra(&cell);
        let worst = copy
            .vertices()
            .iter()
            .map(|v| t.membership(v).min_coeff())
            .fold(f64::INFINITY, f64::min);
        if worst < -1e-6 {
            return Err(SurfaceError::CopyOutsideCell {
                copy: e,
                coefficient: worst,
            });
        }
        copies.push(CopyRecord {
            cell,
            element: e,
            triangles: (offset, offset + copy.triangle_count()),
        });
        offset += copy.triangle_count();
        parts.push(copy);
    }
    let mut mesh = TriMeshS3::concat(&parts).weld(WELD_TOL);
    mesh.is_manifold()?;
    if let Some(&(a, _)) = mesh.boundary_edges().first() {
        return Err(SurfaceError::WeldFailure {
            vertex: mesh.vertex(a as usize).to_array(),
        });
    }
    mesh.orient()?;
    Ok(ClosedSurfaceMesh { mesh, copies })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceTopology {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub euler_characteristic: i64,
    pub genus: i64,
    pub orientable: bool,
    pub connected: bool,
}

/// `χ = V − E + F` and `genus = (2 − χ)/2` of a closed mesh.
pub fn topology(mesh: &TriMeshS3) -> Result<SurfaceTopology, SurfaceError> {
    mesh.is_manifold()?;
    if !mesh.boundary_edges().is_empty() {
        return Err(SurfaceError::InvalidInput("mesh has boundary".into()));
    }
    let t = mesh.topology();
    Ok(SurfaceTopology {
        vertices: t.vertices,
        edges: t.edges,
        faces: t.triangles,
        euler_characteristic: t.euler_characteristic,
        genus: (2 - t.euler_characteristic) / 2,
        orientable: t.orientable,
        connected: t.components == 1,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ElementFlags {
    pub element: usize,
    /// Largest distance from an image vertex to the nearest mesh vertex.
    pub deviation: f64,
    pub rotation: bool,
    /// `g` carries the unit normal field to itself.
    pub preserves_sides: bool,
    /// `g` preserves the cyclic order of the oriented triangles.
    pub preserves_orientation: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub max_deviation: f64,
    pub elements: Vec<ElementFlags>,
}

impl SymmetryReport {
    fn indices(&self, keep: impl Fn(&ElementFlags) -> bool) -> Vec<usize> {
        self.elements.iter().filter(|e| keep(e)).map(|e| e.element).collect()
    }

    pub fn sides_preserving(&self) -> Vec<usize> {
        self.indices(|e| e.preserves_sides)
    }

    pub fn orientation_preserving(&self) -> Vec<usize> {
        self.indices(|e| e.preserves_orientation)
    }

    pub fn rotations(&self) -> Vec<usize> {
        self.indices(|e| e.rotation)
    }
}

/// Deviation of `g·mesh` from `mesh` and the side and orientation behaviour
/// of each element of `group`.
pub fn symmetry_check(mesh: &TriMeshS3, group: &FiniteGroup) -> SymmetryReport {
    let grid = PointGrid::build(mesh.vertices(), 1e-6);
    let normals = mesh.vertex_normals();
    let oriented: BTreeSet<[u32; 3]> = mesh.triangles().iter().map(|t| rotate_min_first(*t)).collect();
    let elements: Vec<ElementFlags> = group
        .elements()
        .iter()
        .enumerate()
        .map(|(e, g)| {
            let images: Vec<PointS3> = mesh.vertices().iter().map(|v| g.apply(v)).collect();
            let deviation = images
                .iter()
                .map(|p| grid.nearest_distance(mesh.vertices(), p))
                .fold(0.0, f64::max);
            let perm: Vec<Option<u32>> = images
                .iter()
                .map(|p| grid.find(mesh.vertices(), p, 1e-6).map(|i| i as u32))
                .collect();
            let mut side_votes = 0i64;
            for (i, p) in perm.iter().enumerate() {
                if let Some(j) = p {
                    let s = g.apply_vec(&normals[i]).dot(&normals[*j as usize]);
                    side_votes += if s > 0.0 { 1 } else { -1 };
                }
            }
            let mut orient_votes = 0i64;
            for t in mesh.triangles() {
                let Some(img) = t.iter().map(|&v| perm[v as usize]).collect::<Option<Vec<u32>>>() else {
                    continue;
                };
                let img = rotate_min_first([img[0], img[1], img[2]]);
                if oriented.contains(&img) {
                    orient_votes += 1;
                } else if oriented.contains(&rotate_min_first([img[0], img[2], img[1]])) {
                    orient_votes -= 1;
                }
            }
            ElementFlags {
                element: e,
                deviation,
                rotation: g.is_rotation(),
                preserves_sides: side_votes > 0,
                preserves_orientation: orient_votes > 0,
            }
        })
        .collect();
    SymmetryReport {
        max_deviation: elements.iter().map(|e| e.deviation).fold(0.0, f64::max),
        elements,
    }
}

fn rotate_min_first(t: [u32; 3]) -> [u32; 3] {
    let i = (0..3).min_by_key(|&i| t[i]).unwrap();
    [t[i], t[(i + 1) % 3], t[(i + 2) % 3]]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AxisIncidenceReport {
    /// Points of `M ∩ (C ∪ C⊥)` found on the mesh.
    pub found: usize,
    pub expected: usize,
    /// Largest distance from a found point to the nearest expected one, and back.
    pub mismatch: f64,
    /// Largest distance from a sampled point of `⋃𝐂_Q` to the mesh.
    pub circle_distance: f64,
}

impl AxisIncidenceReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.found == self.expected && self.mismatch < tol && self.circle_distance < tol
    }
}

/// Checks `M ∩ (C ∪ C⊥) = {tᵢ, tʲ : i, j ∈ ½ + ℤ}` and `⋃𝐂_Q ⊂ M`.
pub fn axis_incidence(mesh: &TriMeshS3, lat: &Lattice, samples_per_circle: usize) -> AxisIncidenceReport {
    let (m, k) = (lat.params().m(), lat.params().k());
    let e = |i: usize| Vec4::from_fn(|r, _| if r == i { 1.0 } else { 0.0 });
    let tau = std::f64::consts::TAU;
    let mut found: Vec<PointS3> = crate::plateau::circle_hits(mesh, &e(0), &e(1), 0.0, tau)
        .into_iter()
        .chain(crate::plateau::circle_hits(mesh, &e(2), &e(3), 0.0, tau))
        .map(|(_, p)| p)
        .collect();
    let mut unique: Vec<PointS3> = Vec::new();
    for p in found.drain(..) {
        if unique.iter().all(|q| q.chord(&p) > 1e-7) {
            unique.push(p);
        }
    }
    let expected: Vec<PointS3> = (0..2 * m)
        .map(|i| lat.t_lower(2 * i + 1))
        .chain((0..2 * k).map(|j| lat.t_upper(2 * j + 1)))
        .collect();
    let nearest = |p: &PointS3, set: &[PointS3]| set.iter().map(|q| q.chord(p)).fold(f64::INFINITY, f64::min);
    let mismatch = unique
        .iter()
        .map(|p| nearest(p, &expected))
        .chain(expected.iter().map(|p| nearest(p, &unique)))
        .fold(0.0, f64::max);
    let circle_distance = lat
        .circles_q()
        .iter()
        .flat_map(|c| (0..samples_per_circle).map(move |s| c.point_at(tau * s as f64 / samples_per_circle as f64)))
        .map(|p| mesh.distance_to(&p))
        .fold(0.0, f64::max);
    AxisIncidenceReport {
        found: unique.len(),
        expected: expected.len(),
        mismatch,
        circle_distance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groups::{build_named_groups, default_cap};
    use crate::lattice::LatticeParams;
    use crate::plateau::{solve_disc, SolverOptions};

    pub(crate) fn lawson(m: i64, k: i64, level: u32) -> (Lattice, ClosedSurfaceMesh, crate::groups::NamedGroups) {
        let lat = Lattice::build(LatticeParams::new(m, k).unwrap());
        let groups = build_named_groups(&lat, default_cap(&lat)).unwrap();
        let (disc, _) = solve_disc(
            &lat,
            &SolverOptions {
                level,
                ..Default::default()
            },
        )
        .unwrap();
        let s = assemble(&lat, &disc, &groups.circles_q).unwrap();
        (lat, s, groups)
    }

    #[test]
    fn genus_matches_formula() {
        for (m, k) in [(3, 2), (4, 2), (3, 3), (4, 3)] {
            let (_, s, _) = lawson(m, k, 2);
            let t = topology(&s.mesh).unwrap();
            assert_eq!(t.genus, (k - 1) * (m - 1), "({m},{k}) {t:?}");
            assert_eq!(t.euler_characteristic, 2 - 2 * (k - 1) * (m - 1));
            assert!(t.orientable && t.connected);
            assert_eq!(s.copies.len() as i64, 2 * k * m);
        }
    }

    #[test]
    fn round_sphere_has_genus_zero() {
        let e = |i: usize| PointS3::from_coords(std::array::from_fn(|r| if r == i { 1.0 } else { 0.0 })).unwrap();
        let v = vec![e(0), e(1), e(2), e(0).antipode(), e(1).antipode(), e(2).antipode()];
        let tris = vec![
            [0, 1, 2],
            [1, 3, 2],
            [3, 4, 2],
            [4, 0, 2],
            [1, 0, 5],
            [3, 1, 5],
            [4, 3, 5],
            [0, 4, 5],
        ];
        let octa = TriMeshS3::from_triangles(v, tris).unwrap().subdivide();
        let t = topology(&octa).unwrap();
        assert_eq!((t.genus, t.euler_characteristic), (0, 2));
    }

    #[test]
    fn disc_alone_is_not_closed() {
        let lat = Lattice::build(LatticeParams::new(3, 2).unwrap());
        let d = crate::plateau::initial_disc(&lat, 2).unwrap();
        assert!(matches!(topology(&d), Err(SurfaceError::InvalidInput(_))));
        let groups = build_named_groups(&lat, default_cap(&lat)).unwrap();
        let half = FiniteGroup::close(&[*groups.circles_q.element(1)], 4).unwrap();
        assert!(matches!(
            assemble(&lat, &d, &half),
            Err(SurfaceError::WeldFailure { .. })
        ));
    }

    #[test]
    fn flags_recover_the_named_subgroups() {
        let (lat, s, groups) = lawson(3, 2, 3);
        let r = symmetry_check(&s.mesh, &groups.full);
        assert!(r.max_deviation < 10.0 * WELD_TOL, "{}", r.max_deviation);
        assert_eq!(r.elements[0].deviation, 0.0);
        let set = |ids: Vec<usize>| -> Vec<usize> { ids };
        let members = |g: &FiniteGroup| -> Vec<usize> {
            (0..groups.full.order())
                .filter(|&i| g.contains(groups.full.element(i)))
                .collect()
        };
        assert_eq!(set(r.sides_preserving()), members(&groups.sigma));
        assert_eq!(set(r.orientation_preserving()), members(&groups.orientation));
        assert_eq!(set(r.rotations()), members(&groups.circles));
        for c in lat.circles_q() {
            let i = groups.full.index_of(&c.reflection()).unwrap();
            assert!(!r.elements[i].preserves_sides && !r.elements[i].preserves_orientation && r.elements[i].rotation);
        }
    }

    #[test]
    fn surface_meets_c_and_c_perp_in_the_lattice_points() {
        for (m, k) in [(3, 2), (4, 3)] {
            let (lat, s, _) = lawson(m, k, 3);
            let r = axis_incidence(&s.mesh, &lat, 32);
            assert!(r.passed(1e-6), "{r:?}");
            assert_eq!(r.expected as i64, 2 * m + 2 * k);
        }
    }
}
