//! The `(m, k)` lattice: points `tᵢ ∈ C`, `tʲ ∈ C⊥`, the spheres and circles
//! through them, and the four tessellations of S³ by the tetrahedra `Ωᵢʲ`.
//!
//! Half-integer indices are stored doubled: `i2 = 2i`. Cell indices are
//! reduced to `i2 ∈ [0, 4m)`, `j2 ∈ [0, 4k)`.

pub(crate) mod axis;
mod boundary;
pub mod checks;

pub use axis::{axis_rotation_report, AxisRotationConfig, AxisRotationReport, ContactCase, Violation};
pub use boundary::{boundary_parts, boundary_parts_residual, boundary_side, BoundaryParts, BoundarySide, LawsonQuad};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::s3core::frame;
use crate::s3core::{GreatCircle, GreatSphere, Isometry4, PiRational, PointS3, SphericalTetrahedron};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LatticeError {
    #[error("unsupported parameters m = {m}, k = {k} (need m ≥ 3, k ≥ 2)")]
    UnsupportedParameters { m: i64, k: i64 },
    #[error("invalid cell index: {0}")]
    InvalidIndex(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeParams {
    m: u32,
    k: u32,
}

impl LatticeParams {
    pub fn new(m: i64, k: i64) -> Result<Self, LatticeError> {
        if m < 3 || k < 2 || m > 1 << 20 || k > 1 << 20 {
            return Err(LatticeError::UnsupportedParameters { m, k });
        }
        Ok(LatticeParams {
            m: m as u32,
            k: k as u32,
        })
    }

    pub fn m(&self) -> i64 {
        self.m as i64
    }

    pub fn k(&self) -> i64 {
        self.k as i64
    }

    /// `sᵢ = iπ/m` for the doubled index `i2`.
    pub fn s_lower(&self, i2: i64) -> PiRational {
        PiRational::new(i2, 2 * self.m()).reduce_two_pi()
    }

    /// `sʲ = jπ/k` for the doubled index `j2`.
    pub fn s_upper(&self, j2: i64) -> PiRational {
        PiRational::new(j2, 2 * self.k()).reduce_two_pi()
    }
}

/// The four tessellations by tetrahedra `Ωᵢʲ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `i, j ∈ ℤ`.
    Omega,
    /// `i, j ∈ ½ + ℤ`.
    OmegaShifted,
    /// `i, j ∈ ℤ`, `i + j` even.
    OmegaEven,
    /// `i, j ∈ ℤ`, `i + j` odd.
    OmegaOdd,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::Omega, Family::OmegaShifted, Family::OmegaEven, Family::OmegaOdd];

    fn admits(&self, i2: i64, j2: i64) -> bool {
        let integral = i2 % 2 == 0 && j2 % 2 == 0;
        match self {
            Family::Omega => integral,
            Family::OmegaShifted => i2.rem_euclid(2) == 1 && j2.rem_euclid(2) == 1,
            Family::OmegaEven => integral && ((i2 + j2) / 2).rem_euclid(2) == 0,
            Family::OmegaOdd => integral && ((i2 + j2) / 2).rem_euclid(2) == 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Omega => "omega",
            Family::OmegaShifted => "omega_shifted",
            Family::OmegaEven => "omega_even",
            Family::OmegaOdd => "omega_odd",
        }
    }
}

/// A cell `Ωᵢʲ` of one of the tessellations, with doubled indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellIndex {
    pub family: Family,
    pub i2: i64,
    pub j2: i64,
}

impl CellIndex {
    pub fn new(params: &LatticeParams, family: Family, i2: i64, j2: i64) -> Result<Self, LatticeError> {
        if !family.admits(i2, j2) {
            return Err(LatticeError::InvalidIndex(format!(
                "(i, j) = ({}/2, {}/2) violates the parity of {}",
                i2,
                j2,
                family.name()
            )));
        }
        Ok(CellIndex {
            family,
            i2: i2.rem_euclid(4 * params.m()),
            j2: j2.rem_euclid(4 * params.k()),
        })
    }

    /// `Ωᵢʲ` with integer `i, j`.
    pub fn omega(params: &LatticeParams, i: i64, j: i64) -> Self {
        Self::new(params, Family::Omega, 2 * i, 2 * j).expect("integer indices")
    }
}

/// Which tetrahedron of the `(i, j)` family of definitions is meant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Variant {
    /// `Ωᵢʲ = ⟨t_{i−½} t_{i+½} t^{j−½} t^{j+½}⟩`.
    Full,
    /// `Ω_{i±}^{j±} = ⟨tᵢ t_{i±½} tʲ t^{j±½}⟩`; the flags are the two signs (`true` = `+`).
    Quarter(bool, bool),
    /// `Ω_{i±}^j = ⟨tᵢ t_{i±½} t^{j−½} t^{j+½}⟩`.
    HalfLower(bool),
    /// `Ωᵢ^{j±} = ⟨t_{i−½} t_{i+½} tʲ t^{j±½}⟩`.
    HalfUpper(bool),
}

impl Variant {
    pub const QUARTERS: [Variant; 4] = [
        Variant::Quarter(true, true),
        Variant::Quarter(true, false),
        Variant::Quarter(false, true),
        Variant::Quarter(false, false),
    ];
}

/// The lattice for fixed `(m, k)`, with the cells of all four families.
#[derive(Clone, Debug)]
pub struct Lattice {
    params: LatticeParams,
    t_lower: Vec<PointS3>,
    t_upper: Vec<PointS3>,
    cells: Vec<(CellIndex, SphericalTetrahedron)>,
}

impl Lattice {
    pub fn build(params: LatticeParams) -> Lattice {
        let (m, k) = (params.m(), params.k());
        let t_lower = (0..4 * m)
            .map(|i2| frame::p_lower(params.s_lower(i2).radians()))
            .collect();
        let t_upper = (0..4 * k)
            .map(|j2| frame::p_upper(params.s_upper(j2).radians()))
            .collect();
        let mut lat = Lattice {
            params,
            t_lower,
            t_upper,
            cells: Vec::new(),
        };
        let mut cells = Vec::new();
        for family in Family::ALL {
            for i2 in 0..4 * m {
                for j2 in 0..4 * k {
                    if let Ok(idx) = CellIndex::new(&params, family, i2, j2) {
                        let t = lat
                            .variant_tetra(i2, j2, Variant::Full)
                            .expect("lattice cells are non-degenerate");
                        cells.push((idx, t));
                    }
                }
            }
        }
        lat.cells = cells;
        lat
    }

    pub fn params(&self) -> &LatticeParams {
        &self.params
    }

    /// `tᵢ = p_{iπ/m}`, with `i = i2/2`.
    pub fn t_lower(&self, i2: i64) -> PointS3 {
        self.t_lower[i2.rem_euclid(4 * self.params.m()) as usize]
    }

    /// `tʲ = p^{jπ/k}`, with `j = j2/2`.
    pub fn t_upper(&self, j2: i64) -> PointS3 {
        self.t_upper[j2.rem_euclid(4 * self.params.k()) as usize]
    }

    /// `Σ_{iπ/m}`.
    pub fn sigma_lower(&self, i2: i64) -> GreatSphere {
        frame::sigma_lower(self.params.s_lower(i2).radians())
    }

    /// `Σ^{jπ/k}`.
    pub fn sigma_upper(&self, j2: i64) -> GreatSphere {
        frame::sigma_upper(self.params.s_upper(j2).radians())
    }

    /// `C_{iπ/m}^{jπ/k} = S(tᵢ, tʲ)`, oriented from `tᵢ` to `tʲ`.
    pub fn circle(&self, i2: i64, j2: i64) -> GreatCircle {
        GreatCircle::new(self.t_lower(i2), self.t_upper(j2)).expect("tᵢ ⟂ tʲ")
    }

    pub fn cells(&self, family: Family) -> impl Iterator<Item = &(CellIndex, SphericalTetrahedron)> {
        self.cells.iter().filter(move |(idx, _)| idx.family == family)
    }

    pub fn cell_count(&self, family: Family) -> usize {
        self.cells(family).count()
    }

    pub fn tetra(&self, idx: &CellIndex) -> &SphericalTetrahedron {
        let pos = self
            .cells
            .binary_search_by(|(c, _)| c.cmp(idx))
            .expect("indices from CellIndex::new are always present");
        &self.cells[pos].1
    }

    /// Any of the tetrahedra attached to `(i, j) ∈ (½ℤ)²`.
    pub fn variant_tetra(&self, i2: i64, j2: i64, variant: Variant) -> Result<SphericalTetrahedron, LatticeError> {
        let lo = |d: i64| self.t_lower(i2 + d);
        let up = |d: i64| self.t_upper(j2 + d);
        let sign = |plus: bool| if plus { 1 } else { -1 };
        let v = match variant {
            Variant::Full => [lo(-1), lo(1), up(-1), up(1)],
            Variant::Quarter(a, b) => [lo(0), lo(sign(a)), up(0), up(sign(b))],
            Variant::HalfLower(a) => [lo(0), lo(sign(a)), up(-1), up(1)],
            Variant::HalfUpper(b) => [lo(-1), lo(1), up(0), up(sign(b))],
        };
        SphericalTetrahedron::new(v).map_err(|e| LatticeError::InvalidIndex(e.to_string()))
    }

    /// The axis `S(tᵢ, tʲ)` of the cell.
    pub fn axis(&self, idx: &CellIndex) -> GreatCircle {
        self.circle(idx.i2, idx.j2)
    }

    /// `{I, R_{Σ_{iπ/m}}, R_{Σ^{jπ/k}}, R_{C_{iπ/m}^{jπ/k}}}`.
    pub fn cell_symmetries(&self, idx: &CellIndex) -> [Isometry4; 4] {
        [
            Isometry4::identity(),
            self.sigma_lower(idx.i2).reflection(),
            self.sigma_upper(idx.j2).reflection(),
            self.axis(idx).reflection(),
        ]
    }

    /// `{I, R_{axis}}`.
    pub fn cell_axis_symmetries(&self, idx: &CellIndex) -> [Isometry4; 2] {
        [Isometry4::identity(), self.axis(idx).reflection()]
    }

    /// All cells of `family` containing `p` (closed cells).
    pub fn locate(&self, p: &PointS3, family: Family) -> Vec<CellIndex> {
        self.cells(family)
            .filter(|(_, t)| t.contains(p))
            .map(|(idx, _)| *idx)
            .collect()
    }

    /// `𝐂_Q`: the `km` circles `S(tᵢ, tʲ)` with `i, j ∈ ½ + ℤ`, one per point set.
    pub fn circles_q(&self) -> Vec<GreatCircle> {
        let (m, k) = (self.params.m(), self.params.k());
        (0..m)
            .flat_map(|i| (0..k).map(move |j| (2 * i + 1, 2 * j + 1)))
            .map(|(i2, j2)| self.circle(i2, j2))
            .collect()
    }

    /// `𝐂_axes`: the `km` circles `S(tᵢ, tʲ)` with `i, j ∈ ℤ`.
    pub fn circles_axes(&self) -> Vec<GreatCircle> {
        let (m, k) = (self.params.m(), self.params.k());
        (0..m)
            .flat_map(|i| (0..k).map(move |j| (2 * i, 2 * j)))
            .map(|(i2, j2)| self.circle(i2, j2))
            .collect()
    }

    /// `𝚺`: `Σ^{jπ/k}` for `j = 0..k` followed by `Σ_{iπ/m}` for `i = 0..m`.
    pub fn spheres(&self) -> Vec<GreatSphere> {
        let (m, k) = (self.params.m(), self.params.k());
        (0..k)
            .map(|j| self.sigma_upper(2 * j))
            .chain((0..m).map(|i| self.sigma_lower(2 * i)))
            .collect()
    }

    pub fn document(&self) -> LatticeDocument {
        let (m, k) = (self.params.m(), self.params.k());
        let point = |angle: PiRational, p: PointS3| LatticePoint { angle, point: p };
        LatticeDocument {
            m,
            k,
            t_lower: (0..4 * m)
                .map(|i2| point(self.params.s_lower(i2), self.t_lower(i2)))
                .collect(),
            t_upper: (0..4 * k)
                .map(|j2| point(self.params.s_upper(j2), self.t_upper(j2)))
                .collect(),
            spheres_upper: (0..k)
                .map(|j| SphereRecord {
                    angle: self.params.s_upper(2 * j),
                    normal: (*self.sigma_upper(2 * j).normal()).into(),
                })
                .collect(),
            spheres_lower: (0..m)
                .map(|i| SphereRecord {
                    angle: self.params.s_lower(2 * i),
                    normal: (*self.sigma_lower(2 * i).normal()).into(),
                })
                .collect(),
            circles_q: circle_records(self, 1),
            circles_axes: circle_records(self, 0),
            cells: self
                .cells
                .iter()
                .map(|(idx, t)| CellRecord {
                    family: idx.family,
                    i: PiRational::new(idx.i2, 2),
                    j: PiRational::new(idx.j2, 2),
                    vertices: *t.vertices(),
                })
                .collect(),
        }
    }
}

fn circle_records(lat: &Lattice, offset: i64) -> Vec<CircleRecord> {
    let (m, k) = (lat.params.m(), lat.params.k());
    let mut out = Vec::new();
    for i in 0..m {
        for j in 0..k {
            let (i2, j2) = (2 * i + offset, 2 * j + offset);
            let c = lat.circle(i2, j2);
            out.push(CircleRecord {
                lower_angle: lat.params.s_lower(i2),
                upper_angle: lat.params.s_upper(j2),
                basis: [*c.e1(), *c.e2()],
            });
        }
    }
    out
}

/// Serializable snapshot of the lattice. Angles are `[numerator, denominator]`
/// multiples of π; points are 4-tuples.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LatticeDocument {
    pub m: i64,
    pub k: i64,
    pub t_lower: Vec<LatticePoint>,
    pub t_upper: Vec<LatticePoint>,
    pub spheres_upper: Vec<SphereRecord>,
    pub spheres_lower: Vec<SphereRecord>,
    pub circles_q: Vec<CircleRecord>,
    pub circles_axes: Vec<CircleRecord>,
    pub cells: Vec<CellRecord>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LatticePoint {
    pub angle: PiRational,
    pub point: PointS3,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SphereRecord {
    pub angle: PiRational,
    pub normal: [f64; 4],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CircleRecord {
    pub lower_angle: PiRational,
    pub upper_angle: PiRational,
    pub basis: [PointS3; 2],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CellRecord {
    pub family: Family,
    /// Half-integer index as a rational.
    pub i: PiRational,
    pub j: PiRational,
    pub vertices: [PointS3; 4],
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn lat(m: i64, k: i64) -> Lattice {
        Lattice::build(LatticeParams::new(m, k).unwrap())
    }

    #[test]
    fn rejects_small_parameters() {
        assert!(LatticeParams::new(2, 2).is_err());
        assert!(LatticeParams::new(3, 1).is_err());
        assert!(LatticeParams::new(3, 2).is_ok());
    }

    #[test]
    fn counts() {
        for (m, k) in [(3, 2), (4, 3), (5, 5)] {
            let l = lat(m, k);
            let km = (k * m) as usize;
            assert_eq!(l.cell_count(Family::Omega), 4 * km);
            assert_eq!(l.cell_count(Family::OmegaShifted), 4 * km);
            assert_eq!(l.cell_count(Family::OmegaEven), 2 * km);
            assert_eq!(l.cell_count(Family::OmegaOdd), 2 * km);
            assert_eq!(l.circles_q().len(), km);
            assert_eq!(l.circles_axes().len(), km);
            assert_eq!(l.spheres().len(), (k + m) as usize);
        }
    }

    #[test]
    fn first_half_point_matches_coordinates() {
        for m in 3..8 {
            let l = lat(m, 2);
            let a = PI / (2 * m) as f64;
            let expected = [a.cos(), a.sin(), 0.0, 0.0];
            for (x, y) in l.t_lower(1).to_array().iter().zip(expected) {
                assert!((x - y).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn antipodal_alias() {
        let l = lat(5, 3);
        for i2 in 0..20 {
            assert!((l.t_lower(i2 + 10).coords() + l.t_lower(i2).coords()).norm() < 1e-15);
        }
        for j2 in 0..12 {
            assert!((l.t_upper(j2 + 6).coords() + l.t_upper(j2).coords()).norm() < 1e-15);
        }
    }

    #[test]
    fn omega_zero_and_quarter_vertices() {
        let l = lat(3, 2);
        let t = l.tetra(&CellIndex::omega(l.params(), 0, 0));
        let expected = [l.t_lower(-1), l.t_lower(1), l.t_upper(-1), l.t_upper(1)];
        assert_eq!(*t.vertices(), expected);
        let q = l.variant_tetra(0, 0, Variant::Quarter(true, true)).unwrap();
        assert_eq!(*q.vertices(), [l.t_lower(0), l.t_lower(1), l.t_upper(0), l.t_upper(1)]);
    }

    #[test]
    fn parity_is_enforced_and_indices_reduced() {
        let p = LatticeParams::new(3, 2).unwrap();
        assert!(CellIndex::new(&p, Family::Omega, 1, 0).is_err());
        assert!(CellIndex::new(&p, Family::OmegaShifted, 2, 1).is_err());
        assert!(CellIndex::new(&p, Family::OmegaEven, 2, 0).is_err());
        assert!(CellIndex::new(&p, Family::OmegaOdd, 2, 2).is_err());
        let c = CellIndex::new(&p, Family::Omega, -2, 10).unwrap();
        assert_eq!((c.i2, c.j2), (10, 2));
    }

    #[test]
    fn cells_are_invariant_under_their_symmetries() {
        for (m, k) in [(3, 2), (4, 4)] {
            let l = lat(m, k);
            for family in [Family::Omega, Family::OmegaShifted] {
                for (idx, t) in l.cells(family) {
                    for g in l.cell_symmetries(idx) {
                        for v in t.vertices() {
                            let w = g.apply(v);
                            assert!(t.vertices().iter().any(|u| u.chord(&w) < 1e-12), "{idx:?}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn locate_finds_the_cell_of_its_centroid() {
        let l = lat(4, 3);
        for family in Family::ALL {
            for (idx, t) in l.cells(family) {
                assert_eq!(l.locate(&t.centroid(), family), vec![*idx]);
            }
        }
    }

    #[test]
    fn vertex_on_c_is_shared_by_4k_cells() {
        for (m, k) in [(3, 2), (5, 3)] {
            let l = lat(m, k);
            let hits = l.locate(&l.t_lower(1), Family::Omega);
            // Oracle: Ωᵢʲ has t_{1/2} as a vertex iff i ∈ {0, 1}, for each of the 2k values of j.
            let mut expected: Vec<CellIndex> = (0..2 * k)
                .flat_map(|j| [0, 1].map(|i| CellIndex::omega(l.params(), i, j)))
                .collect();
            expected.sort();
            assert_eq!(hits, expected);
        }
    }

    #[test]
    fn document_round_trips() {
        let l = lat(3, 2);
        let doc = l.document();
        let s = serde_json::to_string(&doc).unwrap();
        let back: LatticeDocument = serde_json::from_str(&s).unwrap();
        assert_eq!(back.cells.len(), doc.cells.len());
        assert_eq!(back.t_lower[1].angle, PiRational::new(1, 6));
        assert!(back.cells[0].vertices[0].chord(&doc.cells[0].vertices[0]) < 1e-15);
    }
}
