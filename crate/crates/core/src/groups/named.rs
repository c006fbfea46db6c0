use serde::Serialize;

use crate::lattice::{CellIndex, Family, Lattice};
use crate::s3core::{Isometry4, Mat4};

use super::{FiniteGroup, GroupError};

/// The symmetry groups generated by the lattice collections.
#[derive(Clone, Debug)]
pub struct NamedGroups {
    /// Generated by the reflections in the spheres of `𝚺`.
    pub sigma: FiniteGroup,
    /// Generated by the reflections in the circles of `𝐂_Q`.
    pub circles_q: FiniteGroup,
    /// Generated by the reflections in the circles of `𝐂_axes`.
    pub circles_axes: FiniteGroup,
    /// Generated by the reflections in all circles of `𝐂`.
    pub circles: FiniteGroup,
    /// Generated by `R_{C'}` for `C' ∈ 𝐂_axes` and `R_{C'} R_Σ` for `C' ∈ 𝐂_Q`, `Σ ∈ 𝚺`.
    pub orientation: FiniteGroup,
    /// Closure of the sphere and circle reflections.
    pub full: FiniteGroup,
}

impl NamedGroups {
    pub fn all(&self) -> [(&'static str, &FiniteGroup); 6] {
        [
            ("sigma", &self.sigma),
            ("circles_q", &self.circles_q),
            ("circles_axes", &self.circles_axes),
            ("circles", &self.circles),
            ("orientation", &self.orientation),
            ("full", &self.full),
        ]
    }
}

/// Default closure cap, `160·k·m`.
pub fn default_cap(lat: &Lattice) -> usize {
    160 * (lat.params().m() * lat.params().k()) as usize
}

pub fn build_named_groups(lat: &Lattice, cap: usize) -> Result<NamedGroups, GroupError> {
    let spheres: Vec<Isometry4> = lat.spheres().iter().map(|s| s.reflection()).collect();
    let cq: Vec<Isometry4> = lat.circles_q().iter().map(|c| c.reflection()).collect();
    let ca: Vec<Isometry4> = lat.circles_axes().iter().map(|c| c.reflection()).collect();
    let circles: Vec<Isometry4> = cq.iter().chain(&ca).copied().collect();
    let mut orient = ca.clone();
    for c in &cq {
        for s in &spheres {
            orient.push(c.compose(s));
        }
    }
    let both: Vec<Isometry4> = spheres.iter().chain(&circles).copied().collect();
    Ok(NamedGroups {
        sigma: FiniteGroup::close(&spheres, cap)?,
        circles_q: FiniteGroup::close(&cq, cap)?,
        circles_axes: FiniteGroup::close(&ca, cap)?,
        circles: FiniteGroup::close(&circles, cap)?,
        orientation: FiniteGroup::close(&orient, cap)?,
        full: FiniteGroup::close(&both, cap)?,
    })
}

/// `(x₁, x₂, x₃, x₄) ↦ (x₃, x₄, x₁, x₂)`, exchanging `C` and `C⊥`.
pub fn exchange_element() -> Isometry4 {
    let mut m = Mat4::zeros();
    m[(0, 2)] = 1.0;
    m[(1, 3)] = 1.0;
    m[(2, 0)] = 1.0;
    m[(3, 1)] = 1.0;
    Isometry4::new(m).expect("permutation matrix")
}

/// Orders and subgroup relations of the named groups.
#[derive(Clone, Debug, Serialize)]
pub struct GroupCertificate {
    pub m: i64,
    pub k: i64,
    pub orders: Vec<(String, usize)>,
    pub expected_orders: Vec<(String, usize)>,
    pub q_axes_intersection_order: usize,
    /// `𝒢^Σ ∩ 𝒢^C`, `𝒢^Σ ∩ 𝒢^{M+}`, `𝒢^C ∩ 𝒢^{M+}` all equal `𝒢^{C_axes}`.
    pub pairwise_intersections_are_axes: bool,
    /// Any two of `𝒢^Σ`, `𝒢^C`, `𝒢^{M+}` generate `𝒢`.
    pub pairs_generate_full: bool,
    /// `𝒢^C` is exactly the determinant-one part of `𝒢`.
    pub circles_are_rotations: bool,
    /// `𝒢^{C_Q}` and `𝒢^{C_axes}` lie in `𝒢^C`; the three index-2 subgroups lie in `𝒢`.
    pub subgroups_nested: bool,
    /// Stabilizer order of `Ω₀⁰` in `𝒢`, and in `⟨𝒢, exchange⟩` when `m = k`.
    pub cell_stabilizer_order: usize,
    pub extended_order: Option<usize>,
    pub extended_cell_stabilizer_order: Option<usize>,
}

impl GroupCertificate {
    pub fn passed(&self) -> bool {
        let orders_ok = self.orders == self.expected_orders;
        let km = (self.m * self.k) as usize;
        let ext_ok = match (self.extended_order, self.extended_cell_stabilizer_order) {
            (None, None) => self.m != self.k,
            (Some(o), Some(s)) => self.m == self.k && o == 16 * km && s == 8,
            _ => false,
        };
        orders_ok
            && self.q_axes_intersection_order == km
            && self.pairwise_intersections_are_axes
            && self.pairs_generate_full
            && self.circles_are_rotations
            && self.subgroups_nested
            && self.cell_stabilizer_order == 4
            && ext_ok
    }
}

pub fn certify(lat: &Lattice, groups: &NamedGroups, cap: usize) -> Result<GroupCertificate, GroupError> {
    let (m, k) = (lat.params().m(), lat.params().k());
    let km = (m * k) as usize;
    let orders = groups.all().iter().map(|(n, g)| (n.to_string(), g.order())).collect();
    let expected_orders = [
        ("sigma", 4 * km),
        ("circles_q", 2 * km),
        ("circles_axes", 2 * km),
        ("circles", 4 * km),
        ("orientation", 4 * km),
        ("full", 8 * km),
    ]
    .iter()
    .map(|(n, o)| (n.to_string(), *o))
    .collect();

    let axes = &groups.circles_axes;
    let pairwise_intersections_are_axes = [
        (&groups.sigma, &groups.circles),
        (&groups.sigma, &groups.orientation),
        (&groups.circles, &groups.orientation),
    ]
    .iter()
    .all(|(a, b)| a.intersection(b).same_elements(axes));

    let generated = |a: &FiniteGroup, b: &FiniteGroup| -> Result<bool, GroupError> {
        let gens: Vec<Isometry4> = a.elements().iter().chain(b.elements()).copied().collect();
        Ok(FiniteGroup::close(&gens, cap)?.same_elements(&groups.full))
    };
    let pairs_generate_full = generated(&groups.sigma, &groups.circles)?
        && generated(&groups.sigma, &groups.orientation)?
        && generated(&groups.circles, &groups.orientation)?;

    let circles_are_rotations = groups
        .full
        .elements()
        .iter()
        .all(|g| g.is_rotation() == groups.circles.contains(g));

    let subgroups_nested = groups.circles_q.is_subgroup_of(&groups.circles)
        && axes.is_subgroup_of(&groups.circles)
        && [&groups.sigma, &groups.circles, &groups.orientation]
            .iter()
            .all(|g| g.is_subgroup_of(&groups.full));

    let cell = lat.tetra(&CellIndex::omega(lat.params(), 0, 0));
    let cell_stabilizer_order = groups.full.stabilizer(cell.vertices(), 1e-9).order();
    let (extended_order, extended_cell_stabilizer_order) = if m == k {
        let gens: Vec<Isometry4> = groups
            .full
            .elements()
            .iter()
            .copied()
            .chain([exchange_element()])
            .collect();
        let ext = FiniteGroup::close(&gens, cap)?;
        (Some(ext.order()), Some(ext.stabilizer(cell.vertices(), 1e-9).order()))
    } else {
        (None, None)
    };

    Ok(GroupCertificate {
        m,
        k,
        orders,
        expected_orders,
        q_axes_intersection_order: groups.circles_q.intersection(axes).order(),
        pairwise_intersections_are_axes,
        pairs_generate_full,
        circles_are_rotations,
        subgroups_nested,
        cell_stabilizer_order,
        extended_order,
        extended_cell_stabilizer_order,
    })
}

/// Stabilizer of a cell of `Ω̲` inside `𝒢` should be `Ĝ = {I, R_axis}`.
pub fn shifted_cell_stabilizer(lat: &Lattice, full: &FiniteGroup) -> (usize, bool) {
    let idx = lat.cells(Family::OmegaShifted).next().expect("non-empty family").0;
    let stab = full.stabilizer(lat.tetra(&idx).vertices(), 1e-9);
    let expected = lat.cell_axis_symmetries(&idx);
    let matches = stab.order() == 2 && expected.iter().all(|g| stab.contains(g));
    (stab.order(), matches)
}
