use rand::Rng;
use serde::Serialize;

use crate::lattice::checks::INTERIOR_TOL;
use crate::lattice::{CellIndex, Family, Lattice};
use crate::s3core::{Isometry4, PointS3, MEMBERSHIP_TOL};

use super::{FiniteGroup, GroupError};

/// Permutation action of a group on the cells of one tessellation.
#[derive(Clone, Debug)]
pub struct GroupAction {
    pub family: Family,
    pub cells: Vec<CellIndex>,
    /// `perm[g][c]` is the position of the image of cell `c` under element `g`.
    pub perm: Vec<Vec<u32>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ActionSummary {
    pub family: Family,
    pub cells: usize,
    pub transitive: bool,
    pub simply_transitive: bool,
    pub homomorphism: bool,
    pub stabilizer_orders: Vec<usize>,
}

fn same_vertex_set(a: &[PointS3; 4], b: &[PointS3; 4]) -> bool {
    a.iter().all(|p| b.iter().any(|q| p.chord(q) < 1e-9))
}

/// Builds the permutation representation, failing if some element moves a
/// cell off the family.
pub fn act(group: &FiniteGroup, lat: &Lattice, family: Family) -> Result<GroupAction, GroupError> {
    act_on_elements(group.elements(), lat, family)
}

fn act_on_elements(elements: &[Isometry4], lat: &Lattice, family: Family) -> Result<GroupAction, GroupError> {
    let cells: Vec<(CellIndex, [PointS3; 4], PointS3)> = lat
        .cells(family)
        .map(|(idx, t)| (*idx, *t.vertices(), t.centroid()))
        .collect();
    let mut perm = Vec::with_capacity(elements.len());
    for g in elements {
        let mut row = Vec::with_capacity(cells.len());
        for (idx, verts, centroid) in &cells {
            let image = verts.map(|v| g.apply(&v));
            let target = lat.locate(&g.apply(centroid), family);
            let pos = target
                .first()
                .filter(|t| same_vertex_set(&image, lat.tetra(t).vertices()))
                .and_then(|t| cells.iter().position(|(c, _, _)| c == t))
                .ok_or_else(|| {
                    GroupError::NotAnAction(format!("image of {idx:?} is not a cell of {}", family.name()))
                })?;
            row.push(pos as u32);
        }
        perm.push(row);
    }
    Ok(GroupAction {
        family,
        cells: cells.into_iter().map(|(c, _, _)| c).collect(),
        perm,
    })
}

impl GroupAction {
    /// Orbit of cell `c` as positions.
    pub fn orbit(&self, c: usize) -> Vec<usize> {
        let mut seen = vec![false; self.cells.len()];
        for row in &self.perm {
            seen[row[c] as usize] = true;
        }
        (0..self.cells.len()).filter(|&i| seen[i]).collect()
    }

    pub fn stabilizer_order(&self, c: usize) -> usize {
        self.perm.iter().filter(|row| row[c] as usize == c).count()
    }

    /// `perm(gh) = perm(g) ∘ perm(h)`, on all pairs for small groups and a
    /// deterministic stride of pairs otherwise.
    pub fn is_homomorphism(&self, group: &FiniteGroup) -> bool {
        let n = group.order();
        let stride = (n * n / 40_000).max(1);
        (0..n * n).step_by(stride).all(|pair| {
            let (a, b) = (pair / n, pair % n);
            let ab = group.multiply(a, b);
            (0..self.cells.len()).all(|c| self.perm[ab][c] == self.perm[a][self.perm[b][c] as usize])
        })
    }

    pub fn summary(&self, group: &FiniteGroup) -> ActionSummary {
        let transitive = self.orbit(0).len() == self.cells.len();
        let stabilizer_orders: Vec<usize> = (0..self.cells.len()).map(|c| self.stabilizer_order(c)).collect();
        ActionSummary {
            family: self.family,
            cells: self.cells.len(),
            transitive,
            simply_transitive: transitive && stabilizer_orders.iter().all(|&s| s == 1),
            homomorphism: self.is_homomorphism(group),
            stabilizer_orders,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct HemisphereOrbitReport {
    pub points: usize,
    /// (point, cell) pairs where the orbit misses the closed cell.
    pub missed: usize,
    /// (point, cell) pairs where two orbit points lie in the interior of the cell.
    pub repeated: usize,
}

impl HemisphereOrbitReport {
    pub fn passed(&self) -> bool {
        self.missed == 0 && self.repeated == 0
    }
}

/// Every cell of `Ω̲` meets each `𝒢^Σ`-orbit exactly once; boundary points may
/// be counted in several closed cells but never twice in one interior.
pub fn hemisphere_orbit_check<R: Rng + ?Sized>(
    lat: &Lattice,
    sigma: &FiniteGroup,
    points: &[PointS3],
    random: usize,
    rng: &mut R,
) -> HemisphereOrbitReport {
    let mut report = HemisphereOrbitReport::default();
    let randoms: Vec<PointS3> = (0..random).map(|_| PointS3::random(rng)).collect();
    for p in points.iter().chain(&randoms) {
        report.points += 1;
        let orbit: Vec<PointS3> = sigma.elements().iter().map(|g| g.apply(p)).collect();
        for (_, t) in lat.cells(Family::OmegaShifted) {
            let coeffs: Vec<f64> = orbit.iter().map(|q| t.membership(q).min_coeff()).collect();
            let closed = coeffs.iter().filter(|&&c| c >= -MEMBERSHIP_TOL).count();
            let interior = coeffs.iter().filter(|&&c| c >= INTERIOR_TOL).count();
            if closed == 0 {
                report.missed += 1;
            }
            if interior > 1 {
                report.repeated += 1;
            }
        }
    }
    report
}
