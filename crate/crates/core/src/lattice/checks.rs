//! Whole-lattice properties: coverage, cell metrics, unions of the collections.

use std::collections::BTreeSet;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::Rng;
use serde::Serialize;

use crate::s3core::{GreatCircle, PointS3, EDGES};

use super::boundary::boundary_parts;
use super::{CellIndex, Family, Lattice};

/// Cone coefficient above which a point counts as interior to a cell.
pub const INTERIOR_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Default, Serialize)]
pub struct CoverageReport {
    pub family: Option<Family>,
    pub samples: usize,
    /// Points in no closed cell.
    pub uncovered: usize,
    /// Points in the interior of more than one cell.
    pub overlapping: usize,
    /// Points in several closed cells without being on a boundary.
    pub interior_multiplicity: usize,
    /// Disagreements with the cell predicted from the angular coordinates.
    pub oracle_mismatch: usize,
}

impl CoverageReport {
    pub fn passed(&self) -> bool {
        self.uncovered == 0 && self.overlapping == 0 && self.interior_multiplicity == 0 && self.oracle_mismatch == 0
    }
}

/// Cell of `Ω` or `Ω̲` predicted from the polar angles of the `C` and `C⊥`
/// components: `Ωᵢʲ` covers the angular sector `|a − iπ/m| ≤ π/2m`,
/// `|b − jπ/k| ≤ π/2k`.
fn angular_cell(lat: &Lattice, family: Family, p: &PointS3) -> Option<CellIndex> {
    let x = p.coords();
    let (m, k) = (lat.params().m() as f64, lat.params().k() as f64);
    let a = x[1].atan2(x[0]).rem_euclid(TAU);
    let b = x[3].atan2(x[2]).rem_euclid(TAU);
    let (i2, j2) = match family {
        Family::Omega => (2 * (a * m / PI).round() as i64, 2 * (b * k / PI).round() as i64),
        Family::OmegaShifted => (2 * (a * m / PI).floor() as i64 + 1, 2 * (b * k / PI).floor() as i64 + 1),
        _ => return None,
    };
    CellIndex::new(lat.params(), family, i2, j2).ok()
}

pub fn coverage<R: Rng + ?Sized>(lat: &Lattice, family: Family, samples: usize, rng: &mut R) -> CoverageReport {
    let mut report = CoverageReport {
        family: Some(family),
        samples,
        ..Default::default()
    };
    for _ in 0..samples {
        let p = PointS3::random(rng);
        let coeffs: Vec<(CellIndex, f64)> = lat
            .cells(family)
            .map(|(idx, t)| (*idx, t.membership(&p).min_coeff()))
            .filter(|(_, c)| *c >= -crate::s3core::MEMBERSHIP_TOL)
            .collect();
        let strong = coeffs.iter().filter(|(_, c)| *c >= INTERIOR_TOL).count();
        if coeffs.is_empty() {
            report.uncovered += 1;
        }
        if strong > 1 {
            report.overlapping += 1;
        }
        if coeffs.len() > 1 && coeffs.iter().all(|(_, c)| *c >= INTERIOR_TOL) {
            report.interior_multiplicity += 1;
        }
        if let Some(expected) = angular_cell(lat, family, &p) {
            if strong == 1 && !coeffs.iter().any(|(idx, c)| *idx == expected && *c >= INTERIOR_TOL) {
                report.oracle_mismatch += 1;
            }
        }
    }
    report
}

/// `Ω_e` and `Ω_o` are disjoint and together give the cells of `Ω`.
pub fn even_odd_partition(lat: &Lattice) -> bool {
    let key = |f: Family| -> BTreeSet<(i64, i64)> { lat.cells(f).map(|(c, _)| (c.i2, c.j2)).collect() };
    let (all, even, odd) = (key(Family::Omega), key(Family::OmegaEven), key(Family::OmegaOdd));
    even.is_disjoint(&odd) && even.union(&odd).cloned().collect::<BTreeSet<_>>() == all
}

/// Largest deviation of edge lengths and dihedral angles from
/// `(π/m, π/k)` on the `C` edge, `(π/k, π/m)` on the `C⊥` edge and `(π/2, π/2)` elsewhere,
/// over every cell of `Ω` and `Ω̲`.
pub fn cell_metrics_residual(lat: &Lattice) -> f64 {
    let (m, k) = (lat.params().m() as f64, lat.params().k() as f64);
    let mut worst: f64 = 0.0;
    for family in [Family::Omega, Family::OmegaShifted] {
        for (_, t) in lat.cells(family) {
            for (e, &(a, b)) in EDGES.iter().enumerate() {
                let (len, dihedral) = match (a, b) {
                    (0, 1) => (PI / m, PI / k),
                    (2, 3) => (PI / k, PI / m),
                    _ => (FRAC_PI_2, FRAC_PI_2),
                };
                worst = worst
                    .max((t.edge_length(e) - len).abs())
                    .max((t.dihedral_angle(e) - dihedral).abs());
            }
        }
    }
    worst
}

fn distance_to_circles(circles: &[GreatCircle], p: &PointS3) -> f64 {
    circles
        .iter()
        .map(|c| c.plane_distance(p.coords()))
        .fold(f64::INFINITY, f64::min)
}

/// Residuals of `⋃𝐂_Q = ⋃_{i,j∈ℤ} Qᵢʲ` and `⋃𝐂_axes = (⋃Σ^{jπ/k}) ∩ (⋃Σ_{iπ/m})`,
/// each tested in both directions on `samples` points.
pub fn collection_union_residuals<R: Rng + ?Sized>(lat: &Lattice, samples: usize, rng: &mut R) -> [f64; 2] {
    let (m, k) = (lat.params().m(), lat.params().k());
    let cq = lat.circles_q();
    let ca = lat.circles_axes();
    let quads: Vec<_> = (0..2 * m)
        .flat_map(|i| (0..2 * k).map(move |j| (i, j)))
        .map(|(i, j)| boundary_parts(lat, &CellIndex::omega(lat.params(), i, j)).quad)
        .collect();
    let near_quad = |p: &PointS3| quads.iter().map(|q| q.distance(p)).fold(f64::INFINITY, f64::min);
    let uppers: Vec<_> = (0..k).map(|j| lat.sigma_upper(2 * j)).collect();
    let lowers: Vec<_> = (0..m).map(|i| lat.sigma_lower(2 * i)).collect();
    let near_spheres = |p: &PointS3| {
        let d = |s: &crate::s3core::GreatSphere| s.signed(p.coords()).abs();
        let u = uppers.iter().map(d).fold(f64::INFINITY, f64::min);
        let l = lowers.iter().map(d).fold(f64::INFINITY, f64::min);
        u.max(l)
    };

    let mut quad_res: f64 = 0.0;
    let mut axes_res: f64 = 0.0;
    for _ in 0..samples {
        let c = &cq[rng.random_range(0..cq.len())];
        quad_res = quad_res.max(near_quad(&c.point_at(TAU * rng.random::<f64>())));
        let q = &quads[rng.random_range(0..quads.len())];
        quad_res = quad_res.max(distance_to_circles(&cq, &q.point_at(4.0 * rng.random::<f64>())));

        let a = &ca[rng.random_range(0..ca.len())];
        axes_res = axes_res.max(near_spheres(&a.point_at(TAU * rng.random::<f64>())));
        let su = &uppers[rng.random_range(0..uppers.len())];
        let sl = &lowers[rng.random_range(0..lowers.len())];
        let meet = su.intersect(sl).expect("Σ^φ and Σ_ψ are never equal");
        axes_res = axes_res.max(distance_to_circles(&ca, &meet.point_at(TAU * rng.random::<f64>())));
    }
    [quad_res, axes_res]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::LatticeParams;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn coverage_is_exact_for_omega_and_shifted() {
        for (m, k) in [(3, 2), (4, 5)] {
            let l = Lattice::build(LatticeParams::new(m, k).unwrap());
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            for family in [Family::Omega, Family::OmegaShifted] {
                let r = coverage(&l, family, 5000, &mut rng);
                assert!(r.passed(), "{r:?}");
            }
            assert!(even_odd_partition(&l));
        }
    }

    #[test]
    fn angular_oracle_agrees_on_centroids() {
        let l = Lattice::build(LatticeParams::new(5, 3).unwrap());
        for family in [Family::Omega, Family::OmegaShifted] {
            for (idx, t) in l.cells(family) {
                assert_eq!(angular_cell(&l, family, &t.centroid()), Some(*idx));
            }
        }
    }

    #[test]
    fn metrics_hold_for_all_cells() {
        for (m, k) in [(3, 2), (4, 3), (6, 6)] {
            let l = Lattice::build(LatticeParams::new(m, k).unwrap());
            assert!(cell_metrics_residual(&l) < 1e-12);
        }
    }

    #[test]
    fn omega_zero_metrics_for_three_two() {
        let l = Lattice::build(LatticeParams::new(3, 2).unwrap());
        let t = l.tetra(&CellIndex::omega(l.params(), 0, 0));
        assert!((t.edge_length(0) - PI / 3.0).abs() < 1e-12);
        assert!((t.dihedral_angle(0) - FRAC_PI_2).abs() < 1e-12);
        assert!((t.edge_length(5) - FRAC_PI_2).abs() < 1e-12);
        assert!((t.dihedral_angle(5) - PI / 3.0).abs() < 1e-12);
    }

    #[test]
    fn collection_unions() {
        let l = Lattice::build(LatticeParams::new(4, 3).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let [q, a] = collection_union_residuals(&l, 1000, &mut rng);
        assert!(q < 1e-10 && a < 1e-10, "{q} {a}");
    }
}
