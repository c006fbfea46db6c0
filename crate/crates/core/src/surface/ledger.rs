//! Angle sums of the pieces `M ∩ Ω̲ᵢʲ`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::lattice::{CellIndex, Family, Lattice};
use crate::plateau::{circle_hits, TriMeshS3};
use crate::s3core::{PointS3, Vec4, EDGES};

use super::SurfaceError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeKind {
    /// Both endpoints on `C`.
    C,
    /// Both endpoints on `C⊥`.
    CPerp,
    Mixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundaryCase {
    Quadrilateral,
    Pentagon,
    Other,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Crossing {
    pub edge: usize,
    pub kind: EdgeKind,
    pub point: [f64; 4],
    /// Dihedral angle of the cell at the edge.
    pub exact_angle: f64,
    /// Sum of the corner angles of the piece at the crossing vertex.
    pub measured_angle: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CellLedger {
    pub cell: CellIndex,
    pub euler_characteristic: i64,
    pub boundary_loops: usize,
    /// Twice the genus of the piece.
    pub g_tilde: i64,
    pub crossings: Vec<Crossing>,
    pub case: BoundaryCase,
    /// `Σ(π − θ)` with measured angles.
    pub angle_defect: f64,
    /// `(5 − 2g̃ − 2b̃ − 1/k − 1/m)π`.
    pub expected_defect: f64,
    pub exact_residual: f64,
    pub measured_residual: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LedgerReport {
    pub cells: Vec<CellLedger>,
    pub max_exact_residual: f64,
    pub max_measured_residual: f64,
}

impl LedgerReport {
    pub fn all_quadrilaterals(&self) -> bool {
        self.cells
            .iter()
            .all(|c| c.case == BoundaryCase::Quadrilateral && c.boundary_loops == 1 && c.g_tilde == 0)
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.all_quadrilaterals() && self.max_measured_residual < tol && self.max_exact_residual < tol
    }
}

fn edge_kind(a: &PointS3, b: &PointS3) -> EdgeKind {
    let on_c = |p: &PointS3| p.coords()[2].hypot(p.coords()[3]) < 1e-12;
    let on_cp = |p: &PointS3| p.coords()[0].hypot(p.coords()[1]) < 1e-12;
    if on_c(a) && on_c(b) {
        EdgeKind::C
    } else if on_cp(a) && on_cp(b) {
        EdgeKind::CPerp
    } else {
        EdgeKind::Mixed
    }
}

/// Angle at `p` of the geodesic triangle `p q r`.
fn corner_angle(p: &Vec4, q: &Vec4, r: &Vec4) -> f64 {
    let u = q - p * p.dot(q);
    let w = r - p * p.dot(r);
    let (uu, ww, uw) = (u.dot(&u), w.dot(&w), u.dot(&w));
    (uu * ww - uw * uw).max(0.0).sqrt().atan2(uw)
}

fn angle_at(piece: &TriMeshS3, v: u32) -> f64 {
    piece
        .triangles()
        .iter()
        .filter_map(|t| {
            let at = t.iter().position(|&x| x == v)?;
            let [p, q, r] = [t[at], t[(at + 1) % 3], t[(at + 2) % 3]].map(|i| *piece.vertex(i as usize).coords());
            Some(corner_angle(&p, &q, &r))
        })
        .sum()
}

/// One ledger line per cell of `Ω̲`.
pub fn ledger(mesh: &TriMeshS3, lat: &Lattice) -> Result<LedgerReport, SurfaceError> {
    let (m, k) = (lat.params().m() as f64, lat.params().k() as f64);
    let mut cells = Vec::new();
    for (idx, tet) in lat.cells(Family::OmegaShifted) {
        let normals: Vec<Vec4> = (0..4).map(|f| tet.face_normal(f)).collect();
        let piece = mesh.clip(&normals);
        let top = piece.topology();
        if !top.manifold {
            return Err(SurfaceError::Cut {
                cell: *idx,
                detail: "piece is not a manifold".into(),
            });
        }
        let b = top.boundary_components as i64;
        let g_tilde = 2 - top.euler_characteristic - b;
        let mut crossings = Vec::new();
        for (e, &(ia, ib)) in EDGES.iter().enumerate() {
            let (va, vb) = (tet.vertex(ia), tet.vertex(ib));
            let a1 = *va.coords();
            let a2 = (vb.coords() - a1 * a1.dot(vb.coords())).normalize();
            for (_, p) in circle_hits(&piece, &a1, &a2, 0.0, tet.edge_length(e)) {
                let (v, d) = piece
                    .vertices()
                    .iter()
                    .enumerate()
                    .map(|(i, q)| (i, q.chord(&p)))
                    .min_by(|x, y| x.1.total_cmp(&y.1))
                    .unwrap_or((0, f64::INFINITY));
                if d > 1e-7 {
                    return Err(SurfaceError::Cut {
                        cell: *idx,
                        detail: format!("crossing on edge {e} is not a vertex of the piece (distance {d:e})"),
                    });
                }
                crossings.push(Crossing {
                    edge: e,
                    kind: edge_kind(va, vb),
                    point: p.to_array(),
                    exact_angle: tet.dihedral_angle(e),
                    measured_angle: angle_at(&piece, v as u32),
                });
            }
        }
        let case = match (b, g_tilde, crossings.len()) {
            (1, 0, 4) => BoundaryCase::Quadrilateral,
            (1, 0, 5) => BoundaryCase::Pentagon,
            _ => BoundaryCase::Other,
        };
        let expected_defect = (5.0 - 2.0 * g_tilde as f64 - 2.0 * b as f64 - 1.0 / k - 1.0 / m) * PI;
        let exact: f64 = crossings.iter().map(|c| PI - c.exact_angle).sum();
        let angle_defect: f64 = crossings.iter().map(|c| PI - c.measured_angle).sum();
        cells.push(CellLedger {
            cell: *idx,
            euler_characteristic: top.euler_characteristic,
            boundary_loops: top.boundary_components,
            g_tilde,
            crossings,
            case,
            angle_defect,
            expected_defect,
            exact_residual: (exact - expected_defect).abs(),
            measured_residual: (angle_defect - expected_defect).abs(),
        });
    }
    Ok(LedgerReport {
        max_exact_residual: cells.iter().map(|c| c.exact_residual).fold(0.0, f64::max),
        max_measured_residual: cells.iter().map(|c| c.measured_residual).fold(0.0, f64::max),
        cells,
    })
}
