//! The individual checks of the verification suite.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::groups::{
    act, build_named_groups, certify, default_cap, hemisphere_orbit_check, shifted_cell_stabilizer, NamedGroups,
};
use crate::lattice::checks::{cell_metrics_residual, collection_union_residuals, coverage, even_odd_partition};
use crate::lattice::{
    axis_rotation_report, boundary_parts_residual, AxisRotationConfig, CellIndex, Family, Lattice, LatticeParams,
};
use crate::plateau::{
    disc_group, extract_curves, solve_disc, subdisc_checks, verify_graphical, DiscReport, SolverOptions, TriMeshS3,
};
use crate::s3core::checks::basic_geometry;
use crate::s3core::{
    frame, killing_eval, orbit_project, reflect, rotate_about, rotate_along, GreatCircle, Isometry4, PiRational,
    PointS3, Vec4,
};
use crate::surface::{self, assemble, axis_incidence, ClosedSurfaceMesh, SymmetryReport};

use super::config::RunConfig;
use super::Status;

/// Residual threshold of the disc mean-curvature check.
pub const DISC_RESIDUAL_TOL: f64 = 1e-3;
/// Boundary deviation threshold of the disc.
pub const BOUNDARY_TOL: f64 = 1e-10;
/// Threshold of the Gauss–Bonnet angle-sum residual.
pub const LEDGER_TOL: f64 = 5e-2 * PI;
pub const GEOMETRY_TOL: f64 = 1e-9;
pub const METRIC_TOL: f64 = 1e-12;
pub const COVERAGE_SAMPLES: usize = 100_000;
pub const GRAPH_ORBITS: usize = 512;
pub const UMBILIC_SAMPLES: usize = 1000;

pub(crate) struct Outcome {
    pub status: Status,
    pub residual: Option<f64>,
    pub witness: Value,
}

impl Outcome {
    fn judge(pass: bool, residual: Option<f64>, witness: Value) -> Outcome {
        Outcome {
            status: if pass { Status::Pass } else { Status::Fail },
            residual,
            witness,
        }
    }

    fn skip(reason: &str) -> Outcome {
        Outcome {
            status: Status::Skip { reason: reason.into() },
            residual: None,
            witness: Value::Null,
        }
    }

    pub(crate) fn error(message: String) -> Outcome {
        Outcome {
            status: Status::Fail,
            residual: None,
            witness: json!({ "error": message }),
        }
    }
}

pub(crate) struct Solved {
    pub mesh: TriMeshS3,
    pub report: DiscReport,
}

/// Shared artifacts, each computed once by whichever check needs it first.
pub(crate) struct Context {
    pub config: RunConfig,
    pub lat: Lattice,
    groups: OnceLock<Result<NamedGroups, String>>,
    fine: OnceLock<Result<Solved, String>>,
    coarse: OnceLock<Result<Solved, String>>,
    surface: OnceLock<Result<ClosedSurfaceMesh, String>>,
    coarse_surface: OnceLock<Result<ClosedSurfaceMesh, String>>,
    symmetry: OnceLock<Result<SymmetryReport, String>>,
}

impl Context {
    pub fn new(config: RunConfig) -> Result<Context, String> {
        let params = LatticeParams::new(config.m, config.k).map_err(|e| e.to_string())?;
        Ok(Context {
            config,
            lat: Lattice::build(params),
            groups: OnceLock::new(),
            fine: OnceLock::new(),
            coarse: OnceLock::new(),
            surface: OnceLock::new(),
            coarse_surface: OnceLock::new(),
            symmetry: OnceLock::new(),
        })
    }

    fn groups(&self) -> Result<&NamedGroups, String> {
        self.groups
            .get_or_init(|| build_named_groups(&self.lat, default_cap(&self.lat)).map_err(|e| e.to_string()))
            .as_ref()
            .map_err(Clone::clone)
    }

    fn solve(&self, level: u32) -> Result<Solved, String> {
        let opts = SolverOptions {
            level,
            grad_tol: self.config.tol_grad,
            sym_tol: self.config.tol_sym,
            ..Default::default()
        };
        let (mesh, report) = solve_disc(&self.lat, &opts).map_err(|e| e.to_string())?;
        Ok(Solved { mesh, report })
    }

    fn disc(&self) -> Result<&Solved, String> {
        self.fine
            .get_or_init(|| self.solve(self.config.level))
            .as_ref()
            .map_err(Clone::clone)
    }

    fn coarse_disc(&self) -> Result<&Solved, String> {
        self.coarse
            .get_or_init(|| self.solve(self.config.level - 1))
            .as_ref()
            .map_err(Clone::clone)
    }

    fn assemble(&self, disc: Result<&Solved, String>) -> Result<ClosedSurfaceMesh, String> {
        let g = self.groups()?;
        assemble(&self.lat, &disc?.mesh, &g.circles_q).map_err(|e| e.to_string())
    }

    fn surface(&self) -> Result<&ClosedSurfaceMesh, String> {
        self.surface
            .get_or_init(|| self.assemble(self.disc()))
            .as_ref()
            .map_err(Clone::clone)
    }

    fn coarse_surface(&self) -> Result<&ClosedSurfaceMesh, String> {
        self.coarse_surface
            .get_or_init(|| self.assemble(self.coarse_disc()))
            .as_ref()
            .map_err(Clone::clone)
    }

    fn symmetry(&self) -> Result<&SymmetryReport, String> {
        self.symmetry
            .get_or_init(|| Ok(surface::symmetry_check(&self.surface()?.mesh, &self.groups()?.full)))
            .as_ref()
            .map_err(Clone::clone)
    }
}

pub(crate) type CheckFn = fn(&Context, &mut ChaCha8Rng) -> Result<Outcome, String>;

fn random_vec(rng: &mut ChaCha8Rng) -> Vec4 {
    *PointS3::random(rng).coords()
}

/// Random orthonormal basis of R⁴.
fn random_frame(rng: &mut ChaCha8Rng) -> [Vec4; 4] {
    let mut basis: Vec<Vec4> = Vec::with_capacity(4);
    while basis.len() < 4 {
        let mut v = random_vec(rng);
        for u in &basis {
            v -= u * u.dot(&v);
        }
        if v.norm() > 1e-3 {
            basis.push(v.normalize());
        }
    }
    [basis[0], basis[1], basis[2], basis[3]]
}

fn random_circle(rng: &mut ChaCha8Rng) -> GreatCircle {
    let f = random_frame(rng);
    GreatCircle::new(PointS3::normalize(f[0]).unwrap(), PointS3::normalize(f[1]).unwrap()).expect("orthonormal pair")
}

fn random_angle(rng: &mut ChaCha8Rng) -> PiRational {
    let den = rng.random_range(1..=12);
    PiRational::new(rng.random_range(0..2 * den), den)
}

pub(crate) fn reflections(_: &Context, rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let mut worst: f64 = 0.0;
    for s in 0..64 {
        let dim = s % 5;
        let frame = random_frame(rng);
        let r = Isometry4::reflection(&frame[..dim]).map_err(|e| e.to_string())?;
        worst = worst
            .max(r.orthogonality_defect())
            .max(r.compose(&r).distance(&Isometry4::identity()));
        for (i, e) in frame.iter().enumerate() {
            let sign = if i < dim { 1.0 } else { -1.0 };
            worst = worst.max((r.apply_vec(e) - e * sign).amax());
        }
        let p = PointS3::random(rng);
        let q = reflect(&frame[..dim], &p).map_err(|e| e.to_string())?;
        worst = worst.max((q.coords() - r.apply(&p).coords()).amax());
    }
    Ok(Outcome::judge(
        worst < GEOMETRY_TOL,
        Some(worst),
        json!({ "samples": 64 }),
    ))
}

pub(crate) fn rotations_killing(_: &Context, rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let (mut exact, mut field): (f64, f64) = (0.0, 0.0);
    let h = 1e-5;
    for _ in 0..64 {
        let c = random_circle(rng);
        let perp = c.orthocomplement();
        let phi = rng.random_range(0.0..PI);
        let theta = rng.random_range(0.0..2.0 * PI);
        let rot = rotate_about(&c, phi);
        exact = exact
            .max(rot.apply(&c.point_at(theta)).chord(&c.point_at(theta)))
            .max(rot.apply(&perp.point_at(theta)).chord(&perp.point_at(theta + phi)))
            .max(
                rot.compose(&rotate_about(&c, 0.5))
                    .distance(&rotate_about(&c, phi + 0.5)),
            );
        let along = rotate_along(&c, phi);
        exact = exact
            .max(along.apply(&perp.point_at(theta)).chord(&perp.point_at(theta)))
            .max((along.apply(&c.point_at(theta)).distance(&c.point_at(theta)) - phi).abs());
        let x = PointS3::random(rng);
        let k = killing_eval(&c, &x);
        let fd = (rotate_about(&c, h).apply(&x).coords() - rotate_about(&c, -h).apply(&x).coords()) / (2.0 * h);
        field = field.max((k.dir - fd).amax());
        exact = exact
            .max(k.dir.dot(x.coords()).abs())
            .max(killing_eval(&c, &c.point_at(theta)).dir.amax());
    }
    Ok(Outcome::judge(
        exact < GEOMETRY_TOL && field < 1e-8,
        Some(exact.max(field)),
        json!({ "exact_residual": exact, "field_residual": field }),
    ))
}

pub(crate) fn orbit_projection(_: &Context, rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let mut worst: f64 = 0.0;
    for _ in 0..256 {
        let c = random_circle(rng);
        let pole = c.point_at(rng.random_range(0.0..2.0 * PI));
        let x = PointS3::random(rng);
        let y = orbit_project(&c, &pole, &x).map_err(|e| e.to_string())?;
        let (px, py) = (c.projector() * x.coords(), c.projector() * y.coords());
        let along = py.dot(pole.coords());
        // y lies in the closed hemisphere C⊥ ⋇ pole ...
        worst = worst.max((py - pole.coords() * along).amax()).max((-along).max(0.0));
        // ... on the orbit of x under the rotations along C.
        worst = worst
            .max(((x.coords() - px) - (y.coords() - py)).amax())
            .max((px.norm() - py.norm()).abs());
        let [a1, a2] = c.basis();
        let phi = a2.dot(&py).atan2(a1.dot(&py)) - a2.dot(&px).atan2(a1.dot(&px));
        worst = worst.max(rotate_along(&c, phi).apply(&x).chord(&y));
    }
    Ok(Outcome::judge(
        worst < GEOMETRY_TOL,
        Some(worst),
        json!({ "samples": 256 }),
    ))
}

pub(crate) fn circle_sphere_geometry(_: &Context, rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let mut worst: f64 = 0.0;
    let mut witness = Value::Null;
    for _ in 0..64 {
        let a = [
            random_angle(rng),
            random_angle(rng),
            random_angle(rng),
            random_angle(rng),
        ];
        let r = basic_geometry(a[0], a[1], a[2], a[3]);
        if r.max() > worst || witness.is_null() {
            worst = worst.max(r.max());
            witness = json!({ "angles": a.map(|x| x.to_string()), "items": r });
        }
    }
    Ok(Outcome::judge(
        worst < GEOMETRY_TOL,
        Some(worst),
        json!({ "pairs": 64, "worst": witness }),
    ))
}

pub(crate) fn lattice_points(ctx: &Context, _: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let lat = &ctx.lat;
    let (m, k) = (lat.params().m(), lat.params().k());
    let mut worst: f64 = 0.0;
    for i2 in 0..4 * m {
        let t = lat.t_lower(i2);
        let phi = i2 as f64 * PI / (2 * m) as f64;
        worst = worst
            .max(t.chord(&frame::p_lower(phi)))
            .max(lat.t_lower(i2 + 2 * m).chord(&t.antipode()))
            .max(lat.sigma_lower(i2).signed(t.coords()).abs())
            .max(lat.sigma_lower(i2).signed(&Vec4::new(0.0, 0.0, 1.0, 0.0)).abs())
            .max(lat.sigma_lower(i2).signed(&Vec4::new(0.0, 0.0, 0.0, 1.0)).abs());
    }
    for j2 in 0..4 * k {
        let t = lat.t_upper(j2);
        let phi = j2 as f64 * PI / (2 * k) as f64;
        worst = worst
            .max(t.chord(&frame::p_upper(phi)))
            .max(lat.t_upper(j2 + 2 * k).chord(&t.antipode()))
            .max(lat.sigma_upper(j2).signed(t.coords()).abs())
            .max(lat.sigma_upper(j2).signed(&Vec4::new(1.0, 0.0, 0.0, 0.0)).abs())
            .max(lat.sigma_upper(j2).signed(&Vec4::new(0.0, 1.0, 0.0, 0.0)).abs());
    }
    for i2 in 0..4 * m {
        for j2 in 0..4 * k {
            let c = lat.circle(i2, j2);
            worst = worst
                .max(c.plane_distance(lat.t_lower(i2).coords()))
                .max(c.plane_distance(lat.t_upper(j2).coords()));
        }
    }
    let counts = [lat.circles_q().len(), lat.circles_axes().len(), lat.spheres().len()];
    let counts_ok = counts == [(k * m) as usize, (k * m) as usize, (k + m) as usize];
    Ok(Outcome::judge(
        counts_ok && worst < METRIC_TOL,
        Some(worst),
        json!({ "circles_q": counts[0], "circles_axes": counts[1], "spheres": counts[2] }),
    ))
}

pub(crate) fn tessellation_coverage(ctx: &Context, rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let omega = coverage(&ctx.lat, Family::Omega, COVERAGE_SAMPLES, rng);
    let shifted = coverage(&ctx.lat, Family::OmegaShifted, COVERAGE_SAMPLES, rng);
    let partition = even_odd_partition(&ctx.lat);
    let counts: Vec<usize> = Family::ALL.iter().map(|&f| ctx.lat.cell_count(f)).collect();
    Ok(Outcome::judge(
        omega.passed() && shifted.passed() && partition,
        None,
        json!({ "omega": omega, "omega_shifted": shifted, "even_odd_partition": partition, "cell_counts": counts }),
    ))
}

pub(crate) fn cell_metrics(ctx: &Context, _: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let r = cell_metrics_residual(&ctx.lat);
    Ok(Outcome::judge(r < METRIC_TOL, Some(r), Value::Null))
}

pub(crate) fn boundary_parts(ctx: &Context, rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let cells: Vec<CellIndex> = ctx.lat.cells(Family::Omega).map(|(c, _)| *c).collect();
    let worst = cells
        .iter()
        .map(|c| boundary_parts_residual(&ctx.lat, c, 64, rng))
        .fold(0.0, f64::max);
    Ok(Outcome::judge(
        worst < 1e-10,
        Some(worst),
        json!({ "cells": cells.len() }),
    ))
}

pub(crate) fn collection_unions(ctx: &Context, rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let [q, a] = collection_union_residuals(&ctx.lat, 256, rng);
    Ok(Outcome::judge(
        q < 1e-10 && a < 1e-10,
        Some(q.max(a)),
        json!({ "circles_q": q, "circles_axes": a }),
    ))
}

pub(crate) fn axis_rotation_orbits(ctx: &Context, rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let config = AxisRotationConfig::default();
    let mut failed = Vec::new();
    let mut cells = 0;
    let mut windings = std::collections::BTreeSet::new();
    for (idx, _) in ctx.lat.cells(Family::Omega) {
        let r = axis_rotation_report(&ctx.lat, idx, &config, rng);
        cells += 1;
        windings.insert(r.winding);
        if !r.passed() || r.winding.abs() != 1 || r.orbits_checked != config.n_orbits {
            failed.push(json!({ "cell": idx, "winding": r.winding, "violations": r.violations }));
        }
    }
    Ok(Outcome::judge(
        failed.is_empty(),
        None,
        json!({ "cells": cells, "orbits_per_cell": config.n_orbits, "windings": windings, "failed": failed }),
    ))
}

pub(crate) fn hemisphere_orbits(ctx: &Context, rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let g = ctx.groups()?;
    let lat = &ctx.lat;
    let (m, k) = (lat.params().m(), lat.params().k());
    let special: Vec<PointS3> = (0..4 * m)
        .map(|i| lat.t_lower(i))
        .chain((0..4 * k).map(|j| lat.t_upper(j)))
        .collect();
    let r = hemisphere_orbit_check(lat, &g.sigma, &special, 2000, rng);
    Ok(Outcome::judge(r.passed(), None, json!(r)))
}

pub(crate) fn group_orders(ctx: &Context, _: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let g = ctx.groups()?;
    let cert = certify(&ctx.lat, g, default_cap(&ctx.lat)).map_err(|e| e.to_string())?;
    Ok(Outcome::judge(cert.passed(), None, json!(cert)))
}

pub(crate) fn group_actions(ctx: &Context, _: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let g = ctx.groups()?;
    let lat = &ctx.lat;
    let summary = |grp, family| act(grp, lat, family).map(|a| a.summary(grp)).map_err(|e| e.to_string());
    let sigma = summary(&g.sigma, Family::OmegaShifted)?;
    let cq = summary(&g.circles_q, Family::OmegaEven)?;
    let full = summary(&g.full, Family::Omega)?;
    let full_even = summary(&g.full, Family::OmegaEven)?;
    let full_odd = summary(&g.full, Family::OmegaOdd)?;
    let full_shifted = summary(&g.full, Family::OmegaShifted)?;
    let (stab_order, stab_matches) = shifted_cell_stabilizer(lat, &g.full);
    let pass = sigma.simply_transitive
        && cq.simply_transitive
        && full_even.transitive
        && full_odd.transitive
        && full.stabilizer_orders.iter().all(|&s| s == 4)
        && full_shifted.transitive
        && full_shifted.stabilizer_orders.iter().all(|&s| s == 2)
        && [&sigma, &cq, &full, &full_even, &full_odd, &full_shifted]
            .iter()
            .all(|s| s.homomorphism)
        && stab_matches;
    let brief = |s: &crate::groups::ActionSummary| {
        let mut orders = s.stabilizer_orders.clone();
        orders.dedup();
        json!({ "cells": s.cells, "transitive": s.transitive, "simply_transitive": s.simply_transitive, "stabilizer_orders": orders })
    };
    Ok(Outcome::judge(
        pass,
        None,
        json!({
            "sigma_on_omega_shifted": brief(&sigma),
            "circles_q_on_omega_even": brief(&cq),
            "full_on_omega": brief(&full),
            "full_on_omega_even": brief(&full_even),
            "full_on_omega_odd": brief(&full_odd),
            "full_on_omega_shifted": brief(&full_shifted),
            "shifted_cell_stabilizer": stab_order,
        }),
    ))
}

fn disc_brief(r: &DiscReport) -> Value {
    json!({
        "level": r.level,
        "vertices": r.vertices,
        "triangles": r.triangles,
        "area": r.area,
        "max_mean_curvature_residual": r.max_mean_curvature_residual,
        "boundary_deviation": r.boundary_deviation,
        "symmetry_deviation": r.symmetry_deviation,
        "iterations": r.iterations,
        "converged": r.converged,
        "area_monotone": r.area_monotone,
        "min_cone_coefficient": r.min_cone_coefficient,
    })
}

pub(crate) fn disc_solver(ctx: &Context, _: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let r = &ctx.disc()?.report;
    let pass = r.max_mean_curvature_residual < DISC_RESIDUAL_TOL
        && r.boundary_deviation < BOUNDARY_TOL
        && r.area_monotone
        && r.containment_warnings.is_empty();
    Ok(Outcome::judge(pass, Some(r.max_mean_curvature_residual), disc_brief(r)))
}

pub(crate) fn disc_refinement(ctx: &Context, _: &mut ChaCha8Rng) -> Result<Outcome, String> {
    if ctx.config.level <= 2 {
        return Ok(Outcome::skip("level 2 has no coarser level to compare with"));
    }
    let (fine, coarse) = (&ctx.disc()?.report, &ctx.coarse_disc()?.report);
    let ratio = coarse.max_mean_curvature_residual / fine.max_mean_curvature_residual;
    Ok(Outcome::judge(
        ratio >= 2.0 && fine.area < coarse.area,
        Some(ratio),
        json!({ "coarse": disc_brief(coarse), "fine": disc_brief(fine), "residual_ratio": ratio }),
    ))
}

pub(crate) fn disc_symmetry(ctx: &Context, _: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let r = &ctx.disc()?.report;
    let order = disc_group(&ctx.lat).order();
    Ok(Outcome::judge(
        r.symmetry_deviation < ctx.config.tol_sym && order == 4,
        Some(r.symmetry_deviation),
        json!({ "cell_symmetry_order": order }),
    ))
}

pub(crate) fn disc_graphical(ctx: &Context, rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let d = ctx.disc()?;
    let r = verify_graphical(&d.mesh, &ctx.lat, GRAPH_ORBITS, rng).map_err(|e| e.to_string())?;
    Ok(Outcome::judge(r.passed(), Some(r.area_balance), json!(r)))
}

pub(crate) fn alpha_beta_curves(ctx: &Context, _: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let d = ctx.disc()?;
    let curves = extract_curves(&d.mesh, &ctx.lat).map_err(|e| e.to_string())?;
    let sub = subdisc_checks(&d.mesh, &ctx.lat);
    let inside = curves.axis_angle > 0.0 && curves.axis_angle < PI / 2.0;
    Ok(Outcome::judge(
        inside && curves.endpoint_error < 1e-9 && sub.passed(),
        Some(curves.endpoint_error),
        json!({
            "axis_point": curves.axis_point,
            "axis_angle": curves.axis_angle,
            "curve_points": [curves.alpha_minus.len(), curves.alpha_plus.len(), curves.beta_minus.len(), curves.beta_plus.len()],
            "subdiscs": sub,
        }),
    ))
}

pub(crate) fn surface_topology(ctx: &Context, _: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let s = ctx.surface()?;
    let t = surface::topology(&s.mesh).map_err(|e| e.to_string())?;
    let (m, k) = (ctx.config.m, ctx.config.k);
    let inc = axis_incidence(&s.mesh, &ctx.lat, 64);
    let pass = t.genus == (k - 1) * (m - 1)
        && t.orientable
        && t.connected
        && s.copies.len() as i64 == 2 * k * m
        && inc.passed(1e-6);
    Ok(Outcome::judge(
        pass,
        None,
        json!({ "topology": t, "expected_genus": (k - 1) * (m - 1), "copies": s.copies.len(), "axis_incidence": inc }),
    ))
}

pub(crate) fn surface_symmetry(ctx: &Context, _: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let r = ctx.symmetry()?;
    Ok(Outcome::judge(
        r.max_deviation < ctx.config.tol_sym,
        Some(r.max_deviation),
        json!({ "elements": r.elements.len() }),
    ))
}

pub(crate) fn side_orientation_flags(ctx: &Context, _: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let g = ctx.groups()?;
    let r = ctx.symmetry()?;
    let members = |sub: &crate::groups::FiniteGroup| -> Vec<usize> {
        (0..g.full.order())
            .filter(|&i| sub.contains(g.full.element(i)))
            .collect()
    };
    let (sides, orient, rot) = (r.sides_preserving(), r.orientation_preserving(), r.rotations());
    let pass = sides == members(&g.sigma) && orient == members(&g.orientation) && rot == members(&g.circles);
    Ok(Outcome::judge(
        pass,
        None,
        json!({ "sides_preserving": sides, "orientation_preserving": orient, "rotations": rot }),
    ))
}

pub(crate) fn umbilics(ctx: &Context, rng: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let s = ctx.surface()?;
    let r = surface::umbilic_probe(&s.mesh, &ctx.lat, UMBILIC_SAMPLES, rng).map_err(|e| e.to_string())?;
    let worst = r
        .candidates
        .iter()
        .filter(|c| c.expected)
        .map(|c| c.statistic)
        .fold(0.0, f64::max);
    Ok(Outcome::judge(r.passed(), Some(worst), json!(r)))
}

fn ledger_brief(r: &surface::LedgerReport) -> Value {
    let cases: std::collections::BTreeMap<String, usize> = r.cells.iter().fold(Default::default(), |mut acc, c| {
        *acc.entry(format!("{:?}", c.case)).or_insert(0) += 1;
        acc
    });
    json!({
        "cells": r.cells.len(),
        "cases": cases,
        "max_exact_residual": r.max_exact_residual,
        "max_measured_residual": r.max_measured_residual,
        "first_cell": r.cells.first(),
    })
}

pub(crate) fn gauss_bonnet_ledger(ctx: &Context, _: &mut ChaCha8Rng) -> Result<Outcome, String> {
    let s = ctx.surface()?;
    let r = surface::ledger(&s.mesh, &ctx.lat).map_err(|e| e.to_string())?;
    Ok(Outcome::judge(
        r.passed(LEDGER_TOL),
        Some(r.max_measured_residual),
        ledger_brief(&r),
    ))
}

pub(crate) fn ledger_refinement(ctx: &Context, _: &mut ChaCha8Rng) -> Result<Outcome, String> {
    if ctx.config.level <= 2 {
        return Ok(Outcome::skip("level 2 has no coarser level to compare with"));
    }
    let fine = surface::ledger(&ctx.surface()?.mesh, &ctx.lat).map_err(|e| e.to_string())?;
    let coarse = surface::ledger(&ctx.coarse_surface()?.mesh, &ctx.lat).map_err(|e| e.to_string())?;
    let (f, c) = (fine.max_measured_residual, coarse.max_measured_residual);
    Ok(Outcome::judge(
        f < c && fine.all_quadrilaterals() && coarse.all_quadrilaterals(),
        Some(f / c),
        json!({ "coarse_residual": c, "fine_residual": f }),
    ))
}
