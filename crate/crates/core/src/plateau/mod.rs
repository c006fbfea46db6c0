//! Area-minimizing discs in a cell `Ω₀⁰` spanning the quadrilateral `Q₀⁰`.
//!
//! The disc is a triangulated surface with geodesic triangles. The energy is
//! the sum of their spherical areas; descent directions are the area gradient
//! preconditioned by the cotangent Laplacian, and every trial configuration
//! is averaged over the symmetries of the cell.

mod curves;
pub mod energy;
mod graphical;
mod mesh;

pub(crate) use curves::circle_hits;
pub use curves::{extract_curves, sphere_section, subdisc_checks, DiscCurves, SubdiscPiece, SubdiscReport};
pub use graphical::{verify_graphical, GraphicalReport};
pub(crate) use mesh::PointGrid;
pub use mesh::{triangle_distance, MeshDocument, MeshError, Topology, TriMeshS3};

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::groups::FiniteGroup;
use crate::lattice::{boundary_parts, CellIndex, Lattice};
use crate::s3core::{Isometry4, PointS3, Vec4};

use energy::{mean_curvature_residuals, triangle_area, triangle_area_gradient, CotanLaplacian};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlateauError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("line search failed at iteration {iteration}: no decrease from area {area}")]
    LineSearchFailure { iteration: usize, area: f64 },
    #[error("projected triangles {a} and {b} overlap")]
    GraphicalityViolation { a: usize, b: usize },
    #[error("curve topology: {0}")]
    CurveTopology(String),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Refinement level; the disc has `2·4^level` triangles.
    pub level: u32,
    /// Stop once no vertex moves more than this in an accepted step.
    pub grad_tol: f64,
    /// Largest acceptable symmetry deviation.
    pub sym_tol: f64,
    pub max_iterations: usize,
    /// First trial step moves the fastest vertex by this fraction of the mean edge length.
    pub initial_step: f64,
    /// Move along the axis-rotation orbits before moving along normals.
    pub graph_phase: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            level: 4,
            grad_tol: 1e-11,
            sym_tol: 1e-10,
            max_iterations: 400,
            initial_step: 0.1,
            graph_phase: true,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<(), PlateauError> {
        if self.level < 2 {
            return Err(PlateauError::InvalidInput(format!("level {} < 2", self.level)));
        }
        if !(self.grad_tol > 0.0 && self.sym_tol > 0.0 && self.initial_step > 0.0) {
            return Err(PlateauError::InvalidInput(
                "tolerances and step must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiscReport {
    pub m: i64,
    pub k: i64,
    pub level: u32,
    pub vertices: usize,
    pub triangles: usize,
    pub area: f64,
    pub max_mean_curvature_residual: f64,
    /// Largest chordal distance from a boundary vertex to `Q₀⁰`.
    pub boundary_deviation: f64,
    /// Largest `|g(vᵢ) − v_{π_g(i)}|` over the cell symmetries.
    pub symmetry_deviation: f64,
    pub iterations: usize,
    pub converged: bool,
    pub final_displacement: f64,
    pub area_monotone: bool,
    /// Smallest cone coefficient of a vertex with respect to `Ω₀⁰`.
    pub min_cone_coefficient: f64,
    pub containment_warnings: Vec<String>,
    pub axis_point: Option<[f64; 4]>,
    pub curves: Option<DiscCurves>,
}

pub fn disc_cell(lat: &Lattice) -> CellIndex {
    CellIndex::omega(lat.params(), 0, 0)
}

/// `{I, R_{Σ₀}, R_{Σ⁰}, R_{C₀⁰}}`, the symmetries of `Ω₀⁰`.
pub fn disc_group(lat: &Lattice) -> FiniteGroup {
    FiniteGroup::close(&lat.cell_symmetries(&disc_cell(lat)), 8).expect("four commuting involutions")
}

/// `∂₋Ω₀⁰` refined `level` times by geodesic midpoint subdivision.
pub fn initial_disc(lat: &Lattice, level: u32) -> Result<TriMeshS3, PlateauError> {
    if level < 2 {
        return Err(PlateauError::InvalidInput(format!("level {level} < 2")));
    }
    let parts = boundary_parts(lat, &disc_cell(lat));
    let [lm, lp, um, up] = parts.vertices;
    let mut mesh = TriMeshS3::new(vec![lm, lp, um, up], vec![[0, 1, 2], [1, 0, 3]], vec![true; 4])?;
    for _ in 0..level {
        mesh = mesh.subdivide();
    }
    tag_orbits(&mut mesh, &disc_group(lat))?;
    Ok(mesh)
}

fn permutations(mesh: &TriMeshS3, grp: &FiniteGroup) -> Result<Vec<Vec<u32>>, PlateauError> {
    grp.elements()
        .iter()
        .map(|g| {
            mesh.vertex_permutation(g, 1e-8)
                .ok_or_else(|| PlateauError::InvalidInput("mesh vertices are not permuted by the group".into()))
        })
        .collect()
}

fn tag_orbits(mesh: &mut TriMeshS3, grp: &FiniteGroup) -> Result<(), PlateauError> {
    let perms = permutations(mesh, grp)?;
    let orbit = (0..mesh.vertex_count())
        .map(|i| perms.iter().map(|p| p[i]).min().unwrap_or(i as u32))
        .collect();
    mesh.set_orbits(orbit);
    Ok(())
}

struct Symmetrizer {
    inverses: Vec<Isometry4>,
    perms: Vec<Vec<u32>>,
}

impl Symmetrizer {
    /// `xᵢ ← normalize(avg_g g⁻¹ x_{π_g(i)})` at free vertices.
    fn apply(&self, x: &[Vec4], free: &[bool]) -> Vec<Vec4> {
        let n = self.inverses.len() as f64;
        (0..x.len())
            .map(|i| {
                if !free[i] {
                    return x[i];
                }
                let s: Vec4 = self
                    .inverses
                    .iter()
                    .zip(&self.perms)
                    .map(|(g, p)| g.apply_vec(&x[p[i] as usize]))
                    .sum();
                (s / n).normalize()
            })
            .collect()
    }

    fn deviation(&self, x: &[Vec4]) -> f64 {
        let mut worst: f64 = 0.0;
        for (g, p) in self.inverses.iter().zip(&self.perms) {
            for i in 0..x.len() {
                worst = worst.max((g.apply_vec(&x[p[i] as usize]) - x[i]).norm());
            }
        }
        worst
    }
}

const LBFGS_MEMORY: usize = 8;

/// How interior vertices may move.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Motion {
    /// Along the orbits of the rotation of the axis plane, keeping the
    /// projection to `C̃₀⁰` fixed.
    Orbit,
    /// Along the vertex normals.
    Normal,
}

fn motion_directions(motion: Motion, mesh: &TriMeshS3, x: &[Vec4], axis: &[Vec4; 2]) -> Vec<Vec4> {
    match motion {
        Motion::Normal => mesh.vertex_normals(),
        Motion::Orbit => {
            let [a1, a2] = axis;
            x.iter()
                .map(|v| {
                    let k = a2 * a1.dot(v) - a1 * a2.dot(v);
                    let n = k.norm();
                    if n > 0.0 {
                        k / n
                    } else {
                        k
                    }
                })
                .collect()
        }
    }
}

fn solve_scalar(lap: &CotanLaplacian, free: &[bool], q: &[f64]) -> Vec<f64> {
    let rhs: Vec<Vec4> = q.iter().map(|&v| Vec4::new(v, 0.0, 0.0, 0.0)).collect();
    match lap.solve_dirichlet(free, &rhs, 1e-12, 10 * q.len()) {
        Some(r) => r.iter().map(|v| v[0]).collect(),
        None => q.to_vec(),
    }
}

fn sdot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| u * v).sum()
}

/// L-BFGS two-loop recursion with the Dirichlet cotangent Laplacian as the
/// initial inverse Hessian; returns the descent direction.
fn quasi_newton_direction(
    g: &[f64],
    memory: &VecDeque<(Vec<f64>, Vec<f64>, f64)>,
    lap: &CotanLaplacian,
    free: &[bool],
) -> Vec<f64> {
    let mut q = g.to_vec();
    let mut alphas = Vec::with_capacity(memory.len());
    for (sv, yv, rho) in memory.iter().rev() {
        let a = rho * sdot(sv, &q);
        for (qi, yi) in q.iter_mut().zip(yv) {
            *qi -= yi * a;
        }
        alphas.push(a);
    }
    let mut r = solve_scalar(lap, free, &q);
    for ((sv, yv, rho), a) in memory.iter().zip(alphas.into_iter().rev()) {
        let b = rho * sdot(yv, &r);
        for (ri, si) in r.iter_mut().zip(sv) {
            *ri += si * (a - b);
        }
    }
    r.iter().map(|v| -v).collect()
}

struct Descent<'a> {
    tris: &'a [[u32; 3]],
    free: &'a [bool],
    sym: &'a Symmetrizer,
    cell: &'a crate::s3core::SphericalTetrahedron,
    axis: [Vec4; 2],
    work: TriMeshS3,
    x: Vec<Vec4>,
    area: f64,
    iterations: usize,
    last_move: f64,
    monotone: bool,
    warnings: Vec<String>,
}

impl Descent<'_> {
    /// Runs one phase; `Ok(true)` when it stopped by convergence rather than the cap.
    fn run(&mut self, motion: Motion, max_iterations: usize, opts: &SolverOptions) -> Result<bool, PlateauError> {
        let n = self.x.len();
        let mut memory: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
        let mut first = true;
        for _ in 0..max_iterations {
            self.iterations += 1;
            self.work
                .set_positions(self.x.iter().map(|v| PointS3::from_unit_unchecked(*v)).collect());
            let dirs = motion_directions(motion, &self.work, &self.x, &self.axis);
            let g = area_gradient(&self.x, self.tris, self.free);
            let psi: Vec<f64> = (0..n).map(|i| dirs[i].dot(&g[i])).collect();
            let lap = CotanLaplacian::new(&self.work);
            let mut phi = quasi_newton_direction(&psi, &memory, &lap, self.free);
            if sdot(&psi, &phi) >= 0.0 {
                memory.clear();
                phi = quasi_newton_direction(&psi, &memory, &lap, self.free);
            }
            let slope = sdot(&psi, &phi);
            let pmax = phi.iter().map(|v| v.abs()).fold(0.0, f64::max);
            if pmax == 0.0 || slope >= 0.0 {
                self.last_move = 0.0;
                return Ok(true);
            }
            let mut step = if first {
                (opts.initial_step * self.work.mean_edge_length() / pmax).min(1.0)
            } else {
                1.0
            };
            first = false;
            let accepted = loop {
                let trial: Vec<Vec4> = (0..n)
                    .map(|i| (self.x[i] + dirs[i] * (phi[i] * step)).normalize())
                    .collect();
                let trial = self.sym.apply(&trial, self.free);
                let a = total_area(&trial, self.tris);
                if a < self.area + 1e-4 * step * slope {
                    break Some((trial, a));
                }
                // Below this the predicted decrease is lost in rounding.
                if -step * slope < 1e-15 * self.area.max(1.0) || step * pmax < 0.01 * opts.grad_tol {
                    break None;
                }
                step *= 0.5;
            };
            let Some((trial, a)) = accepted else {
                if -slope < 1e-13 * self.area.max(1.0) || step * pmax < opts.grad_tol {
                    self.last_move = step * pmax;
                    return Ok(true);
                }
                return Err(PlateauError::LineSearchFailure {
                    iteration: self.iterations,
                    area: self.area,
                });
            };
            self.last_move = self
                .x
                .iter()
                .zip(&trial)
                .map(|(p, q)| (p - q).norm())
                .fold(0.0, f64::max);
            self.monotone &= a <= self.area;
            let g_new = area_gradient(&trial, self.tris, self.free);
            let sv: Vec<f64> = (0..n).map(|i| dirs[i].dot(&(trial[i] - self.x[i]))).collect();
            let yv: Vec<f64> = (0..n).map(|i| dirs[i].dot(&g_new[i]) - psi[i]).collect();
            let sy = sdot(&sv, &yv);
            if sy > 1e-12 * sdot(&sv, &sv).sqrt() * sdot(&yv, &yv).sqrt() {
                if memory.len() == LBFGS_MEMORY {
                    memory.pop_front();
                }
                memory.push_back((sv, yv, 1.0 / sy));
            }
            self.x = trial;
            self.area = a;
            if let Some(w) = containment_warning(self.cell, &self.x, self.iterations) {
                if self.warnings.len() < 16 {
                    self.warnings.push(w);
                }
            }
            if self.last_move < opts.grad_tol {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

fn total_area(x: &[Vec4], tris: &[[u32; 3]]) -> f64 {
    tris.iter()
        .map(|t| triangle_area(&x[t[0] as usize], &x[t[1] as usize], &x[t[2] as usize]))
        .sum()
}

fn area_gradient(x: &[Vec4], tris: &[[u32; 3]], free: &[bool]) -> Vec<Vec4> {
    let mut g = vec![Vec4::zeros(); x.len()];
    for t in tris {
        let (_, d) = triangle_area_gradient(&x[t[0] as usize], &x[t[1] as usize], &x[t[2] as usize]);
        for c in 0..3 {
            g[t[c] as usize] += d[c];
        }
    }
    for i in 0..x.len() {
        g[i] = if free[i] {
            g[i] - x[i] * x[i].dot(&g[i])
        } else {
            Vec4::zeros()
        };
    }
    g
}

/// Descent on total area with the boundary held fixed and symmetry enforced
/// by orbit averaging after every step.
///
/// Vertices first move along the orbits of the axis rotation, which keeps the
/// mesh a graph over the plane of `C̃₀⁰`, then along their normals to remove
/// the remaining normal component of the area gradient. Each phase takes
/// quasi-Newton steps preconditioned by the cotangent Laplacian with a
/// backtracking line search.
pub fn minimize(
    mesh: TriMeshS3,
    lat: &Lattice,
    grp: &FiniteGroup,
    opts: &SolverOptions,
) -> Result<(TriMeshS3, DiscReport), PlateauError> {
    opts.validate()?;
    let perms = permutations(&mesh, grp)?;
    let sym = Symmetrizer {
        inverses: grp.elements().iter().map(|g| g.inverse()).collect(),
        perms,
    };
    let cell = lat.tetra(&disc_cell(lat));
    let free: Vec<bool> = (0..mesh.vertex_count()).map(|i| !mesh.is_boundary(i)).collect();
    let tris = mesh.triangles().to_vec();
    let x = sym.apply(&mesh.vertices().iter().map(|v| *v.coords()).collect::<Vec<_>>(), &free);
    let mut run = Descent {
        tris: &tris,
        free: &free,
        sym: &sym,
        cell,
        axis: lat.axis(&disc_cell(lat)).basis(),
        work: mesh.clone(),
        area: total_area(&x, &tris),
        x,
        iterations: 0,
        last_move: f64::INFINITY,
        monotone: true,
        warnings: Vec::new(),
    };
    let graph_converged = !opts.graph_phase || run.run(Motion::Orbit, opts.max_iterations, opts)?;
    let converged = run.run(Motion::Normal, opts.max_iterations, opts)? && graph_converged;

    let mut out = mesh;
    out.set_positions(run.x.iter().map(|v| PointS3::from_unit_unchecked(*v)).collect());
    tag_orbits(&mut out, grp)?;
    let mut report = disc_report(&out, lat, sym.deviation(&run.x), opts.level);
    report.iterations = run.iterations;
    report.converged = converged;
    report.final_displacement = run.last_move;
    report.area_monotone = run.monotone;
    report.containment_warnings = run.warnings;
    Ok((out, report))
}

fn containment_warning(cell: &crate::s3core::SphericalTetrahedron, x: &[Vec4], iteration: usize) -> Option<String> {
    let (i, c) = x
        .iter()
        .enumerate()
        .map(|(i, v)| (i, cell.coefficients(v).into_iter().fold(f64::INFINITY, f64::min)))
        .min_by(|a, b| a.1.total_cmp(&b.1))?;
    (c < -1e-6).then(|| format!("iteration {iteration}: vertex {i} has cone coefficient {c:e}"))
}

/// Measurements of a disc mesh spanning `Q₀⁰`.
pub fn disc_report(mesh: &TriMeshS3, lat: &Lattice, symmetry_deviation: f64, level: u32) -> DiscReport {
    let parts = boundary_parts(lat, &disc_cell(lat));
    let cell = lat.tetra(&disc_cell(lat));
    let boundary_deviation = (0..mesh.vertex_count())
        .filter(|&i| mesh.is_boundary(i))
        .map(|i| parts.quad.distance(mesh.vertex(i)))
        .fold(0.0, f64::max);
    let min_cone_coefficient = mesh
        .vertices()
        .iter()
        .map(|v| cell.membership(v).min_coeff())
        .fold(f64::INFINITY, f64::min);
    let curves = extract_curves(mesh, lat).ok();
    DiscReport {
        m: lat.params().m(),
        k: lat.params().k(),
        level,
        vertices: mesh.vertex_count(),
        triangles: mesh.triangle_count(),
        area: mesh.area(),
        max_mean_curvature_residual: mean_curvature_residuals(mesh).into_iter().fold(0.0, f64::max),
        boundary_deviation,
        symmetry_deviation,
        iterations: 0,
        converged: false,
        final_displacement: f64::NAN,
        area_monotone: true,
        min_cone_coefficient,
        containment_warnings: Vec::new(),
        axis_point: curves.as_ref().map(|c| c.axis_point),
        curves,
    }
}

/// Solves level by level from 2 up to `opts.level`, subdividing each
/// converged mesh to start the next; the result has the combinatorics of
/// `initial_disc(lat, opts.level)`. Only the coarsest level runs the graph
/// phase.
pub fn solve_disc(lat: &Lattice, opts: &SolverOptions) -> Result<(TriMeshS3, DiscReport), PlateauError> {
    opts.validate()?;
    let grp = disc_group(lat);
    let mut mesh = initial_disc(lat, 2)?;
    let mut total_iterations = 0;
    let mut warnings = Vec::new();
    let mut monotone = true;
    for level in 2..=opts.level {
        if level > 2 {
            mesh = mesh.subdivide();
        }
        let level_opts = SolverOptions {
            level,
            graph_phase: opts.graph_phase && level == 2,
            ..*opts
        };
        let (next, report) = minimize(mesh, lat, &grp, &level_opts)?;
        total_iterations += report.iterations;
        monotone &= report.area_monotone;
        warnings.extend(report.containment_warnings.iter().cloned());
        mesh = next;
        if level == opts.level {
            let mut report = report;
            report.iterations = total_iterations;
            report.containment_warnings = warnings;
            report.area_monotone = monotone;
            return Ok((mesh, report));
        }
    }
    unreachable!("opts.level ≥ 2 was validated")
}
