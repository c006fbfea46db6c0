//! Configuration, the verification suite and its runner.
//!
//! Every check draws from its own ChaCha8 stream: the generator is seeded
//! with the run seed and switched to the stream numbered by the check's
//! position in [`catalogue`], so results do not depend on which other checks
//! run or on thread scheduling.

mod checks;
mod config;

pub use checks::{
    BOUNDARY_TOL, COVERAGE_SAMPLES, DISC_RESIDUAL_TOL, GEOMETRY_TOL, GRAPH_ORBITS, LEDGER_TOL, METRIC_TOL,
    UMBILIC_SAMPLES,
};
pub use config::RunConfig;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use checks::{CheckFn, Context, Outcome};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("unknown suite or check {0:?}")]
    UnknownSuite(String),
    #[error("i/o: {0}")]
    Io(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip { reason: String },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: String,
    pub suite: String,
    pub title: String,
    #[serde(flatten)]
    pub status: Status,
    pub residual: Option<f64>,
    pub witness: serde_json::Value,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerificationSuite {
    pub m: i64,
    pub k: i64,
    pub level: u32,
    pub seed: u64,
    pub tol_grad: f64,
    pub tol_sym: f64,
    pub suite: String,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub checks: Vec<CheckResult>,
}

impl VerificationSuite {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    pub fn check(&self, id: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("suite serializes")
    }
}

pub struct CheckSpec {
    pub id: &'static str,
    pub suite: &'static str,
    pub title: &'static str,
    run: CheckFn,
}

const CATALOGUE: &[CheckSpec] = &[
    CheckSpec {
        id: "reflections",
        suite: "geometry",
        title: "reflections through subspaces are orthogonal involutions",
        run: checks::reflections,
    },
    CheckSpec {
        id: "rotations-killing",
        suite: "geometry",
        title: "rotations about and along a circle and their Killing fields",
        run: checks::rotations_killing,
    },
    CheckSpec {
        id: "orbit-projection",
        suite: "orbits",
        title: "projection of rotation orbits onto a closed hemisphere",
        run: checks::orbit_projection,
    },
    CheckSpec {
        id: "circle-sphere-geometry",
        suite: "geometry",
        title: "incidences of C, its orthocomplement, spheres and circles",
        run: checks::circle_sphere_geometry,
    },
    CheckSpec {
        id: "lattice-points",
        suite: "lattice",
        title: "lattice points, spheres and circles",
        run: checks::lattice_points,
    },
    CheckSpec {
        id: "tessellation-coverage",
        suite: "lattice",
        title: "both tessellations cover S3 with multiplicity one",
        run: checks::tessellation_coverage,
    },
    CheckSpec {
        id: "cell-metrics",
        suite: "lattice",
        title: "edge lengths and dihedral angles of every cell",
        run: checks::cell_metrics,
    },
    CheckSpec {
        id: "boundary-parts",
        suite: "lattice",
        title: "boundary splits into two parts meeting in the quadrilateral",
        run: checks::boundary_parts,
    },
    CheckSpec {
        id: "collection-unions",
        suite: "lattice",
        title: "unions of the circle collections",
        run: checks::collection_unions,
    },
    CheckSpec {
        id: "axis-rotation-orbits",
        suite: "orbits",
        title: "orbits of the axis rotation through each cell",
        run: checks::axis_rotation_orbits,
    },
    CheckSpec {
        id: "hemisphere-orbits",
        suite: "orbits",
        title: "sphere-group orbits meet each shifted cell once",
        run: checks::hemisphere_orbits,
    },
    CheckSpec {
        id: "group-orders",
        suite: "groups",
        title: "orders and relations of the named groups",
        run: checks::group_orders,
    },
    CheckSpec {
        id: "group-actions",
        suite: "groups",
        title: "actions of the groups on the cells",
        run: checks::group_actions,
    },
    CheckSpec {
        id: "disc-solver",
        suite: "disc",
        title: "minimized disc residual and boundary",
        run: checks::disc_solver,
    },
    CheckSpec {
        id: "disc-refinement",
        suite: "disc",
        title: "residual and area under refinement",
        run: checks::disc_refinement,
    },
    CheckSpec {
        id: "disc-symmetry",
        suite: "disc",
        title: "disc is invariant under the cell symmetries",
        run: checks::disc_symmetry,
    },
    CheckSpec {
        id: "disc-graphical",
        suite: "disc",
        title: "disc is a graph over the axis rotation",
        run: checks::disc_graphical,
    },
    CheckSpec {
        id: "alpha-beta-curves",
        suite: "disc",
        title: "symmetry curves meet at one axis point and cut four subdiscs",
        run: checks::alpha_beta_curves,
    },
    CheckSpec {
        id: "surface-topology",
        suite: "surface",
        title: "genus of the assembled surface and its intersection with C and its orthocomplement",
        run: checks::surface_topology,
    },
    CheckSpec {
        id: "surface-symmetry",
        suite: "surface",
        title: "surface is invariant under the full group",
        run: checks::surface_symmetry,
    },
    CheckSpec {
        id: "side-orientation-flags",
        suite: "surface",
        title: "side- and orientation-preserving subgroups",
        run: checks::side_orientation_flags,
    },
    CheckSpec {
        id: "umbilics",
        suite: "surface",
        title: "umbilic locations and count",
        run: checks::umbilics,
    },
    CheckSpec {
        id: "gauss-bonnet-ledger",
        suite: "surface",
        title: "angle sums of the pieces in the shifted cells",
        run: checks::gauss_bonnet_ledger,
    },
    CheckSpec {
        id: "ledger-refinement",
        suite: "surface",
        title: "angle-sum residual shrinks under refinement",
        run: checks::ledger_refinement,
    },
];

/// All checks in execution order.
pub fn catalogue() -> &'static [CheckSpec] {
    CATALOGUE
}

/// Suite names accepted besides individual check ids.
pub const SUITES: [&str; 7] = ["all", "geometry", "lattice", "orbits", "groups", "disc", "surface"];

/// Positions in the catalogue of the checks selected by `name`.
pub fn select(name: &str) -> Result<Vec<usize>, HarnessError> {
    let picked: Vec<usize> = CATALOGUE
        .iter()
        .enumerate()
        .filter(|(_, c)| name == "all" || c.suite == name || c.id == name)
        .map(|(i, _)| i)
        .collect();
    if picked.is_empty() {
        Err(HarnessError::UnknownSuite(name.to_string()))
    } else {
        Ok(picked)
    }
}

fn run_one(ctx: &Context, index: usize, seed: u64) -> CheckResult {
    let spec = &CATALOGUE[index];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let outcome = match catch_unwind(AssertUnwindSafe(|| (spec.run)(ctx, &mut rng))) {
        Ok(Ok(o)) => o,
        Ok(Err(e)) => Outcome::error(e),
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "check panicked".into());
            Outcome::error(format!("panic: {msg}"))
        }
    };
    CheckResult {
        id: spec.id.into(),
        suite: spec.suite.into(),
        title: spec.title.into(),
        status: outcome.status,
        residual: outcome.residual,
        witness: outcome.witness,
    }
}

/// Runs the checks selected by `config.suite` on up to `threads` threads.
pub fn run_suite_with_threads(config: &RunConfig, threads: usize) -> Result<VerificationSuite, HarnessError> {
    config.validate()?;
    let picked = select(&config.suite)?;
    let ctx = Context::new(config.clone()).map_err(HarnessError::Config)?;
    let slots: Mutex<Vec<Option<CheckResult>>> = Mutex::new(vec![None; picked.len()]);
    let next = AtomicUsize::new(0);
    let workers = threads.clamp(1, picked.len());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let n = next.fetch_add(1, Ordering::Relaxed);
                let Some(&index) = picked.get(n) else { break };
                let result = run_one(&ctx, index, config.seed);
                slots.lock().unwrap_or_else(|e| e.into_inner())[n] = Some(result);
            });
        }
    });
    let checks: Vec<CheckResult> = slots
        .into_inner()
        .unwrap_or_else(|e| e.into_inner())
        .into_iter()
        .map(|c| c.expect("every selected check ran"))
        .collect();
    let count = |f: fn(&Status) -> bool| checks.iter().filter(|c| f(&c.status)).count();
    Ok(VerificationSuite {
        m: config.m,
        k: config.k,
        level: config.level,
        seed: config.seed,
        tol_grad: config.tol_grad,
        tol_sym: config.tol_sym,
        suite: config.suite.clone(),
        passed: count(|s| *s == Status::Pass),
        failed: count(|s| *s == Status::Fail),
        skipped: count(|s| matches!(s, Status::Skip { .. })),
        checks,
    })
}

/// Runs the selected checks on all available cores.
pub fn run_suite(config: &RunConfig) -> Result<VerificationSuite, HarnessError> {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    run_suite_with_threads(config, threads)
}
