use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use lawson_core::groups::{build_named_groups, default_cap};
use lawson_core::harness::{run_suite, RunConfig, Status, VerificationSuite};
use lawson_core::lattice::{Lattice, LatticeParams};
use lawson_core::plateau::{solve_disc, SolverOptions};

const PAIRS: [(i64, i64); 4] = [(3, 2), (4, 2), (3, 3), (4, 3)];
const SEED: u64 = 20240917;

type Verdict = Result<String, String>;
type Criterion<'a> = Box<dyn FnOnce() -> Verdict + 'a>;

fn config(m: i64, k: i64, level: u32, suite: &str) -> RunConfig {
    RunConfig {
        m,
        k,
        level,
        seed: SEED,
        suite: suite.into(),
        ..Default::default()
    }
}

fn suite(c: &RunConfig) -> VerificationSuite {
    run_suite(c).expect("valid configuration")
}

fn passed(s: &VerificationSuite, ids: &[&str]) -> Verdict {
    for id in ids {
        let c = s.check(id).ok_or_else(|| format!("{id} did not run"))?;
        if c.status != Status::Pass {
            return Err(format!(
                "{id}: {:?}, residual {:?}, {}",
                c.status, c.residual, c.witness
            ));
        }
    }
    Ok(ids.join(", "))
}

fn group_orders() -> Verdict {
    let start = Instant::now();
    for (m, k) in PAIRS {
        let lat = Lattice::build(LatticeParams::new(m, k).map_err(|e| e.to_string())?);
        let g = build_named_groups(&lat, default_cap(&lat)).map_err(|e| e.to_string())?;
        let km = (k * m) as usize;
        for (name, grp) in g.all() {
            let expected = match name {
                "full" => 8 * km,
                "sigma" | "circles" | "orientation" => 4 * km,
                "circles_q" | "circles_axes" => 2 * km,
                other => return Err(format!("unexpected group {other}")),
            };
            if grp.order() != expected {
                return Err(format!("({m},{k}) {name}: {} != {expected}", grp.order()));
            }
        }
        passed(&suite(&config(m, k, 2, "group-orders")), &["group-orders"])?;
    }
    let elapsed = start.elapsed();
    if elapsed < Duration::from_secs(5) {
        Ok(format!("4 parameter pairs in {elapsed:.2?}"))
    } else {
        Err(format!("took {elapsed:.2?}"))
    }
}

fn group_actions() -> Verdict {
    for (m, k) in PAIRS {
        passed(&suite(&config(m, k, 2, "group-actions")), &["group-actions"]).map_err(|e| format!("({m},{k}) {e}"))?;
    }
    Ok("4 parameter pairs".into())
}

fn disc_convergence() -> Verdict {
    let lat = Lattice::build(LatticeParams::new(3, 2).unwrap());
    let opts = |level| SolverOptions {
        level,
        ..Default::default()
    };
    let (_, coarse) = solve_disc(&lat, &opts(4)).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let (_, fine) = solve_disc(&lat, &opts(5)).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let ratio = coarse.max_mean_curvature_residual / fine.max_mean_curvature_residual;
    let detail = format!(
        "residual {:.2e}, boundary {:.1e}, symmetry {:.1e}, ratio {ratio:.2}, {elapsed:.2?}",
        fine.max_mean_curvature_residual, fine.boundary_deviation, fine.symmetry_deviation
    );
    let ok = fine.max_mean_curvature_residual < 1e-3
        && fine.boundary_deviation < 1e-10
        && fine.symmetry_deviation < 1e-10
        && ratio >= 2.0
        && elapsed < Duration::from_secs(60);
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn topology(main: &VerificationSuite) -> Verdict {
    let genus = |s: &VerificationSuite| -> Result<(i64, i64), String> {
        passed(s, &["surface-topology"])?;
        let t = &s.check("surface-topology").unwrap().witness["topology"];
        Ok((
            t["genus"].as_i64().unwrap_or(-1),
            t["euler_characteristic"].as_i64().unwrap_or(0),
        ))
    };
    let a = genus(main)?;
    let b = genus(&suite(&config(4, 3, 4, "surface-topology")))?;
    if a == (2, -2) && b == (6, -10) {
        Ok("M[3,2] genus 2, M[4,3] genus 6".into())
    } else {
        Err(format!("M[3,2] (genus, chi) = {a:?}, M[4,3] = {b:?}"))
    }
}

fn ledger(main: &VerificationSuite) -> Verdict {
    passed(main, &["gauss-bonnet-ledger", "ledger-refinement"])?;
    let w = &main.check("gauss-bonnet-ledger").unwrap().witness;
    let r = &main.check("ledger-refinement").unwrap().witness;
    Ok(format!(
        "{} quadrilateral pieces, residual {:.2e} at level 5 down from {:.2e}",
        w["cases"]["Quadrilateral"],
        r["fine_residual"].as_f64().unwrap_or(f64::NAN),
        r["coarse_residual"].as_f64().unwrap_or(f64::NAN)
    ))
}

fn umbilics(main: &VerificationSuite) -> Verdict {
    passed(main, &["umbilics"])?;
    let w = &main.check("umbilics").unwrap().witness;
    Ok(format!(
        "{} of {} candidates below the 5th percentile",
        w["detected"], w["expected_count"]
    ))
}

fn determinism(main: &VerificationSuite) -> Verdict {
    let again = suite(&config(3, 2, 5, "all")).to_json();
    if again == main.to_json() {
        Ok(format!("{} bytes identical", again.len()))
    } else {
        Err("reports differ".into())
    }
}

fn run(f: impl FnOnce() -> Verdict) -> Verdict {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()))
}

fn main() -> ExitCode {
    let main = suite(&config(3, 2, 5, "all"));
    let m = &main;
    let criteria: Vec<(&str, Criterion)> = vec![
        ("group orders", Box::new(group_orders)),
        ("action certification", Box::new(group_actions)),
        (
            "tessellation metrics and coverage",
            Box::new(move || passed(m, &["cell-metrics", "tessellation-coverage"])),
        ),
        (
            "circle and sphere geometry",
            Box::new(move || passed(m, &["circle-sphere-geometry"])),
        ),
        (
            "orbit structure",
            Box::new(move || passed(m, &["axis-rotation-orbits", "hemisphere-orbits"])),
        ),
        ("disc solver convergence", Box::new(disc_convergence)),
        ("graphicality", Box::new(move || passed(m, &["disc-graphical"]))),
        ("topology", Box::new(move || topology(m))),
        ("angle-sum ledger", Box::new(move || ledger(m))),
        ("umbilic locations", Box::new(move || umbilics(m))),
        (
            "side and orientation flags",
            Box::new(move || passed(m, &["side-orientation-flags", "surface-symmetry"])),
        ),
        ("determinism", Box::new(move || determinism(m))),
    ];
    let mut failures = 0;
    for (n, (name, f)) in criteria.into_iter().enumerate() {
        match run(f) {
            Ok(detail) => println!("criterion {:>2} {name}: PASS ({detail})", n + 1),
            Err(detail) => {
                failures += 1;
                println!("criterion {:>2} {name}: FAIL ({detail})", n + 1);
            }
        }
    }
    println!("{} of 12 criteria passed", 12 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
