use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use lawson_core::groups::{build_named_groups, default_cap, NamedGroups};
use lawson_core::harness::{run_suite, RunConfig, Status, VerificationSuite};
use lawson_core::lattice::{Lattice, LatticeParams};
use lawson_core::plateau::{solve_disc, SolverOptions};
use lawson_core::surface::{self, assemble, export_pole, stereographic_obj, SurfaceDocument};

#[derive(Parser, Debug)]
#[command(name = "lawson", version, about = "Lawson tessellations, discs and surfaces in S3")]
struct Cli {
    /// key = value file read before the flags; flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    m: Option<i64>,
    #[arg(long, global = true)]
    k: Option<i64>,
    /// Refinement level of the disc.
    #[arg(long, global = true)]
    level: Option<u32>,
    #[arg(long, global = true)]
    tol_grad: Option<f64>,
    #[arg(long, global = true)]
    tol_sym: Option<f64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// all, geometry, lattice, orbits, groups, disc, surface, or a check id.
    #[arg(long, global = true)]
    suite: Option<String>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Write the lattice, spheres, circles and cells as JSON.
    Tessellate,
    /// Write the named groups as JSON and print their orders.
    Groups,
    /// Minimize the disc and write a mesh checkpoint with its report.
    Disc,
    /// Assemble the closed surface and report its topology.
    Assemble,
    /// Run the verification suite.
    Verify,
    /// Export the surface as a stereographically projected OBJ with a JSON sidecar.
    Export,
    /// Run the suite and print a readable summary.
    Report,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Obj,
    Json,
}

enum Failure {
    Usage(String),
    Run(String),
}

impl Cli {
    fn run_config(&self) -> Result<RunConfig, Failure> {
        let mut c = match &self.config {
            Some(path) => RunConfig::from_file(path).map_err(|e| Failure::Usage(e.to_string()))?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.m {
            c.m = v;
        }
        if let Some(v) = self.k {
            c.k = v;
        }
        if let Some(v) = self.level {
            c.level = v;
        }
        if let Some(v) = self.tol_grad {
            c.tol_grad = v;
        }
        if let Some(v) = self.tol_sym {
            c.tol_sym = v;
        }
        if let Some(v) = &self.out {
            c.out = v.clone();
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = &self.suite {
            c.suite = v.clone();
        }
        c.validate().map_err(|e| Failure::Usage(e.to_string()))?;
        Ok(c)
    }
}

fn write(dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf, Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::Run(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Failure::Run(format!("{}: {e}", path.display())))?;
    Ok(path)
}

fn to_json<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s.into_bytes()
}

fn lattice(c: &RunConfig) -> Result<Lattice, Failure> {
    let params = LatticeParams::new(c.m, c.k).map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(Lattice::build(params))
}

fn groups(lat: &Lattice) -> Result<NamedGroups, Failure> {
    build_named_groups(lat, default_cap(lat)).map_err(|e| Failure::Run(e.to_string()))
}

fn solve(
    c: &RunConfig,
    lat: &Lattice,
) -> Result<(lawson_core::plateau::TriMeshS3, lawson_core::plateau::DiscReport), Failure> {
    let opts = SolverOptions {
        level: c.level,
        grad_tol: c.tol_grad,
        sym_tol: c.tol_sym,
        ..Default::default()
    };
    solve_disc(lat, &opts).map_err(|e| Failure::Run(e.to_string()))
}

fn closed_surface(
    c: &RunConfig,
    lat: &Lattice,
) -> Result<(surface::ClosedSurfaceMesh, surface::SurfaceTopology), Failure> {
    let g = groups(lat)?;
    let (disc, _) = solve(c, lat)?;
    let s = assemble(lat, &disc, &g.circles_q).map_err(|e| Failure::Run(e.to_string()))?;
    let t = surface::topology(&s.mesh).map_err(|e| Failure::Run(e.to_string()))?;
    Ok((s, t))
}

fn print_suite(s: &VerificationSuite) {
    print!("{}", headline(s));
    for c in &s.checks {
        let status = match &c.status {
            Status::Pass => "pass".to_string(),
            Status::Fail => "FAIL".to_string(),
            Status::Skip { reason } => format!("skip ({reason})"),
        };
        let residual = c.residual.map(|r| format!("{r:.3e}")).unwrap_or_else(|| "-".into());
        println!("{:<24} {:<10} {:>10}  {}", c.id, status, residual, c.title);
    }
    println!("{} passed, {} failed, {} skipped", s.passed, s.failed, s.skipped);
}

/// Group orders, disc, topology and umbilic counts, for whichever of those checks ran.
fn headline(s: &VerificationSuite) -> String {
    let mut out = String::new();
    if let Some(c) = s.check("group-orders") {
        if let Some(orders) = c.witness["orders"].as_array() {
            out.push_str("group orders:");
            for o in orders {
                out.push_str(&format!(" {}={}", o[0].as_str().unwrap_or("?"), o[1]));
            }
            out.push('\n');
        }
    }
    if let Some(c) = s.check("disc-solver") {
        let w = &c.witness;
        out.push_str(&format!(
            "disc: {} triangles, area {}, mean-curvature residual {}\n",
            w["triangles"], w["area"], w["max_mean_curvature_residual"]
        ));
    }
    if let Some(c) = s.check("surface-topology") {
        let t = &c.witness["topology"];
        out.push_str(&format!(
            "surface: V={} E={} F={} chi={} genus {}\n",
            t["vertices"], t["edges"], t["faces"], t["euler_characteristic"], t["genus"]
        ));
    }
    if let Some(c) = s.check("umbilics") {
        out.push_str(&format!(
            "umbilics: {} of {} candidates below the 5th percentile\n",
            c.witness["detected"], c.witness["expected_count"]
        ));
    }
    out
}

fn report(s: &VerificationSuite) -> String {
    let mut out = format!(
        "Lawson surface M[{}, {}] at level {}, seed {}, suite {}\n\n",
        s.m, s.k, s.level, s.seed, s.suite
    );
    out.push_str(&headline(s));
    out.push('\n');
    for c in &s.checks {
        let mark = match &c.status {
            Status::Pass => "[pass]".to_string(),
            Status::Fail => "[FAIL]".to_string(),
            Status::Skip { reason } => format!("[skip: {reason}]"),
        };
        out.push_str(&format!("{mark} {}: {}\n", c.id, c.title));
    }
    out.push_str(&format!(
        "\n{} passed, {} failed, {} skipped\n",
        s.passed, s.failed, s.skipped
    ));
    out
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    let c = cli.run_config()?;
    match cli.command {
        Command::Tessellate => {
            let lat = lattice(&c)?;
            let path = write(&c.out, "lattice.json", &to_json(&lat.document()))?;
            println!("{} cells per tessellation written to {}", 4 * c.m * c.k, path.display());
        }
        Command::Groups => {
            let lat = lattice(&c)?;
            let g = groups(&lat)?;
            let docs: Vec<_> = g.all().iter().map(|(name, grp)| grp.document(name)).collect();
            let path = write(&c.out, "groups.json", &to_json(&docs))?;
            for (name, grp) in g.all() {
                println!("{name:<14} {}", grp.order());
            }
            println!("written to {}", path.display());
        }
        Command::Disc => {
            let lat = lattice(&c)?;
            let (mesh, rep) = solve(&c, &lat)?;
            let doc = json!({ "report": rep, "mesh": mesh.document() });
            let path = write(&c.out, &format!("disc_l{}.json", c.level), &to_json(&doc))?;
            println!(
                "level {}: {} triangles, area {:.12}, residual {:.3e}, boundary deviation {:.1e}, symmetry deviation {:.1e}",
                rep.level,
                rep.triangles,
                rep.area,
                rep.max_mean_curvature_residual,
                rep.boundary_deviation,
                rep.symmetry_deviation
            );
            println!("written to {}", path.display());
        }
        Command::Assemble => {
            let lat = lattice(&c)?;
            let (s, t) = closed_surface(&c, &lat)?;
            let doc = SurfaceDocument::new(&lat, c.level, &s.mesh, t);
            let path = write(
                &c.out,
                &format!("surface_{}_{}_l{}.json", c.m, c.k, c.level),
                &to_json(&doc),
            )?;
            println!(
                "M[{}, {}]: {} copies, V={} E={} F={}, chi={}, genus {}",
                c.m,
                c.k,
                s.copies.len(),
                t.vertices,
                t.edges,
                t.faces,
                t.euler_characteristic,
                t.genus
            );
            println!("written to {}", path.display());
        }
        Command::Export => {
            let lat = lattice(&c)?;
            let (s, t) = closed_surface(&c, &lat)?;
            let stem = format!("lawson_{}_{}_l{}", c.m, c.k, c.level);
            let doc = SurfaceDocument::new(&lat, c.level, &s.mesh, t);
            if cli.format != Some(Format::Json) {
                let mut obj = Vec::new();
                stereographic_obj(&s.mesh, &export_pole(&lat), &mut obj).map_err(|e| Failure::Run(e.to_string()))?;
                println!("{}", write(&c.out, &format!("{stem}.obj"), &obj)?.display());
            }
            println!("{}", write(&c.out, &format!("{stem}.json"), &to_json(&doc))?.display());
        }
        Command::Verify => {
            let s = run_suite(&c).map_err(|e| Failure::Usage(e.to_string()))?;
            let json = s.to_json() + "\n";
            write(&c.out, "verify.json", json.as_bytes())?;
            if cli.format == Some(Format::Json) {
                print!("{json}");
            } else {
                print_suite(&s);
            }
            return Ok(s.all_passed());
        }
        Command::Report => {
            let s = run_suite(&c).map_err(|e| Failure::Usage(e.to_string()))?;
            let text = report(&s);
            write(&c.out, "report.txt", text.as_bytes())?;
            print!("{text}");
            return Ok(s.all_passed());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Run(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
