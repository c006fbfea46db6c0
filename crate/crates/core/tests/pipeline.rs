use lawson_core::groups::{build_named_groups, default_cap};
use lawson_core::lattice::{Lattice, LatticeParams};
use lawson_core::plateau::{solve_disc, SolverOptions};
use lawson_core::surface::{assemble, export_pole, ledger, stereographic_obj, symmetry_check, topology};

#[test]
fn disc_to_exported_surface() {
    let lat = Lattice::build(LatticeParams::new(4, 2).unwrap());
    let groups = build_named_groups(&lat, default_cap(&lat)).unwrap();
    let (disc, report) = solve_disc(
        &lat,
        &SolverOptions {
            level: 3,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(report.boundary_deviation < 1e-10 && report.area_monotone);

    let surface = assemble(&lat, &disc, &groups.circles_q).unwrap();
    assert_eq!(surface.copies.len(), 16);
    let t = topology(&surface.mesh).unwrap();
    assert_eq!((t.genus, t.euler_characteristic), (3, -4));
    assert!(t.orientable && t.connected);

    assert!(symmetry_check(&surface.mesh, &groups.full).max_deviation < 1e-10);
    assert!(ledger(&surface.mesh, &lat).unwrap().all_quadrilaterals());

    let mut obj = Vec::new();
    stereographic_obj(&surface.mesh, &export_pole(&lat), &mut obj).unwrap();
    let text = String::from_utf8(obj).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("f ")).count(), t.faces);
    assert!(text.lines().filter(|l| l.starts_with("v ")).all(|l| l
        .split_whitespace()
        .skip(1)
        .all(|x| x.parse::<f64>().unwrap().is_finite())));
}
