use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use lawson_core::groups::{build_named_groups, default_cap};
use lawson_core::lattice::{Family, Lattice, LatticeParams};
use lawson_core::plateau::{solve_disc, SolverOptions};
use lawson_core::surface::{assemble, topology};
use lawson_core::PointS3;

fn lattice(m: i64, k: i64) -> Lattice {
    Lattice::build(LatticeParams::new(m, k).unwrap())
}

fn groups(c: &mut Criterion) {
    for (m, k) in [(3, 2), (4, 3)] {
        let lat = lattice(m, k);
        c.bench_function(&format!("named groups ({m},{k})"), |b| {
            b.iter(|| build_named_groups(black_box(&lat), default_cap(&lat)).unwrap())
        });
    }
}

fn locate(c: &mut Criterion) {
    let lat = lattice(4, 3);
    let points: Vec<PointS3> = (0..256)
        .map(|i| {
            let t = i as f64 * 0.37;
            PointS3::normalize([t.cos(), t.sin(), (1.3 * t).cos(), (0.7 * t).sin()].into()).unwrap()
        })
        .collect();
    c.bench_function("locate 256 points (4,3)", |b| {
        b.iter(|| points.iter().map(|p| lat.locate(p, Family::Omega).len()).sum::<usize>())
    });
}

fn disc(c: &mut Criterion) {
    let lat = lattice(3, 2);
    let mut g = c.benchmark_group("disc");
    g.sample_size(10);
    for level in [3, 4] {
        let opts = SolverOptions {
            level,
            ..Default::default()
        };
        g.bench_function(format!("solve level {level}"), |b| {
            b.iter(|| solve_disc(&lat, &opts).unwrap())
        });
    }
    let named = build_named_groups(&lat, default_cap(&lat)).unwrap();
    let (mesh, _) = solve_disc(
        &lat,
        &SolverOptions {
            level: 4,
            ..Default::default()
        },
    )
    .unwrap();
    g.bench_function("assemble level 4", |b| {
        b.iter(|| topology(&assemble(&lat, &mesh, &named.circles_q).unwrap().mesh).unwrap())
    });
    g.finish();
}

criterion_group!(benches, groups, locate, disc);
criterion_main!(benches);
