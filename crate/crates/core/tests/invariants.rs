use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use proptest::prelude::*;
use rand::SeedableRng;

use lawson_core::groups::{build_named_groups, default_cap, NamedGroups};
use lawson_core::harness::RunConfig;
use lawson_core::lattice::{Family, Lattice, LatticeParams};
use lawson_core::s3core::{rotate_about, rotate_along, Vec4};
use lawson_core::surface::{export_pole, projection_basis, stereographic};
use lawson_core::{GreatCircle, PiRational, PointS3};

fn point() -> impl Strategy<Value = PointS3> {
    prop::array::uniform4(-1.0f64..1.0)
        .prop_filter("away from the origin", |c| c.iter().map(|x| x * x).sum::<f64>() > 1e-2)
        .prop_map(|c| PointS3::normalize(Vec4::from(c)).unwrap())
}

fn params() -> impl Strategy<Value = (i64, i64)> {
    prop::sample::select(vec![(3, 2), (4, 2), (3, 3), (4, 3)])
}

type Cached = ((i64, i64), (Lattice, NamedGroups));

fn lattice_and_groups(m: i64, k: i64) -> &'static (Lattice, NamedGroups) {
    static CACHE: OnceLock<Vec<Cached>> = OnceLock::new();
    let all = CACHE.get_or_init(|| {
        [(3, 2), (4, 2), (3, 3), (4, 3)]
            .into_iter()
            .map(|(m, k)| {
                let lat = Lattice::build(LatticeParams::new(m, k).unwrap());
                let g = build_named_groups(&lat, default_cap(&lat)).unwrap();
                ((m, k), (lat, g))
            })
            .collect()
    });
    &all.iter().find(|(p, _)| *p == (m, k)).unwrap().1
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rotation_about_a_circle_fixes_it(p in point(), q in point(), phi in 0.0..TAU, t in 0.0..TAU) {
        prop_assume!(p.chord(&q) > 1e-2 && p.chord(&q.antipode()) > 1e-2);
        let c = GreatCircle::through(&p, &q).unwrap();
        let r = rotate_about(&c, phi);
        let on = c.point_at(t);
        prop_assert!(r.apply(&on).chord(&on) < 1e-12);
        prop_assert!((r.det() - 1.0).abs() < 1e-12);
        let x = PointS3::normalize(p.coords() + q.coords() * 0.3 + Vec4::new(0.1, -0.2, 0.3, 0.4)).unwrap();
        prop_assert!((r.apply(&x).distance(&r.apply(&on)) - x.distance(&on)).abs() < 1e-9);
    }

    #[test]
    fn rotations_along_compose_additively(p in point(), q in point(), a in -PI..PI, b in -PI..PI) {
        prop_assume!(p.chord(&q) > 1e-2 && p.chord(&q.antipode()) > 1e-2);
        let c = GreatCircle::through(&p, &q).unwrap();
        let lhs = rotate_along(&c, a).compose(&rotate_along(&c, b));
        prop_assert!(lhs.distance(&rotate_along(&c, a + b)) < 1e-12);
    }

    #[test]
    fn every_point_lies_in_some_cell((m, k) in params(), p in point()) {
        let lat = &lattice_and_groups(m, k).0;
        for family in [Family::Omega, Family::OmegaShifted] {
            let cells = lat.locate(&p, family);
            prop_assert!(!cells.is_empty());
            for idx in cells {
                prop_assert!(lat.tetra(&idx).membership_with_tol(&p, 1e-9).inside);
            }
        }
    }

    #[test]
    fn group_elements_permute_cells((m, k) in params(), g in 0usize..1000, p in point(), seed in any::<u64>()) {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let (lat, groups) = lattice_and_groups(m, k);
        let g = groups.full.element(g % groups.full.order());
        for (_, tetra) in lat.cells(Family::Omega).take(8) {
            let image = g.apply(&tetra.centroid());
            let hits = lat.locate(&image, Family::Omega);
            prop_assert_eq!(hits.len(), 1);
            let target = lat.tetra(&hits[0]);
            prop_assert!(target.contains(&g.apply(&tetra.random_point(&mut rng))));
        }
        prop_assert!((g.apply(&p).distance(&g.apply(&PointS3::on_c(0.0))) - p.distance(&PointS3::on_c(0.0))).abs() < 1e-9);
    }

    #[test]
    fn group_is_closed_under_products((m, k) in params(), a in 0usize..1000, b in 0usize..1000) {
        let full = &lattice_and_groups(m, k).1.full;
        let (a, b) = (a % full.order(), b % full.order());
        let ab = full.multiply(a, b);
        prop_assert!(full.element(a).compose(full.element(b)).distance(full.element(ab)) < 1e-10);
        prop_assert_eq!(full.multiply(a, full.inverse(a)), full.index_of(&lawson_core::Isometry4::identity()).unwrap());
    }

    #[test]
    fn rational_angles_reduce_consistently(num in -500i64..500, den in 1i64..40) {
        let a = PiRational::new(num, den);
        let r = a.reduce_two_pi();
        prop_assert!(r.radians() >= 0.0 && r.radians() < TAU);
        prop_assert!(((a.radians() - r.radians()) / TAU).fract().abs() < 1e-9
            || (((a.radians() - r.radians()) / TAU).fract().abs() - 1.0).abs() < 1e-9);
        prop_assert!(a.eq_mod_pi(&(a + PiRational::ONE)));
    }

    #[test]
    fn stereographic_projection_is_conformal_at_the_antipode((m, k) in params(), p in point()) {
        let lat = &lattice_and_groups(m, k).0;
        let pole = export_pole(lat);
        prop_assume!(p.chord(&pole) > 1e-2);
        let basis = projection_basis(&pole);
        let x = stereographic(&pole, &basis, &p);
        // |x|² = (1 + p·P)/(1 − p·P)
        let d = p.dot(&pole);
        let n2: f64 = x.iter().map(|c| c * c).sum();
        prop_assert!((n2 - (1.0 + d) / (1.0 - d)).abs() < 1e-8 * (1.0 + n2));
    }

    #[test]
    fn config_text_round_trips(m in 3i64..9, k in 2i64..9, level in 2u32..7, seed in any::<u64>(), tg in 1e-14f64..1e-6) {
        let c = RunConfig { m, k, level, seed, tol_grad: tg, suite: "disc".into(), ..Default::default() };
        let mut d = RunConfig::default();
        d.merge_str(&c.to_kv_string()).unwrap();
        prop_assert_eq!(c, d);
    }
}
