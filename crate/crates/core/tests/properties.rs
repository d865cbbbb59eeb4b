//! Property tests of the base automorphism, the fiber flows, the full map
//! and the affine blender model.

use std::sync::OnceLock;

use kan3::blender::{BlenderModel, CenterInterval, StripStep};
use kan3::bump::Bump1D;
use kan3::config::ExperimentConfig;
use kan3::construction::default_map;
use kan3::fields::FiberField;
use kan3::kan::{KanMap, SkewMap};
use kan3::perturb::Torus;
use kan3::rng::CounterRng;
use kan3::torus::{theta_distance, AnosovMap, Point3, TorusPoint2};
use proptest::prelude::*;

fn kan() -> &'static KanMap {
    static K: OnceLock<KanMap> = OnceLock::new();
    K.get_or_init(|| default_map(0.1).unwrap())
}

fn fiber_field() -> impl Strategy<Value = FiberField> {
    prop_oneof![
        (-1.0..1.0f64).prop_map(|b| FiberField::Sin1 { b }),
        (-1.0..1.0f64).prop_map(|b| FiberField::Sin2 { b }),
        (-1.0..1.0f64, 0.0..1.0f64).prop_map(|(b, w)| FiberField::Tube { b, w }),
        (-1.0..1.0f64).prop_map(|b| FiberField::Profile { b }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn automorphism_inverse_round_trip(x in 0.0..1.0f64, y in 0.0..1.0f64, n in -6i32..6) {
        let a = AnosovMap::from_matrix([[5, 2], [2, 1]]).unwrap();
        let p = TorusPoint2::new(x, y);
        prop_assert!(a.apply_inverse(a.apply(p)).distance(&p) < 1e-13);
        prop_assert!(a.iterate(a.iterate(p, n), -n).distance(&p) < 1e-9);
    }

    #[test]
    fn flow_group_law(f in fiber_field(), t1 in -0.3..0.3f64, t2 in -0.3..0.3f64, th in 0.0..1.0f64) {
        let s = kan().fields();
        let once = s.flow(&f, t1 + t2, th).unwrap();
        let twice = s.flow(&f, t2, s.flow(&f, t1, th).unwrap()).unwrap();
        prop_assert!((once - twice).abs() < 1e-9, "{once} {twice}");
    }

    #[test]
    fn flows_are_monotone_and_fix_the_endpoints(f in fiber_field(), t in -0.3..0.3f64, a in 0.0..1.0f64, b in 0.0..1.0f64) {
        prop_assume!((a - b).abs() > 1e-9);
        let s = kan().fields();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(s.flow(&f, t, lo).unwrap() < s.flow(&f, t, hi).unwrap());
        prop_assert_eq!(s.flow(&f, t, 0.0).unwrap(), 0.0);
        prop_assert_eq!(s.flow(&f, t, 1.0).unwrap(), 1.0);
        let back = s.flow_inverse(&f, t, s.flow(&f, t, a).unwrap()).unwrap();
        prop_assert!((back - a).abs() < 1e-9);
    }

    #[test]
    fn fiber_derivative_matches_finite_difference(f in fiber_field(), t in -0.3..0.3f64, th in 0.01..0.99f64) {
        let s = kan().fields();
        let h = 1e-6;
        let (_, d) = s.flow_with_derivative(&f, t, th).unwrap();
        let fd = (s.flow(&f, t, th + h).unwrap() - s.flow(&f, t, th - h).unwrap()) / (2.0 * h);
        prop_assert!((d - fd).abs() <= 1e-6 * d.abs().max(1.0), "{d} {fd}");
    }

    #[test]
    fn bump_values_in_unit_interval(x in -2.0..2.0f64) {
        let b = Bump1D { support: [-1.0, 1.0], plateau: [-0.25, 0.5] };
        let v = b.value(x);
        prop_assert!((0.0..=1.0).contains(&v));
        if (-0.25..=0.5).contains(&x) { prop_assert_eq!(v, 1.0); }
        if !(-1.0..=1.0).contains(&x) { prop_assert_eq!(v, 0.0); }
    }

    #[test]
    fn counter_rng_draws_are_unit_uniforms(seed in any::<u64>(), i in any::<u64>()) {
        let r = CounterRng::new(seed);
        let u = r.uniform_at(i);
        prop_assert!((0.0..1.0).contains(&u));
        prop_assert_eq!(u, r.uniform_at(i));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn map_swaps_fiber_halves(x in 0.0..1.0f64, y in 0.0..1.0f64, th in 0.001..0.999f64) {
        let k = kan();
        let up = k.apply(&Point3::from_coords(x, y, th)).unwrap();
        prop_assert!(up.theta > -1.0 && up.theta < 0.0);
        let down = k.apply(&Point3::from_coords(x, y, -th)).unwrap();
        prop_assert!(down.theta > 0.0 && down.theta < 1.0);
    }

    #[test]
    fn map_inverse_round_trip(x in 0.0..1.0f64, y in 0.0..1.0f64, th in -1.0..1.0f64) {
        let k = kan();
        let p = Point3::from_coords(x, y, th);
        let back = k.inverse(&k.apply(&p).unwrap()).unwrap();
        prop_assert!(back.base.distance(&p.base) < 1e-12);
        prop_assert!(theta_distance(back.theta, th) < 1e-9);
    }

    #[test]
    fn tori_are_invariant(x in 0.0..1.0f64, y in 0.0..1.0f64) {
        let k = kan();
        for t in [Torus::Zero, Torus::One] {
            let img = k.apply(&Point3::from_coords(x, y, t.level())).unwrap();
            prop_assert_eq!(theta_distance(img.theta, t.level()), 0.0);
        }
    }

    #[test]
    fn blender_branches_map_into_the_cube(i in 0usize..2, a in 0.0..1.0f64, b in 0.0..1.0f64, c in 0.0..1.0f64) {
        let m = BlenderModel::reference();
        let g = m.branch_boxes()[i];
        let p = [
            g.lo[0] + a * (g.hi[0] - g.lo[0]),
            g.lo[1] + b * (g.hi[1] - g.lo[1]),
            g.lo[2] + c * (g.hi[2] - g.lo[2]),
        ];
        let img = m.model_map(&p).unwrap();
        prop_assert!(img.iter().all(|v| v.abs() <= 2.0 + 1e-9), "{img:?}");
    }

    #[test]
    fn strip_steps_grow_by_mu_or_hit(a in 1e-6..0.999f64, w in 1e-7..0.5f64) {
        prop_assume!(a + w < 1.0);
        let m = BlenderModel::reference();
        let i = CenterInterval { a, b: a + w };
        match m.strip_step(&i).unwrap() {
            StripStep::Grown(n) => {
                prop_assert!((n.width() / w - m.mu).abs() < 1e-6 * m.mu);
                prop_assert!(n.a >= 0.0);
            }
            StripStep::HitsP => prop_assert!(a + w > 1.0 / m.mu && m.mu * (a - 1.0) + 1.0 < 0.0),
        }
    }

    #[test]
    fn config_round_trip(t in 0.0..1.0f64, seed in 0..=i64::MAX as u64, th0 in proptest::option::of(0.01..0.99f64), eta in 0.0..0.02f64, threads in proptest::option::of(1usize..16)) {
        let mut c = ExperimentConfig::default();
        c.t = t;
        c.seed = seed;
        c.theta0 = th0;
        c.perturb.eta = eta;
        c.threads = threads;
        let back = ExperimentConfig::parse_str(&c.to_toml()).unwrap();
        prop_assert_eq!(back, c);
    }
}
