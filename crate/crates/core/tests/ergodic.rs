//! Ergodic diagnostics checked against product systems whose answers are
//! known in closed form, plus invariants of the full map.

use std::f64::consts::PI;
use std::sync::OnceLock;

use kan3::construction::default_map;
use kan3::ergodic::*;
use kan3::kan::{KanMap, SkewMap};
use kan3::perturb::{su_torus_status, Torus, TorusStatus};
use kan3::torus::{theta_distance, wrap_theta, AnosovMap, Point3, TorusPoint2};
use proptest::prelude::*;

/// Cat map times a base-independent fiber map `θ ↦ θ − c·sin(2πθ)/(2π) + shift`.
struct Product {
    a: AnosovMap,
    c: f64,
    shift: f64,
}

impl Product {
    fn new(c: f64, shift: f64) -> Self {
        Self {
            a: AnosovMap::from_matrix([[5, 2], [2, 1]]).unwrap(),
            c,
            shift,
        }
    }

    fn fiber(&self, th: f64) -> f64 {
        wrap_theta(th - self.c * (2.0 * PI * th).sin() / (2.0 * PI) + self.shift)
    }
}

impl SkewMap for Product {
    fn anosov(&self) -> &AnosovMap {
        &self.a
    }

    fn fiber_jet(&self, _x: &TorusPoint2, th: f64) -> kan3::Result<(f64, f64)> {
        Ok((self.fiber(th), 1.0 - self.c * (2.0 * PI * th).cos()))
    }
}

fn kan() -> &'static KanMap {
    static K: OnceLock<KanMap> = OnceLock::new();
    K.get_or_init(|| default_map(0.1).unwrap())
}

#[test]
fn product_lyapunov_is_the_log_multiplier() {
    let g = Product::new(0.5, 0.0);
    let x0 = Point3::from_coords(0.123, 0.456, 0.0);
    let est = center_lyapunov(&g, &x0, 10_000).unwrap();
    assert!((est - 0.5f64.ln()).abs() < 1e-12, "{est}");
    assert!(center_lyapunov(&g, &x0, 0).is_err());
}

#[test]
fn product_basins_follow_the_fiber_sources() {
    let g = Product::new(0.5, 0.0);
    let spec = BasinSpec {
        nx: 6,
        ny: 5,
        ntheta: 12,
        samples_per_cell: 2,
        n: 300,
        tail: 50,
        delta: 0.05,
        seed: 3,
    };
    let grid = classify_basins(&g, &spec).unwrap();
    let mut expected = [0usize; 3];
    for cell in 0..spec.cells() {
        for s in 0..spec.samples_per_cell {
            let th = spec.sample(cell, s).theta;
            let want = if th.abs() < 0.5 {
                Label::Torus0
            } else {
                Label::Torus1
            };
            assert_eq!(
                grid.labels[cell * spec.samples_per_cell + s],
                want,
                "θ = {th}"
            );
            expected[want as usize - 1] += 1;
        }
    }
    assert_eq!(grid.counts(), [expected[0], expected[1], 0]);

    // three coarse fiber slabs [-1,-1/3), [-1/3,1/3), [1/3,1): the sources
    // at ±½ lie inside the outer two, the middle one drains to θ = 0
    let r = intermingled_test(&grid, [2, 1, 3], 0.0).unwrap();
    for (i, c) in r.per_cell.iter().enumerate() {
        if i % 3 == 1 {
            assert_eq!(c[1], 0, "cell {i}: {c:?}");
        } else {
            assert!(c[0] > 0 && c[1] > 0, "cell {i}: {c:?}");
        }
    }
    assert_eq!(r.cells_with_both, 4);
    assert_eq!(r.decided_rate, 1.0);
}

#[test]
fn product_gibbs_state_is_the_fiber_orbit_average() {
    let g = Product::new(0.5, 0.0);
    let seed = Point3::from_coords(0.3, 0.2, 0.7);
    assert_eq!(strong_unstable_slope(&g, &seed).unwrap(), 0.0);
    let n = 40;
    let m = push_u_disk(&g, &seed, 0.1, n, 25).unwrap();
    assert!((m.total_weight() - 1.0).abs() < 1e-12);
    let mut th = 0.7;
    let mut near = 0;
    for _ in 0..n {
        if theta_distance(th, 0.0) < 0.05 || theta_distance(th, 1.0) < 0.05 {
            near += 1;
        }
        th = g.fiber(th);
    }
    assert!((m.mass_near_tori(0.05) - near as f64 / n as f64).abs() < 1e-12);
    // every sample lies on the fiber orbit of the seed height
    for (p, _) in &m.samples {
        let mut t = 0.7;
        let hit = (0..n).any(|_| {
            let ok = (t - p.theta).abs() < 1e-12;
            t = g.fiber(t);
            ok
        });
        assert!(hit);
    }
}

#[test]
fn invariance_defect_is_at_most_two_over_n() {
    let seed = Point3::from_coords(0.37, 0.61, 0.4);
    for n in [10, 50] {
        let m = push_u_disk(kan(), &seed, 0.05, n, 50).unwrap();
        let d = m.invariance_defect(kan(), [8, 8, 16]).unwrap();
        assert!(d <= 2.0 / n as f64 + 1e-12, "n = {n}: {d}");
    }
}

#[test]
fn flip_certificate_on_products() {
    let swap = Product::new(0.0, 1.0);
    let c = flip_certificate(&swap, [0.05, 0.95], 1000, 0).unwrap();
    assert!(c.all_flip);
    let id = Product::new(0.0, 0.0);
    let c = flip_certificate(&id, [0.05, 0.95], 1000, 0).unwrap();
    assert_eq!(c.escapes, 1000);
    assert!(flip_certificate(&id, [0.5, 0.2], 10, 0).is_err());
}

#[test]
fn mixing_table_of_identity_fiber() {
    let id = Product::new(0.0, 0.0);
    let lo = Region3 {
        x: [0.0, 0.5],
        y: [0.0, 1.0],
        theta: [-1.0, -0.5],
    };
    let hi = Region3 {
        theta: [0.0, 0.5],
        x: [0.5, 1.0],
        ..lo
    };
    let same = Region3 {
        x: [0.5, 1.0],
        ..lo
    };
    let t = mixing_diagnostic(&id, &[(lo, hi), (lo, same)], 12, 400, 1).unwrap();
    assert!((1..=12).all(|n| !t.hit(0, n)));
    // the cat map mixes: half of the images of a base half land in the other half
    for n in 2..=12 {
        let frac = t.counts[1][n - 1] as f64 / 400.0;
        assert!((frac - 0.5).abs() < 0.12, "n = {n}: {frac}");
    }
    assert!(mixing_diagnostic(&id, &[(lo, hi)], 0, 10, 0).is_err());
}

#[test]
fn coverage_of_identity_fiber_stays_on_its_levels() {
    let id = Product::new(0.0, 0.0);
    let grid = CoverageGrid { n: [16, 16, 8] };
    let a = AnosovMap::from_matrix([[5, 2], [2, 1]]).unwrap();
    let one = CoverageObject::UnstableSurface {
        base: a.p,
        half_length: 0.01,
        levels: 1,
    };
    let r = manifold_coverage(&id, &one, 8, grid, 10_000_000).unwrap();
    assert_eq!(r.fraction, 0.125);
    let all = CoverageObject::UnstableSurface {
        base: a.p,
        half_length: 0.01,
        levels: 8,
    };
    let r = manifold_coverage(&id, &all, 8, grid, 10_000_000).unwrap();
    assert_eq!(r.fraction, 1.0);
}

#[test]
fn product_tori_are_continuations() {
    let g = Product::new(0.5, 0.0);
    for t in [Torus::Zero, Torus::One] {
        let d = su_torus_status(&g, t, 10, 1e-6).unwrap();
        assert_eq!(d.status, TorusStatus::Continuation);
    }
}

#[test]
fn tori_attract_on_average() {
    let x = Point3::from_coords(0.1234, 0.5678, 0.3);
    let end = kan().orbit(&x, 3000).unwrap()[3000];
    assert!(torus_distance(&end, Torus::Zero).min(torus_distance(&end, Torus::One)) < 0.05);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn birkhoff_of_a_coboundary_telescopes(x in 0.0..1.0f64, y in 0.0..1.0f64, th in -1.0..1.0f64, n in 1usize..200) {
        let k = kan();
        let g = |p: &Point3| (PI * p.theta).sin() + (2.0 * PI * p.base.x).cos();
        let x0 = Point3::from_coords(x, y, th);
        let avg = birkhoff(k, &x0, |p| g(&k.apply(p).unwrap()) - g(p), n).unwrap();
        let end = k.orbit(&x0, n).unwrap()[n];
        prop_assert!((avg - (g(&end) - g(&x0)) / n as f64).abs() < 1e-12);
    }

    #[test]
    fn u_disk_weights_sum_to_one(x in 0.0..1.0f64, y in 0.0..1.0f64, th in -1.0..1.0f64, n in 1usize..30, m in 1usize..30) {
        let seed = Point3::from_coords(x, y, th);
        let meas = push_u_disk(kan(), &seed, 0.02, n, m).unwrap();
        prop_assert_eq!(meas.samples.len(), n * m);
        prop_assert!((meas.total_weight() - 1.0).abs() < 1e-12);
        let h = meas.histogram([4, 4, 8]);
        prop_assert!((h.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn basin_samples_stay_in_their_cells(cell in 0usize..(64 * 64 * 17), s in 0usize..4) {
        let spec = BasinSpec::default();
        let p = spec.sample(cell, s);
        let k = cell % spec.ntheta;
        let j = (cell / spec.ntheta) % spec.ny;
        let i = cell / (spec.ntheta * spec.ny);
        prop_assert!((p.base.x * 64.0).floor() as usize == i);
        prop_assert!((p.base.y * 64.0).floor() as usize == j);
        prop_assert!(((p.theta + 1.0) * 17.0 / 2.0).floor() as usize == k);
    }
}
