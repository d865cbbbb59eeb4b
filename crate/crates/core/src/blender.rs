//! Affine blender-horseshoe model in chart coordinates `(x_s, x_u, x_c)` on
//! the cube `Γ = [-2, 2]³`, its certification, and the strip-width dichotomy.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kan::{KanMap, SkewMap};
use crate::rng::CounterRng;
use crate::torus::Point3;

/// Closed box `[lo, hi]` per coordinate, order `(s, u, c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Box3 {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl Box3 {
    pub fn contains(&self, p: &[f64; 3]) -> bool {
        (0..3).all(|i| p[i] >= self.lo[i] && p[i] <= self.hi[i])
    }

    pub fn is_empty(&self) -> bool {
        (0..3).any(|i| self.lo[i] > self.hi[i])
    }

    pub fn intersect(&self, o: &Box3) -> Box3 {
        let mut b = *self;
        for i in 0..3 {
            b.lo[i] = b.lo[i].max(o.lo[i]);
            b.hi[i] = b.hi[i].min(o.hi[i]);
        }
        b
    }

    pub fn disjoint(&self, o: &Box3) -> bool {
        (0..3).any(|i| self.hi[i] < o.lo[i] || o.hi[i] < self.lo[i])
    }
}

const HALF: f64 = 2.0;

fn cube() -> Box3 {
    Box3 {
        lo: [-HALF; 3],
        hi: [HALF; 3],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlenderModel {
    /// `λ^{2n₀}`.
    pub lambda_pow: f64,
    pub mu: f64,
    pub nu: f64,
    /// Cone size.
    pub eps0: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct GeometryReport {
    pub two_components: bool,
    pub branches_off_unstable_boundary: bool,
    pub images_off_strong_stable_boundary: bool,
    /// Distance from the stated saddle to the exact fixed point of its branch.
    pub saddle_p_error: f64,
    pub saddle_o_error: f64,
    pub all: bool,
}

/// Center footprint `[a, b]` of a vertical strip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CenterInterval {
    pub a: f64,
    pub b: f64,
}

impl CenterInterval {
    pub fn width(&self) -> f64 {
        self.b - self.a
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum StripStep {
    Grown(CenterInterval),
    HitsP,
}

#[derive(Debug, Clone, Serialize)]
pub struct DichotomyReport {
    pub samples: usize,
    pub max_iter: usize,
    pub failures: usize,
    pub bound_violations: usize,
    pub min_growth_ratio: f64,
    pub max_steps: usize,
    pub width_factor: f64,
}

impl BlenderModel {
    pub fn new(lambda_pow: f64, mu: f64) -> Self {
        Self {
            lambda_pow,
            mu,
            nu: mu - 1.0,
            eps0: 0.1,
        }
    }

    /// Default matrix with `n₀ = 3` and center multiplier `e^{0.6}`.
    pub fn reference() -> Self {
        let lambda = 3.0 + 2.0 * 2f64.sqrt();
        Self::new(lambda.powi(6), 0.6f64.exp())
    }

    /// Model matching a realized map.
    pub fn from_kan(k: &KanMap) -> Self {
        let p = &k.params;
        Self {
            lambda_pow: p.fields.chart.return_expansion(),
            mu: p.mu,
            nu: p.nu,
            eps0: 0.1,
        }
    }

    /// Width factor `λ′ = (μ + 1)/2`.
    pub fn width_factor(&self) -> f64 {
        0.5 * (self.mu + 1.0)
    }

    pub fn saddle_p(&self) -> [f64; 3] {
        [0.0; 3]
    }

    pub fn saddle_o(&self) -> [f64; 3] {
        let v = 1.0 / (1.0 - 1.0 / self.lambda_pow);
        [v, v, 1.0]
    }

    fn branch1(&self, p: &[f64; 3]) -> [f64; 3] {
        [
            p[0] / self.lambda_pow,
            self.lambda_pow * p[1],
            self.mu * p[2],
        ]
    }

    fn branch2(&self, p: &[f64; 3]) -> [f64; 3] {
        [
            p[0] / self.lambda_pow + 1.0,
            self.lambda_pow * (p[1] - 1.0),
            self.mu * (p[2] - 1.0) + 1.0,
        ]
    }

    /// Parts of `Γ` whose branch image stays in the u-slab `|x_u| ≤ 2`.
    pub fn slab_domains(&self) -> [Box3; 2] {
        let l = self.lambda_pow;
        let c = cube();
        let d1 = Box3 {
            lo: [-HALF, -HALF / l, -HALF],
            hi: [HALF, HALF / l, HALF],
        };
        let d2 = Box3 {
            lo: [-HALF, 1.0 - HALF / l, -HALF],
            hi: [HALF, 1.0 + HALF / l, HALF],
        };
        [d1.intersect(&c), d2.intersect(&c)]
    }

    fn image_box(&self, branch: usize, b: &Box3) -> Box3 {
        let f = |p: &[f64; 3]| {
            if branch == 0 {
                self.branch1(p)
            } else {
                self.branch2(p)
            }
        };
        let a = f(&b.lo);
        let z = f(&b.hi);
        let mut out = Box3 { lo: a, hi: z };
        for i in 0..3 {
            if out.lo[i] > out.hi[i] {
                std::mem::swap(&mut out.lo[i], &mut out.hi[i]);
            }
        }
        out
    }

    fn preimage_box(&self, branch: usize, b: &Box3) -> Box3 {
        let l = self.lambda_pow;
        let m = self.mu;
        let inv = |p: &[f64; 3]| -> [f64; 3] {
            if branch == 0 {
                [p[0] * l, p[1] / l, p[2] / m]
            } else {
                [(p[0] - 1.0) * l, p[1] / l + 1.0, (p[2] - 1.0) / m + 1.0]
            }
        };
        let mut out = Box3 {
            lo: inv(&b.lo),
            hi: inv(&b.hi),
        };
        for i in 0..3 {
            if out.lo[i] > out.hi[i] {
                std::mem::swap(&mut out.lo[i], &mut out.hi[i]);
            }
        }
        out
    }

    /// `Γᵢ = f⁻¹(f(Γ̃ᵢ) ∩ Γ)`, exact.
    pub fn branch_boxes(&self) -> [Box3; 2] {
        let d = self.slab_domains();
        let c = cube();
        [0, 1].map(|i| {
            let img = self.image_box(i, &d[i]).intersect(&c);
            self.preimage_box(i, &img).intersect(&d[i])
        })
    }

    pub fn model_map(&self, p: &[f64; 3]) -> Result<[f64; 3]> {
        let [g1, g2] = self.branch_boxes();
        if g1.contains(p) {
            Ok(self.branch1(p))
        } else if g2.contains(p) {
            Ok(self.branch2(p))
        } else {
            Err(Error::OutsideBranches)
        }
    }

    pub fn certify_geometry(&self) -> GeometryReport {
        let d = self.slab_domains();
        let images = [self.image_box(0, &d[0]), self.image_box(1, &d[1])];
        // each image must cross the cube in the center and unstable directions
        let crosses = images.iter().all(|b| {
            b.lo[1] <= -HALF + 1e-9 && b.hi[1] >= HALF - 1e-9 && b.lo[2] <= -HALF && b.hi[2] >= HALF
        });
        let inside_s = images.iter().all(|b| b.lo[0] > -HALF && b.hi[0] < HALF);
        let off_uu = d.iter().all(|b| b.lo[1] > -HALF && b.hi[1] < HALF);
        let two_components = images[0].disjoint(&images[1]) && crosses && inside_s && off_uu;
        let g = self.branch_boxes();
        let strictly_inside = |lo: f64, hi: f64| lo > -HALF && hi < HALF;
        let branches_off_unstable_boundary = g.iter().all(|b| {
            !b.is_empty() && strictly_inside(b.lo[1], b.hi[1]) && strictly_inside(b.lo[2], b.hi[2])
        });
        let images_off_strong_stable_boundary = (0..2).all(|i| {
            let im = self.image_box(i, &g[i]);
            strictly_inside(im.lo[0], im.hi[0])
        });
        // distance to the exact fixed point: the affine residual divided by
        // the contraction/expansion gap of each coordinate
        let gap = [
            1.0 - 1.0 / self.lambda_pow,
            self.lambda_pow - 1.0,
            self.mu - 1.0,
        ];
        let err = |p: [f64; 3], q: [f64; 3]| {
            (0..3)
                .map(|i| (p[i] - q[i]).abs() / gap[i].abs())
                .fold(0.0, f64::max)
        };
        let p = self.saddle_p();
        let o = self.saddle_o();
        let saddle_p_error = err(self.branch1(&p), p);
        let saddle_o_error = err(self.branch2(&o), o);
        let all = two_components
            && branches_off_unstable_boundary
            && images_off_strong_stable_boundary
            && saddle_p_error <= 1e-12
            && saddle_o_error <= 1e-12;
        GeometryReport {
            two_components,
            branches_off_unstable_boundary,
            images_off_strong_stable_boundary,
            saddle_p_error,
            saddle_o_error,
            all,
        }
    }

    /// Strict invariance of the `uu`, `u` and `ss` cones of size `eps0` under
    /// the diagonal differential, with expansion by at least `λ′` on the
    /// u-cone and uniform expansion of the ss-cone under the inverse.
    pub fn certify_cones(&self, eps0: f64) -> bool {
        if !(eps0 > 0.0) {
            return false;
        }
        let l = self.lambda_pow;
        let m = self.mu;
        let uu = m.max(1.0 / l) / l < 1.0;
        let u = l * m.min(l) > 1.0;
        let u_growth = m.min(l) / (1.0 + eps0 * eps0).sqrt() >= self.width_factor()
            && self.width_factor() > 1.0;
        let ss = (1.0 / m).max(1.0 / l) < l;
        let ss_growth = l / (1.0 + eps0 * eps0).sqrt() > 1.0;
        uu && u && u_growth && ss && ss_growth
    }

    pub fn strip_step(&self, i: &CenterInterval) -> Result<StripStep> {
        if !(i.a > 0.0 && i.b < 1.0 && i.a < i.b) {
            return Err(Error::InvalidInterval(i.a, i.b));
        }
        let m = self.mu;
        if i.b <= 1.0 / m {
            return Ok(StripStep::Grown(CenterInterval {
                a: m * i.a,
                b: m * i.b,
            }));
        }
        let a = m * (i.a - 1.0) + 1.0;
        let b = m * (i.b - 1.0) + 1.0;
        if a >= 0.0 {
            Ok(StripStep::Grown(CenterInterval { a, b }))
        } else {
            Ok(StripStep::HitsP)
        }
    }

    /// Steps allowed for an interval of width `w0` to reach `P`.
    pub fn hit_bound(&self, w0: f64) -> usize {
        (((1.0 - 1.0 / self.mu) / w0).ln() / self.mu.ln())
            .ceil()
            .max(0.0) as usize
            + 2
    }

    pub fn verify_dichotomy(
        &self,
        n_samples: usize,
        max_iter: usize,
        seed: u64,
    ) -> DichotomyReport {
        let rng = CounterRng::new(seed);
        let lp = self.width_factor();
        let results: Vec<(bool, bool, f64, usize)> = (0..n_samples as u64)
            .into_par_iter()
            .map(|k| {
                let w = (1e-6f64.ln() + (0.3f64.ln() - 1e-6f64.ln()) * rng.uniform_at(2 * k)).exp();
                let a = rng.uniform_at(2 * k + 1) * (1.0 - w);
                let mut cur = CenterInterval {
                    a: a.max(1e-300),
                    b: a + w,
                };
                let bound = self.hit_bound(w);
                let mut ratio = f64::INFINITY;
                for step in 1..=max_iter {
                    match self.strip_step(&cur) {
                        Ok(StripStep::HitsP) => return (true, step <= bound, ratio, step),
                        Ok(StripStep::Grown(next)) => {
                            ratio = ratio.min(next.width() / cur.width());
                            cur = next;
                        }
                        Err(_) => return (false, false, ratio, step),
                    }
                }
                (false, false, ratio, max_iter)
            })
            .collect();
        DichotomyReport {
            samples: n_samples,
            max_iter,
            failures: results.iter().filter(|r| !r.0).count()
                + results.iter().filter(|r| r.2 < lp - 1e-9).count(),
            bound_violations: results.iter().filter(|r| !r.1).count(),
            min_growth_ratio: results.iter().map(|r| r.2).fold(f64::INFINITY, f64::min),
            max_steps: results.iter().map(|r| r.3).max().unwrap_or(0),
            width_factor: lp,
        }
    }

    /// Whether a sampled curve in `Γ` is a vertical disk lying strictly
    /// between the local stable sets of `P` (x_c = 0) and `O` (x_c = 1).
    pub fn superposition_member(&self, segment: &[[f64; 3]]) -> Result<bool> {
        if segment.len() < 2 {
            return Err(Error::TooFewSamples);
        }
        let tol = 1e-9;
        let first = segment[0];
        let last = segment[segment.len() - 1];
        let reaches = (first[1].abs() >= HALF - tol && last[1].abs() >= HALF - tol)
            && first[1].signum() != last[1].signum();
        let footprint = segment
            .iter()
            .all(|p| p[2] > 0.0 && p[2] < 1.0 && p[0].abs() < HALF);
        let in_cone = segment.windows(2).all(|w| {
            let d = [w[1][0] - w[0][0], w[1][1] - w[0][1], w[1][2] - w[0][2]];
            d[0].hypot(d[2]) <= self.eps0 * d[1].abs()
        });
        Ok(reaches && footprint && in_cone)
    }

    /// Sup-norm discrepancy between `K^{2n₀}` in chart coordinates and the
    /// affine model, over points sampled in `Γ1 ∪ Γ2` (center restricted to
    /// `[-2, 2]`).
    pub fn consistency_with_kan(&self, k: &KanMap, n_samples: usize, seed: u64) -> Result<f64> {
        let rng = CounterRng::new(seed);
        let g = self.branch_boxes();
        let n_iter = 2 * k.params.n0 as usize;
        let errors: Result<Vec<f64>> = (0..n_samples as u64)
            .into_par_iter()
            .map(|i| {
                let b = &g[(i % 2) as usize];
                let mut p = [0.0; 3];
                for (j, v) in p.iter_mut().enumerate() {
                    *v = b.lo[j] + (b.hi[j] - b.lo[j]) * rng.uniform_at(3 * i + j as u64);
                }
                if i == 0 {
                    p = self.saddle_p();
                }
                self.discrepancy(k, &p, n_iter)
            })
            .collect();
        Ok(errors?.into_iter().fold(0.0, f64::max))
    }

    fn discrepancy(&self, k: &KanMap, p: &[f64; 3], n_iter: usize) -> Result<f64> {
        let params = &k.params;
        let (base, theta) = params.from_chart3(*p);
        if !(theta > 0.0 && theta < 1.0) || params.fields.chart.to_chart(&base).0.abs() > 3.0 {
            return Err(Error::OutOfWindow);
        }
        let mut x = Point3 { base, theta };
        for _ in 0..n_iter {
            x = k.apply(&x)?;
        }
        let got = params.chart3(&x.base, x.theta);
        let want = self.model_map(p)?;
        Ok((0..3).map(|i| (got[i] - want[i]).abs()).fold(0.0, f64::max))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_points_of_reference_model() {
        let m = BlenderModel::reference();
        assert!((m.lambda_pow - 39201.99997).abs() < 1e-3);
        let o = m.saddle_o();
        assert!((o[0] - 1.0000255).abs() < 1e-7);
        let img = m.model_map(&o).unwrap();
        // x_u = L(x_u − 1) amplifies the rounding of O by L
        assert!((img[0] - o[0]).abs() < 1e-12 && (img[2] - o[2]).abs() < 1e-12);
        assert!((img[1] - o[1]).abs() < 1e-12 * m.lambda_pow);
        let g = m.certify_geometry();
        assert!(g.saddle_o_error < 1e-12 && g.saddle_p_error == 0.0);
        assert_eq!(m.model_map(&[0.0; 3]).unwrap(), [0.0; 3]);
        let y = m.model_map(&[0.0, 0.0, 0.1]).unwrap();
        assert!((y[2] - 0.18221188).abs() < 1e-8);
    }

    #[test]
    fn exact_branch_preimages() {
        let m = BlenderModel::reference();
        let [g1, g2] = m.branch_boxes();
        assert!((g1.hi[2] - 2.0 / m.mu).abs() < 1e-15);
        assert!((g2.lo[2] - (1.0 - 3.0 / m.mu)).abs() < 1e-15);
        assert!((g2.hi[2] - (1.0 + 1.0 / m.mu)).abs() < 1e-15);
        assert!((g2.lo[1] - (1.0 - 2.0 / m.lambda_pow)).abs() < 1e-15);
        assert!(matches!(
            m.model_map(&[0.0, 0.5, 0.0]),
            Err(Error::OutsideBranches)
        ));
    }

    #[test]
    fn geometry_certificates() {
        assert!(BlenderModel::reference().certify_geometry().all);
        assert!(
            !BlenderModel::new(39201.97, 0.9)
                .certify_geometry()
                .two_components
        );
        let degenerate = BlenderModel::new(1.0, 1.8221).certify_geometry();
        assert!(!degenerate.two_components);
        assert!(!degenerate.all);
    }

    #[test]
    fn cone_certificates() {
        let m = BlenderModel::reference();
        assert!(m.certify_cones(0.1));
        assert!(m.certify_cones(0.05));
        assert!(!m.certify_cones(10.0));
        assert!(!BlenderModel::new(1.0, 1.0).certify_cones(0.1));
    }

    #[test]
    fn strip_steps() {
        let m = BlenderModel::new(39201.97, 1.8221188);
        let g = |a, b| m.strip_step(&CenterInterval { a, b }).unwrap();
        match g(0.1, 0.2) {
            StripStep::Grown(i) => {
                assert!((i.a - 0.18221188).abs() < 1e-12 && (i.b - 0.36442376).abs() < 1e-12)
            }
            _ => panic!(),
        }
        match g(0.9, 0.95) {
            StripStep::Grown(i) => {
                assert!((i.a - 0.8177881).abs() < 1e-7 && (i.b - 0.9088941).abs() < 1e-7);
                assert!((i.width() - 0.0911059).abs() < 1e-7);
            }
            _ => panic!(),
        }
        assert_eq!(g(0.3, 0.6), StripStep::HitsP);
        assert!(m.strip_step(&CenterInterval { a: -0.1, b: 0.5 }).is_err());
    }

    #[test]
    fn wide_strips_hit_quickly() {
        let m = BlenderModel::reference();
        let w = 1.0 - 1.0 / m.mu + 0.01;
        let mut cur = CenterInterval { a: 0.2, b: 0.2 + w };
        let mut steps = 0;
        loop {
            steps += 1;
            match m.strip_step(&cur).unwrap() {
                StripStep::HitsP => break,
                StripStep::Grown(n) => cur = n,
            }
        }
        assert!(steps <= 2);
    }

    #[test]
    fn superposition_cases() {
        let m = BlenderModel::reference();
        let seg = |f: &dyn Fn(f64) -> [f64; 3]| -> Vec<[f64; 3]> {
            (0..=20).map(|i| f(-2.0 + 0.2 * i as f64)).collect()
        };
        assert!(m.superposition_member(&seg(&|u| [0.0, u, 0.5])).unwrap());
        assert!(!m
            .superposition_member(&seg(&|u| [0.0, u, 0.1 * u]))
            .unwrap());
        assert!(!m
            .superposition_member(&seg(&|u| [0.0, u, 0.5 + 0.24 * u]))
            .unwrap());
        assert!(matches!(
            m.superposition_member(&[[0.0; 3]]),
            Err(Error::TooFewSamples)
        ));
    }
}
