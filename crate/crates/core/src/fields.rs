//! Vertical vector fields on 𝕋²×[0,1] and their time-t fiber flows.

use std::f64::consts::PI;

use crate::bump::{radial, smooth_step, Bump1D, MidBand, SignProfile};
use crate::chart::AdaptedChart;
use crate::error::{Error, Result};
use crate::layout::DomainLayout;
use crate::shapes::EigenBox;
use crate::torus::TorusPoint2;

/// The fiber field over a single base point, `θ ↦ c(θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FiberField {
    Zero,
    /// `b·sin(πθ)`.
    Sin1 {
        b: f64,
    },
    /// `b·sin(2πθ)`.
    Sin2 {
        b: f64,
    },
    /// `b·(w·β₁(θ) + 1 − w)·sin(2πθ)` on the tubes.
    Tube {
        b: f64,
        w: f64,
    },
    /// `b·β₂(θ)`.
    Profile {
        b: f64,
    },
}

/// Which domain a base point falls in, with its bump weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BaseRegion {
    Outside,
    Sink {
        alpha: f64,
    },
    Source {
        alpha: f64,
    },
    Fixed {
        weight: f64,
    },
    Double {
        alpha: f64,
    },
    /// Inside `A^index(U(C2))`; `w` blends towards the β₁-modulated field
    /// (only below 1 on `U(C2)` itself).
    Tube {
        index: usize,
        alpha: f64,
        w: f64,
    },
}

const GRID: usize = 1024;

#[derive(Clone, Copy, PartialEq, Eq)]
enum Cell {
    Complex,
    Zero,
    Double,
}

/// Field data plus a lookup grid that short-cuts evaluation on cells
/// lying entirely in `U1` or entirely off every support.
#[derive(Clone)]
pub struct FieldSpec {
    pub layout: DomainLayout,
    pub chart: AdaptedChart,
    pub mid_band: MidBand,
    pub sign_profile: SignProfile,
    /// Linearization rate of `-sin 2πθ` at `θ = ½`.
    pub kappa: f64,
    /// Radii `(inner, outer)` of the `α₂` disk around `q`.
    pub q_weight_radii: (f64, f64),
    cells: Vec<Cell>,
}

impl std::fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FieldSpec")
            .field("mid_band", &self.mid_band)
            .field("sign_profile", &self.sign_profile)
            .field("kappa", &self.kappa)
            .field("q_weight_radii", &self.q_weight_radii)
            .finish_non_exhaustive()
    }
}

fn box_weight(b: &EigenBox, plateau: &EigenBox, s: f64, u: f64) -> f64 {
    let bs = Bump1D {
        support: [-b.half_s, b.half_s],
        plateau: [-plateau.half_s, plateau.half_s],
    };
    let bu = Bump1D {
        support: [-b.half_u, b.half_u],
        plateau: [-plateau.half_u, plateau.half_u],
    };
    bs.value(s) * bu.value(u)
}

impl FieldSpec {
    pub fn new(layout: DomainLayout, chart: AdaptedChart, theta0: f64) -> Self {
        let eps = layout.params.epsilon;
        let rho = layout.u_q.radius;
        let mut spec = Self {
            mid_band: MidBand { epsilon: eps },
            sign_profile: SignProfile {
                theta0,
                epsilon: eps,
            },
            kappa: 2.0 * PI,
            q_weight_radii: (0.5 * rho, rho),
            layout,
            chart,
            cells: Vec::new(),
        };
        spec.cells = spec.build_cells();
        spec
    }

    /// Same fields with a different zero of β₂.
    pub fn with_theta0(&self, theta0: f64) -> Self {
        let mut out = self.clone();
        out.sign_profile.theta0 = theta0;
        out
    }

    pub fn theta0(&self) -> f64 {
        self.sign_profile.theta0
    }

    pub fn epsilon(&self) -> f64 {
        self.layout.params.epsilon
    }

    fn build_cells(&self) -> Vec<Cell> {
        let h = 1.0 / GRID as f64;
        let half_diag = h * std::f64::consts::FRAC_1_SQRT_2;
        let l = &self.layout;
        (0..GRID * GRID)
            .map(|k| {
                let (i, j) = (k / GRID, k % GRID);
                let c = TorusPoint2::new((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
                let d = l.obstacle_distance(&c);
                if d > l.delta_outer + half_diag {
                    Cell::Double
                } else if d > half_diag && d + half_diag < l.delta_inner {
                    Cell::Zero
                } else {
                    Cell::Complex
                }
            })
            .collect()
    }

    /// Full region classification without the lookup grid.
    pub fn classify_exact(&self, x: &TorusPoint2) -> BaseRegion {
        let l = &self.layout;
        let a = &l.anosov;
        let rho = l.u_r.radius;
        let dr = l.u_r.center.distance(x);
        if dr < rho {
            return BaseRegion::Sink {
                alpha: radial(dr, 0.5 * rho, rho),
            };
        }
        let ds = l.u_s.center.distance(x);
        if ds < l.u_s.radius {
            return BaseRegion::Source {
                alpha: radial(ds, 0.5 * l.u_s.radius, l.u_s.radius),
            };
        }
        let dq = l.u_q.center.distance(x);
        if dq < l.u_q.radius {
            let (inner, outer) = self.q_weight_radii;
            return BaseRegion::Fixed {
                weight: radial(dq, inner, outer),
            };
        }
        if l.u_c.contains(a, x) {
            let (s, u) = l.u_c.local(a, x);
            let alpha = box_weight(&l.u_c, &l.c, s, u);
            let t0 = &l.tubes[0];
            if t0.contains(a, x) {
                let (s, u) = t0.local(a, x);
                let w = box_weight(t0, &l.c2_orbit[0], s, u);
                return BaseRegion::Tube { index: 0, alpha, w };
            }
            return BaseRegion::Double { alpha };
        }
        for (i, t) in l.tubes.iter().enumerate().skip(1) {
            if t.contains(a, x) {
                let (s, u) = t.local(a, x);
                return BaseRegion::Tube {
                    index: i,
                    alpha: box_weight(t, &l.c2_orbit[i], s, u),
                    w: 1.0,
                };
            }
        }
        let d = l.obstacle_distance(x);
        if d > l.delta_inner {
            BaseRegion::Double {
                alpha: smooth_step((d - l.delta_inner) / (l.delta_outer - l.delta_inner)),
            }
        } else {
            BaseRegion::Outside
        }
    }

    /// Region classification with the lookup-grid fast path.
    #[inline]
    pub fn classify(&self, x: &TorusPoint2) -> BaseRegion {
        let i = ((x.x * GRID as f64) as usize).min(GRID - 1);
        let j = ((x.y * GRID as f64) as usize).min(GRID - 1);
        match self.cells[i * GRID + j] {
            Cell::Double => BaseRegion::Double { alpha: 1.0 },
            Cell::Zero => BaseRegion::Outside,
            Cell::Complex => self.classify_exact(x),
        }
    }

    /// Fiber field of `𝒳` over a region (the `𝒴` part is separate).
    pub fn x_field(&self, r: &BaseRegion) -> FiberField {
        match *r {
            BaseRegion::Sink { alpha } => FiberField::Sin1 { b: -alpha },
            BaseRegion::Source { alpha } => FiberField::Sin1 { b: alpha },
            BaseRegion::Double { alpha } => FiberField::Sin2 { b: -alpha },
            BaseRegion::Tube { alpha, w, .. } => FiberField::Tube { b: -alpha, w },
            BaseRegion::Fixed { .. } | BaseRegion::Outside => FiberField::Zero,
        }
    }

    /// Fiber field of `𝒴` over a region.
    pub fn y_field(&self, r: &BaseRegion) -> FiberField {
        match *r {
            BaseRegion::Fixed { weight } if weight > 0.0 => FiberField::Profile { b: weight },
            _ => FiberField::Zero,
        }
    }

    /// θ-component of `𝒳` at `(x, θ)`, `θ ∈ [0, 1]`.
    pub fn eval_x(&self, x: &TorusPoint2, theta: f64) -> f64 {
        self.rate(&self.x_field(&self.classify(x)), theta).0
    }

    /// θ-component of `𝒴` at `(x, θ)`.
    pub fn eval_y(&self, x: &TorusPoint2, theta: f64) -> f64 {
        self.rate(&self.y_field(&self.classify(x)), theta).0
    }

    /// Field value and its θ-derivative.
    #[inline]
    pub fn rate(&self, f: &FiberField, th: f64) -> (f64, f64) {
        match *f {
            FiberField::Zero => (0.0, 0.0),
            FiberField::Sin1 { b } => {
                let (s, c) = (PI * th).sin_cos();
                (b * s, b * PI * c)
            }
            FiberField::Sin2 { b } => {
                let (s, c) = (2.0 * PI * th).sin_cos();
                (b * s, 2.0 * PI * b * c)
            }
            FiberField::Tube { b, w } => {
                let (s, c) = (2.0 * PI * th).sin_cos();
                let g = w * self.mid_band.value(th) + 1.0 - w;
                let dg = w * self.mid_band.deriv(th);
                (b * g * s, b * (dg * s + 2.0 * PI * g * c))
            }
            FiberField::Profile { b } => (
                b * self.sign_profile.value(th),
                b * self.sign_profile.deriv(th),
            ),
        }
    }

    /// Time-`t` fiber flow.
    #[inline]
    pub fn flow(&self, f: &FiberField, t: f64, th: f64) -> Result<f64> {
        Ok(self.flow_with_derivative(f, t, th)?.0)
    }

    /// Time-`t` fiber flow and its θ-derivative.
    pub fn flow_with_derivative(&self, f: &FiberField, t: f64, th: f64) -> Result<(f64, f64)> {
        if t == 0.0 {
            return Ok((th, 1.0));
        }
        if th == 0.0 || th == 1.0 {
            return Ok((th, (t * self.rate(f, th).1).exp()));
        }
        match *f {
            FiberField::Zero => Ok((th, 1.0)),
            FiberField::Sin1 { b } => Ok(sine_flow(1.0, b, t, th)),
            FiberField::Sin2 { b } => Ok(sine_flow(2.0, b, t, th)),
            FiberField::Tube { b, w } => {
                let eps = self.mid_band.epsilon;
                let plateau = |v: f64| (v - 0.5).abs() < eps;
                if plateau(th) {
                    let out = sine_flow(2.0, b, t, th);
                    if plateau(out.0) {
                        return Ok(out);
                    }
                }
                let edge = |v: f64| v <= eps || v >= 1.0 - eps;
                if edge(th) {
                    let out = sine_flow(2.0, b * (1.0 - w), t, th);
                    if edge(out.0) && (out.0 <= eps) == (th <= eps) {
                        return Ok(out);
                    }
                }
                rk4_adaptive(|v| self.rate(f, v), t, th)
            }
            FiberField::Profile { b } => {
                let eps = self.sign_profile.epsilon;
                // β₂ is exactly θ (resp. θ−1) on the end bands
                let g = (b * t).exp();
                if th <= eps && th * g <= eps {
                    return Ok((th * g, g));
                }
                if th >= 1.0 - eps && 1.0 - (1.0 - th) * g >= 1.0 - eps {
                    return Ok((1.0 - (1.0 - th) * g, g));
                }
                rk4_adaptive(|v| self.rate(f, v), t, th)
            }
        }
    }

    /// Inverse of the time-`t` flow.
    pub fn flow_inverse(&self, f: &FiberField, t: f64, th: f64) -> Result<f64> {
        self.flow(f, -t, th)
    }
}

/// Closed-form flow of `b·sin(π m θ)` (m = 1 or 2) on `[0, 1]`: with `ψ = mθ`,
/// `tan(πψ/2)` gets multiplied by `exp(π m b t)`.
#[inline]
pub fn sine_flow(m: f64, b: f64, t: f64, th: f64) -> (f64, f64) {
    let k = (PI * m * b * t).exp();
    let (s, c) = (0.5 * PI * m * th).sin_cos();
    let out = (2.0 / PI) * (k * s).atan2(c) / m;
    (out, k / (c * c + k * k * s * s))
}

fn rk4_pass<F: Fn(f64) -> (f64, f64)>(rate: &F, t: f64, th: f64, n: usize) -> (f64, f64) {
    let h = t / n as f64;
    let (mut y, mut v) = (th, 1.0);
    for _ in 0..n {
        let (k1, d1) = rate(y);
        let (k2, d2) = rate(y + 0.5 * h * k1);
        let (k3, d3) = rate(y + 0.5 * h * k2);
        let (k4, d4) = rate(y + h * k3);
        let l1 = d1 * v;
        let l2 = d2 * (v + 0.5 * h * l1);
        let l3 = d3 * (v + 0.5 * h * l2);
        let l4 = d4 * (v + h * l3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        v += h / 6.0 * (l1 + 2.0 * l2 + 2.0 * l3 + l4);
    }
    (y, v)
}

/// RK4 with the variational equation; 64 steps per unit time, doubled until
/// successive results agree to 1e-10, at most 2¹⁴ steps.
pub fn rk4_adaptive<F: Fn(f64) -> (f64, f64)>(rate: F, t: f64, th: f64) -> Result<(f64, f64)> {
    let mut n = ((64.0 * t.abs()).ceil() as usize).max(1);
    let mut prev = rk4_pass(&rate, t, th, n);
    loop {
        n *= 2;
        if n > 1 << 14 {
            return Err(Error::IntegratorDivergence);
        }
        let cur = rk4_pass(&rate, t, th, n);
        if (cur.0 - prev.0).abs() < 1e-10 && (cur.1 - prev.1).abs() < 1e-10 * cur.1.abs().max(1.0) {
            return Ok(cur);
        }
        prev = cur;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chart::homoclinic_chart;
    use crate::layout::{build_layout, LayoutParams};
    use crate::rng::CounterRng;
    use crate::torus::AnosovMap;

    fn spec() -> FieldSpec {
        let a = AnosovMap::from_matrix([[5, 2], [2, 1]]).unwrap();
        let c = homoclinic_chart(&a, [1, 0], 3, 6).unwrap();
        let mut p = LayoutParams::new(0.05);
        p.quadrature = 256;
        let l = build_layout(&c, p).unwrap();
        FieldSpec::new(l, c, 0.5)
    }

    #[test]
    fn branch_values_at_fixed_points() {
        let f = spec();
        let l = &f.layout;
        assert!((f.eval_x(&l.anosov.s, 0.5) - 1.0).abs() < 1e-15);
        assert!((f.eval_x(&l.anosov.r, 0.5) + 1.0).abs() < 1e-15);
        assert_eq!(f.eval_x(&l.anosov.q, 0.3), 0.0);
        // a point in the margin between U(q) and U2 carries no field
        let x = l
            .anosov
            .q
            .translate([l.u_q.radius + 0.5 * l.delta_inner, 0.0]);
        assert_eq!(f.classify(&x), BaseRegion::Outside);
        assert_eq!(f.eval_x(&x, 0.3), 0.0);
        assert_eq!(f.eval_y(&x, 0.3), 0.0);
    }

    #[test]
    fn lookup_grid_agrees_with_exact_classification() {
        let f = spec();
        let rng = CounterRng::new(3);
        for i in 0..20_000u64 {
            let x = TorusPoint2::new(rng.uniform_at(2 * i), rng.uniform_at(2 * i + 1));
            assert_eq!(f.classify(&x), f.classify_exact(&x));
        }
    }

    #[test]
    fn closed_form_sine_flow() {
        let (th, _) = sine_flow(1.0, 1.0, 0.1, 0.5);
        let oracle = (2.0 / PI) * (0.1 * PI).exp().atan();
        assert!((th - oracle).abs() < 1e-15);
        assert!((th - 0.598_394_5).abs() < 1e-7);
        let rk = rk4_adaptive(|v| ((PI * v).sin(), PI * (PI * v).cos()), 0.1, 0.5).unwrap();
        assert!((rk.0 - oracle).abs() < 1e-10);
    }

    #[test]
    fn closed_form_matches_rk4_on_all_sine_branches() {
        let rng = CounterRng::new(11);
        for i in 0..500u64 {
            let th = rng.uniform_at(3 * i);
            let b = rng.range_at(3 * i + 1, -1.0, 1.0);
            let t = rng.range_at(3 * i + 2, -0.3, 0.3);
            for m in [1.0, 2.0] {
                let cf = sine_flow(m, b, t, th);
                let rk = rk4_adaptive(
                    |v| (b * (PI * m * v).sin(), b * PI * m * (PI * m * v).cos()),
                    t,
                    th,
                )
                .unwrap();
                assert!((cf.0 - rk.0).abs() < 1e-10, "{m} {b} {t} {th}");
                assert!((cf.1 - rk.1).abs() < 1e-8 * cf.1.max(1.0));
            }
        }
    }

    #[test]
    fn sink_multiplier_at_r() {
        let f = spec();
        let ff = f.x_field(&f.classify(&f.layout.anosov.r));
        let (th, d) = f.flow_with_derivative(&ff, 0.1, 0.0).unwrap();
        assert_eq!(th, 0.0);
        assert!((d - (-0.1 * PI).exp()).abs() < 1e-15);
        assert_eq!(f.flow_with_derivative(&ff, 0.0, 0.3).unwrap(), (0.3, 1.0));
    }

    fn sample_fields(f: &FieldSpec) -> Vec<FiberField> {
        vec![
            FiberField::Sin1 { b: -0.7 },
            FiberField::Sin1 { b: 1.0 },
            FiberField::Sin2 { b: -0.4 },
            FiberField::Tube { b: -1.0, w: 1.0 },
            FiberField::Tube { b: -0.8, w: 0.3 },
            FiberField::Profile { b: 0.9 },
            f.x_field(&f.classify(&f.layout.anosov.s)),
        ]
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let f = spec();
        let rng = CounterRng::new(5);
        for ff in sample_fields(&f) {
            for i in 0..40u64 {
                let th = rng.range_at(i, 0.01, 0.99);
                let (_, d) = f.flow_with_derivative(&ff, 0.1, th).unwrap();
                let h = 1e-6;
                let fd = (f.flow(&ff, 0.1, th + h).unwrap() - f.flow(&ff, 0.1, th - h).unwrap())
                    / (2.0 * h);
                assert!(
                    (d - fd).abs() < 1e-6 * d.abs().max(1.0),
                    "{ff:?} {th} {d} {fd}"
                );
            }
        }
    }

    #[test]
    fn group_law_endpoints_and_monotonicity() {
        let f = spec();
        let rng = CounterRng::new(9);
        let fields = sample_fields(&f);
        for i in 0..1000u64 {
            let ff = fields[(i % fields.len() as u64) as usize];
            let th = rng.uniform_at(2 * i);
            let t1 = rng.range_at(2 * i + 1, 0.0, 0.1);
            let t2 = 0.1 - t1;
            let direct = f.flow(&ff, 0.1, th).unwrap();
            let split = f.flow(&ff, t2, f.flow(&ff, t1, th).unwrap()).unwrap();
            assert!((direct - split).abs() < 1e-9, "{ff:?} {th}");
            let back = f.flow_inverse(&ff, 0.1, direct).unwrap();
            assert!((back - th).abs() < 1e-9);
        }
        for ff in fields {
            assert_eq!(f.flow(&ff, 0.1, 0.0).unwrap(), 0.0);
            assert_eq!(f.flow(&ff, 0.1, 1.0).unwrap(), 1.0);
            let mut prev = -1.0;
            for k in 0..=2000 {
                let v = f.flow(&ff, 0.1, k as f64 / 2000.0).unwrap();
                assert!(v > prev);
                prev = v;
            }
        }
    }

    #[test]
    fn fiber_rates_bounded_by_two_pi() {
        let f = spec();
        for ff in sample_fields(&f) {
            for k in 0..=10_000 {
                let (_, d) = f.rate(&ff, k as f64 / 10_000.0);
                assert!(d.abs() <= 2.0 * PI + 1e-9);
            }
        }
    }
}
