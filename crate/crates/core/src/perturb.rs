//! Fiber-translation perturbations that break one of the invariant tori of
//! `K_t`, and a numerical test of whether an su-torus survives.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bump::{radial, Bump1D};
use crate::error::{Error, Result};
use crate::kan::{KanMap, SkewMap};
use crate::torus::{theta_distance, wrap_theta, AnosovMap, TorusPoint2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Torus {
    /// `θ = 0`.
    Zero,
    /// `θ = 1 ≡ −1`.
    One,
}

impl Torus {
    /// Canonical fiber level in `[-1, 1)`.
    pub fn level(self) -> f64 {
        match self {
            Torus::Zero => 0.0,
            Torus::One => -1.0,
        }
    }

    pub fn other(self) -> Torus {
        match self {
            Torus::Zero => Torus::One,
            Torus::One => Torus::Zero,
        }
    }
}

/// `K_t` followed by `θ ↦ θ − η·ρ(x)·σ(θ)`, with `ρ` a bump on a base ball
/// away from every layout set and `σ = 1` near the chosen torus.
#[derive(Debug, Clone)]
pub struct PerturbedMap {
    pub base_map: KanMap,
    pub eta: f64,
    pub which: Torus,
    pub ball_center: TorusPoint2,
    pub ball_radius: f64,
    profile: Bump1D,
}

const SEARCH_GRID: usize = 256;
const MAX_BALL_RADIUS: f64 = 0.1;
const MIN_BALL_RADIUS: f64 = 0.01;

pub fn break_torus(k: &KanMap, eta: f64, which: Torus) -> Result<PerturbedMap> {
    let eps = k.fields().epsilon();
    if !(eta >= 0.0 && eta < 0.5 * eps) {
        return Err(Error::Range("eta".into()));
    }
    let layout = &k.fields().layout;
    let h = 1.0 / SEARCH_GRID as f64;
    let (d, center) = (0..SEARCH_GRID * SEARCH_GRID)
        .into_par_iter()
        .map(|i| {
            let x = TorusPoint2::new((i / SEARCH_GRID) as f64 * h, (i % SEARCH_GRID) as f64 * h);
            (layout.obstacle_distance(&x), x)
        })
        .reduce(
            || (f64::NEG_INFINITY, TorusPoint2::new(0.0, 0.0)),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && (b.1.x, b.1.y) < (a.1.x, a.1.y)) {
                    b
                } else {
                    a
                }
            },
        );
    // keep the ball inside the region where the layout sets are absent
    let radius = (d - layout.delta_outer).min(MAX_BALL_RADIUS);
    if radius < MIN_BALL_RADIUS {
        return Err(Error::SupportCollision);
    }
    Ok(PerturbedMap {
        base_map: k.clone(),
        eta,
        which,
        ball_center: center,
        ball_radius: radius,
        profile: Bump1D {
            support: [-0.25, 0.25],
            plateau: [-0.05, 0.05],
        },
    })
}

impl PerturbedMap {
    pub fn rho(&self, x: &TorusPoint2) -> f64 {
        radial(
            x.distance(&self.ball_center),
            0.5 * self.ball_radius,
            self.ball_radius,
        )
    }

    fn sigma(&self, th: f64) -> (f64, f64) {
        let d = wrap_theta(th - self.which.level());
        (self.profile.value(d), self.profile.deriv(d))
    }
}

impl SkewMap for PerturbedMap {
    fn anosov(&self) -> &AnosovMap {
        self.base_map.anosov()
    }

    fn fiber_jet(&self, x: &TorusPoint2, theta: f64) -> Result<(f64, f64)> {
        let (y, dy) = self.base_map.fiber_jet(x, theta)?;
        if self.eta == 0.0 {
            return Ok((y, dy));
        }
        let r = self.rho(x);
        if r == 0.0 {
            return Ok((y, dy));
        }
        let (s, ds) = self.sigma(y);
        let out = y - self.eta * r * s;
        let out = if out == 0.0 { 0.0 } else { wrap_theta(out) };
        Ok((out, dy * (1.0 - self.eta * r * ds)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TorusStatus {
    Continuation,
    Broken,
}

#[derive(Debug, Clone, Serialize)]
pub struct TorusDiagnostic {
    pub status: TorusStatus,
    /// Largest gap between the unstable leaf of the fixed point over `r` and
    /// the stable leaf of the fixed point over `s`, over heteroclinic points.
    pub max_gap: f64,
    pub heteroclinic_points: usize,
}

const LATTICE_RADIUS: i64 = 12;

/// Heteroclinic base points `x ∈ W^u(r) ∩ W^s(s)` as `(τ, σ)` with
/// `x = r + τe_u = s + k + σe_s` in the lift.
fn heteroclinic_offsets(a: &AnosovMap) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for i in -LATTICE_RADIUS..=LATTICE_RADIUS {
        for j in -LATTICE_RADIUS..=LATTICE_RADIUS {
            let v = [a.s.x + i as f64 - a.r.x, a.s.y + j as f64 - a.r.y];
            let (s, u) = a.eigen_coords(v);
            // r + τe_u − σe_s = s + k
            out.push((u, -s));
        }
    }
    out
}

/// Leaf heights at one heteroclinic point, from the unstable side and from
/// the stable side, each transported over `depth` steps.
fn leaf_gap<M: SkewMap>(g: &M, level: f64, tau: f64, sigma: f64, depth: usize) -> Result<f64> {
    let a = g.anosov();
    let (r, s) = (a.r, a.s);
    let (lu, ls) = a.eigenvalues();
    let mut th_u = level;
    for n in (1..=depth as i32).rev() {
        let d = tau * lu.powi(-n);
        let y = r.translate([d * a.e_u[0], d * a.e_u[1]]);
        th_u = g.fiber_image(&y, th_u)?;
    }
    let mut th_s = level;
    for n in (0..depth as i32).rev() {
        let d = sigma * ls.powi(n);
        let y = s.translate([d * a.e_s[0], d * a.e_s[1]]);
        th_s = g.fiber_preimage(&y, th_s)?;
    }
    Ok(theta_distance(th_u, th_s))
}

/// Whether the invariant torus `which` persists for `g`, judged by the
/// coincidence of the unstable set of its fixed point over `r` with the
/// stable set of its fixed point over `s` at heteroclinic base points.
pub fn su_torus_status<M: SkewMap>(
    g: &M,
    which: Torus,
    depth: usize,
    tol: f64,
) -> Result<TorusDiagnostic> {
    if depth == 0 {
        return Err(Error::Range("depth".into()));
    }
    let a = g.anosov();
    let level = which.level();
    for fixed in [a.r, a.s] {
        let img = g.fiber_image(&fixed, level)?;
        if theta_distance(img, level) > tol {
            return Ok(TorusDiagnostic {
                status: TorusStatus::Broken,
                max_gap: theta_distance(img, level),
                heteroclinic_points: 0,
            });
        }
    }
    let pts = heteroclinic_offsets(a);
    let gaps: Result<Vec<f64>> = pts
        .par_iter()
        .map(|&(tau, sigma)| leaf_gap(g, level, tau, sigma, depth))
        .collect();
    let max_gap = gaps?.into_iter().fold(0.0, f64::max);
    let status = if max_gap < tol {
        TorusStatus::Continuation
    } else if max_gap > 2.0 * tol {
        TorusStatus::Broken
    } else {
        return Err(Error::Inconclusive {
            escape: max_gap,
            tol,
        });
    };
    Ok(TorusDiagnostic {
        status,
        max_gap,
        heteroclinic_points: pts.len(),
    })
}
