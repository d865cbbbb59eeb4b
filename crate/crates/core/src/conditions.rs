//! Numerical check of the four conditions defining the Kan class: invariant
//! boundary tori, Morse–Smale fibers over `r` and `s`, fiber derivatives
//! dominated by the base, and negative mean center exponents on the tori.

use rayon::prelude::*;
use serde::Serialize;

use crate::kan::{KanMap, SkewMap};
use crate::torus::TorusPoint2;

#[derive(Debug, Clone, Serialize)]
pub struct FiberFixedPoints {
    pub fixed_points: Vec<f64>,
    /// Derivatives at `θ = 0` and `θ = 1`.
    pub multipliers: [f64; 2],
    pub expected: [f64; 2],
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub t: f64,
    pub quadrature_n: usize,
    pub invariance_error: f64,
    pub tori_invariant: bool,
    pub r_fiber: FiberFixedPoints,
    pub s_fiber: FiberFixedPoints,
    pub fixed_point_structure: bool,
    pub derivative_range: [f64; 2],
    /// `(‖A⁻¹‖⁻¹, ‖A‖)`.
    pub base_rates: [f64; 2],
    pub within_base_rates: bool,
    /// Range inside `[e^{-2πt}, e^{2πt}]`.
    pub within_flow_band: bool,
    /// `∫ log ∂θφ(x, i) dx` for `i = 0, 1`.
    pub torus_exponents: [f64; 2],
    pub exponent_bound: f64,
    pub exponents_negative: bool,
    pub all: bool,
}

const FIXED_POINT_GRID: usize = 10_000;
const THETA_LEVELS: usize = 32;

/// Fiber heights probed for the derivative bounds: a uniform grid, the
/// endpoints and a few levels around the center correction.
fn theta_levels(eps: f64) -> Vec<f64> {
    let mut v: Vec<f64> = (0..THETA_LEVELS)
        .map(|k| (k as f64 + 0.5) / THETA_LEVELS as f64)
        .collect();
    v.extend([0.0, 1.0, 0.5]);
    for f in [0.2, 0.3, 0.45, 0.6, 0.75, 0.9, 1.1] {
        v.push(0.5 + f * eps);
        v.push(0.5 - f * eps);
    }
    v
}

fn fiber_fixed_points(k: &KanMap, x: &TorusPoint2, expected: [f64; 2]) -> FiberFixedPoints {
    let f = |th: f64| k.phi(x, th).map(|v| v.0 - th).unwrap_or(f64::NAN);
    let mut pts = vec![0.0];
    let mut prev = f(1.0 / FIXED_POINT_GRID as f64);
    for i in 2..FIXED_POINT_GRID {
        let th = i as f64 / FIXED_POINT_GRID as f64;
        let cur = f(th);
        if cur == 0.0 || cur.signum() != prev.signum() {
            pts.push(th);
        }
        prev = cur;
    }
    pts.push(1.0);
    let m0 = k.phi(x, 0.0).map(|v| v.1).unwrap_or(f64::NAN);
    let m1 = k.phi(x, 1.0).map(|v| v.1).unwrap_or(f64::NAN);
    let ok = pts.len() == 2 && (m0 - expected[0]).abs() <= 1e-6 && (m1 - expected[1]).abs() <= 1e-6;
    FiberFixedPoints {
        fixed_points: pts,
        multipliers: [m0, m1],
        expected,
        ok,
    }
}

/// Invariance of the tori, fixed-point structure over r and s, fiber
/// derivative bounds and torus exponents, on an `n × n` midpoint grid.
pub fn verify_kan_conditions(k: &KanMap, quadrature_n: usize) -> ConditionReport {
    let n = quadrature_n.max(64);
    let t = k.t();
    let eps = k.fields().epsilon();
    let a = k.anosov();
    let levels = theta_levels(eps);
    let h = 1.0 / n as f64;

    // per base row: (invariance error, min deriv, max deriv, Σ log at 0, Σ log at 1)
    let rows: Vec<(f64, f64, f64, f64, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut acc = (0.0f64, f64::INFINITY, 0.0f64, 0.0, 0.0);
            for j in 0..n {
                let x = TorusPoint2::new((i as f64 + 0.5) * h, (j as f64 + 0.5) * h);
                let (v0, d0) = k.phi(&x, 0.0).unwrap_or((f64::NAN, f64::NAN));
                let (v1, d1) = k.phi(&x, 1.0).unwrap_or((f64::NAN, f64::NAN));
                acc.0 = acc.0.max(v0.abs()).max((v1 - 1.0).abs());
                acc.3 += d0.abs().ln();
                acc.4 += d1.abs().ln();
                for &th in &levels {
                    let d = k.phi(&x, th).map(|v| v.1.abs()).unwrap_or(f64::NAN);
                    acc.1 = acc.1.min(d);
                    acc.2 = acc.2.max(d);
                }
            }
            acc
        })
        .collect();
    let invariance_error = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let lo = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let hi = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    let cells = (n * n) as f64;
    let torus_exponents = [
        rows.iter().map(|r| r.3).sum::<f64>() / cells,
        rows.iter().map(|r| r.4).sum::<f64>() / cells,
    ];
    let exponent_bound = std::f64::consts::PI * t * (eps - 1.0);

    let down = (-std::f64::consts::PI * t).exp();
    let up = (std::f64::consts::PI * t).exp();
    let r_fiber = fiber_fixed_points(k, &a.r, [down, up]);
    let s_fiber = fiber_fixed_points(k, &a.s, [up, down]);

    let base_rates = [a.conorm(), a.norm()];
    let band = (2.0 * std::f64::consts::PI * t).exp();
    let within_base_rates = lo > base_rates[0] && hi < base_rates[1];
    let within_flow_band = lo >= 1.0 / band * (1.0 - 1e-12) && hi <= band * (1.0 + 1e-12);
    let tori_invariant = invariance_error <= 1e-12;
    let fixed_point_structure = r_fiber.ok && s_fiber.ok;
    let exponents_negative = torus_exponents
        .iter()
        .all(|&v| v < 0.0 && v <= exponent_bound + 1e-3);
    ConditionReport {
        t,
        quadrature_n: n,
        invariance_error,
        tori_invariant,
        r_fiber,
        s_fiber,
        fixed_point_structure,
        derivative_range: [lo, hi],
        base_rates,
        within_base_rates,
        within_flow_band,
        torus_exponents,
        exponent_bound,
        exponents_negative,
        all: tori_invariant && fixed_point_structure && within_base_rates && exponents_negative,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::default_map;

    #[test]
    fn conditions_at_default_time() {
        let k = default_map(0.1).unwrap();
        let start = std::time::Instant::now();
        let r = verify_kan_conditions(&k, 256);
        eprintln!("{:?} in {:?}", r, start.elapsed());
        assert!(
            r.tori_invariant
                && r.fixed_point_structure
                && r.within_base_rates
                && r.exponents_negative
                && r.within_flow_band
        );
    }
}
