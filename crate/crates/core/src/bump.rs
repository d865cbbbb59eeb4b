//! Smooth bump profiles built from the `exp(-1/x)` glue.

use serde::{Deserialize, Serialize};

#[inline]
fn glue(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// C^∞ step: 0 for `x ≤ 0`, 1 for `x ≥ 1`, slope 2 at `x = ½`.
#[inline]
pub fn smooth_step(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = glue(x);
        a / (a + glue(1.0 - x))
    }
}

#[inline]
pub fn smooth_step_deriv(x: f64) -> f64 {
    if x <= 0.0 || x >= 1.0 {
        return 0.0;
    }
    let (a, b) = (glue(x), glue(1.0 - x));
    let (da, db) = (a / (x * x), b / ((1.0 - x) * (1.0 - x)));
    (da * b + a * db) / ((a + b) * (a + b))
}

/// Equal to 1 on `plateau`, 0 outside `support`, monotone in between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump1D {
    pub support: [f64; 2],
    pub plateau: [f64; 2],
}

impl Bump1D {
    pub fn value(&self, x: f64) -> f64 {
        let [s0, s1] = self.support;
        let [p0, p1] = self.plateau;
        smooth_step((x - s0) / (p0 - s0)) * smooth_step((s1 - x) / (s1 - p1))
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let [s0, s1] = self.support;
        let [p0, p1] = self.plateau;
        let l = (x - s0) / (p0 - s0);
        let r = (s1 - x) / (s1 - p1);
        smooth_step_deriv(l) / (p0 - s0) * smooth_step(r)
            - smooth_step(l) * smooth_step_deriv(r) / (s1 - p1)
    }
}

/// Radial profile: 1 for `r ≤ inner`, 0 for `r ≥ outer`.
#[inline]
pub fn radial(r: f64, inner: f64, outer: f64) -> f64 {
    smooth_step((outer - r) / (outer - inner))
}

/// Fiber cutoff that vanishes near `θ ∈ {0, 1}` and is 1 on `(½-ε, ½+ε)`.
/// The transition bands fill `[ε, ½-ε]` and its mirror, which keeps the
/// θ-derivative of `β₁(θ)·sin 2πθ` within `2π`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MidBand {
    pub epsilon: f64,
}

impl MidBand {
    #[inline]
    fn scaled(&self, theta: f64) -> (f64, f64) {
        let w = 0.5 - 2.0 * self.epsilon;
        if theta <= 0.5 {
            ((theta - self.epsilon) / w, 1.0 / w)
        } else {
            ((1.0 - theta - self.epsilon) / w, -1.0 / w)
        }
    }

    #[inline]
    pub fn value(&self, theta: f64) -> f64 {
        smooth_step(self.scaled(theta).0)
    }

    #[inline]
    pub fn deriv(&self, theta: f64) -> f64 {
        let (x, d) = self.scaled(theta);
        smooth_step_deriv(x) * d
    }
}

/// Fiber profile of the second field: zeros at `0`, `θ₀`, `1`, positive on
/// `(0, θ₀)`, negative on `(θ₀, 1)`, slope exactly 1 on `[0, ε] ∪ [1-ε, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignProfile {
    pub theta0: f64,
    pub epsilon: f64,
}

impl SignProfile {
    fn core(&self, th: f64) -> (f64, f64) {
        let t0 = self.theta0;
        let g = (1.0 - th) / t0 + th / (1.0 - t0);
        let dg = -1.0 / t0 + 1.0 / (1.0 - t0);
        let p = th * (t0 - th) * (1.0 - th);
        let dp = (t0 - th) * (1.0 - th) - th * (1.0 - th) - th * (t0 - th);
        (p * g, dp * g + p * dg)
    }

    fn end_weight(&self, th: f64) -> (f64, f64) {
        let e = self.epsilon;
        let w = 1.5 * e;
        (
            1.0 - smooth_step((th - e) / w),
            -smooth_step_deriv((th - e) / w) / w,
        )
    }

    pub fn value(&self, th: f64) -> f64 {
        let (m, _) = self.core(th);
        let (s0, _) = self.end_weight(th);
        let (s1, _) = self.end_weight(1.0 - th);
        m + s0 * (th - m) + s1 * (th - 1.0 - m)
    }

    pub fn deriv(&self, th: f64) -> f64 {
        let (m, dm) = self.core(th);
        let (s0, ds0) = self.end_weight(th);
        let (s1, ds1) = self.end_weight(1.0 - th);
        dm + ds0 * (th - m) + s0 * (1.0 - dm) - ds1 * (th - 1.0 - m) + s1 * (1.0 - dm)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn fd<F: Fn(f64) -> f64>(f: F, x: f64) -> f64 {
        let h = 1e-6;
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    #[test]
    fn step_shape() {
        assert_eq!(smooth_step(-0.1), 0.0);
        assert_eq!(smooth_step(1.2), 1.0);
        assert!((smooth_step(0.5) - 0.5).abs() < 1e-15);
        assert!((smooth_step_deriv(0.5) - 2.0).abs() < 1e-12);
        let mut prev = 0.0;
        for i in 0..=1000 {
            let x = i as f64 / 1000.0;
            let v = smooth_step(x);
            assert!(v >= prev);
            prev = v;
            assert!(smooth_step_deriv(x) <= 2.0 + 1e-12);
            if (0.01..0.99).contains(&x) {
                assert!((smooth_step_deriv(x) - fd(smooth_step, x)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn bump_1d_plateau_and_support() {
        let b = Bump1D {
            support: [-1.0, 2.0],
            plateau: [0.0, 1.0],
        };
        assert_eq!(b.value(0.5), 1.0);
        assert_eq!(b.value(-1.5), 0.0);
        assert_eq!(b.value(2.0), 0.0);
        for x in [-0.7, -0.2, 1.3, 1.8] {
            assert!((b.deriv(x) - fd(|y| b.value(y), x)).abs() < 1e-6);
        }
    }

    #[test]
    fn mid_band_constraints() {
        let b = MidBand { epsilon: 0.05 };
        for i in 0..=10_000 {
            let th = i as f64 / 10_000.0;
            let v = b.value(th);
            assert!((0.0..=1.0).contains(&v));
            if th < 0.05 || th > 0.95 {
                assert_eq!(v, 0.0);
            }
            if (th - 0.5).abs() < 0.05 {
                assert_eq!(v, 1.0);
            }
            let rate = b.deriv(th) * (2.0 * PI * th).sin() + 2.0 * PI * v * (2.0 * PI * th).cos();
            assert!(rate.abs() <= 2.0 * PI + 1e-9, "{th} {rate}");
        }
        assert!((b.deriv(0.2) - fd(|y| b.value(y), 0.2)).abs() < 1e-6);
        assert!((b.deriv(0.8) - fd(|y| b.value(y), 0.8)).abs() < 1e-6);
    }

    #[test]
    fn sign_profile_constraints() {
        for t0 in [0.45, 0.5, 0.503] {
            let b = SignProfile {
                theta0: t0,
                epsilon: 0.05,
            };
            assert_eq!(b.value(0.0), 0.0);
            assert!(b.value(1.0).abs() < 1e-15);
            assert!(b.value(t0).abs() < 1e-15);
            for i in 1..10_000 {
                let th = i as f64 / 10_000.0;
                let v = b.value(th);
                if th < t0 - 1e-12 {
                    assert!(v > 0.0, "{th}");
                } else if th > t0 + 1e-12 {
                    assert!(v < 0.0, "{th}");
                }
                if th < 0.05 || th > 0.95 {
                    assert!((b.deriv(th) - 1.0).abs() < 1e-12);
                }
                assert!(b.deriv(th).abs() <= 2.0);
                if i % 97 == 0 {
                    assert!((b.deriv(th) - fd(|y| b.value(y), th)).abs() < 1e-6);
                }
            }
        }
    }
}
