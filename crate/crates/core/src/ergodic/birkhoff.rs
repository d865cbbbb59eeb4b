//! Orbit averages and center exponents.

use crate::error::{Error, Result};
use crate::kan::SkewMap;
use crate::perturb::Torus;
use crate::torus::{theta_distance, Point3};

/// Fiber distance to one of the two invariant tori, in the quotient metric.
pub fn torus_distance(p: &Point3, which: Torus) -> f64 {
    theta_distance(p.theta, which.level())
}

/// `(1/n) Σ_{i<n} φ(fⁱ x₀)`.
pub fn birkhoff<M: SkewMap + ?Sized, F: Fn(&Point3) -> f64>(
    map: &M,
    x0: &Point3,
    observable: F,
    n: usize,
) -> Result<f64> {
    if n == 0 {
        return Err(Error::Range("n".into()));
    }
    let mut x = *x0;
    let mut acc = 0.0;
    for _ in 0..n {
        acc += observable(&x);
        x = map.apply(&x)?;
    }
    Ok(acc / n as f64)
}

/// `(1/n) Σ_{i<n} log|∂θψ_{xᵢ}(θᵢ)|` along the orbit of `x₀`.
pub fn center_lyapunov<M: SkewMap + ?Sized>(map: &M, x0: &Point3, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Range("n".into()));
    }
    let mut x = *x0;
    let mut acc = 0.0;
    for _ in 0..n {
        let (next, d) = map.step(&x)?;
        acc += d.abs().ln();
        x = next;
    }
    Ok(acc / n as f64)
}
