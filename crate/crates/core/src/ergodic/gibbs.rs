//! Push-forward of Lebesgue measure on a strong-unstable segment.

use rayon::prelude::*;

use super::pairwise_sum;
use crate::error::{Error, Result};
use crate::kan::SkewMap;
use crate::perturb::Torus;
use crate::torus::{theta_distance, wrap_theta, Point3};

#[derive(Debug, Clone)]
pub struct EmpiricalMeasure {
    pub samples: Vec<(Point3, f64)>,
    pub seed: Point3,
    pub u_length: f64,
    pub n: usize,
}

const POWER_STEPS: usize = 30;
const FD_STEP: f64 = 1e-6;

/// Derivative of the fiber image along the unit unstable base direction.
fn fiber_u_derivative<M: SkewMap + ?Sized>(map: &M, p: &Point3) -> Result<f64> {
    let a = map.anosov();
    let n = a.e_u[0].hypot(a.e_u[1]);
    let v = [a.e_u[0] / n * FD_STEP, a.e_u[1] / n * FD_STEP];
    let plus = map.fiber_image(&p.base.translate(v), p.theta)?;
    let minus = map.fiber_image(&p.base.translate([-v[0], -v[1]]), p.theta)?;
    Ok(wrap_theta(plus - minus) / (2.0 * FD_STEP))
}

/// Fiber slope `w` of the strong-unstable direction `(ê_u, w)` at `p`, by
/// power iteration of the differential from `K^{-30}(p)`.
pub fn strong_unstable_slope<M: SkewMap + ?Sized>(map: &M, p: &Point3) -> Result<f64> {
    let mut orbit = vec![*p];
    for _ in 0..POWER_STEPS {
        let prev = map.inverse(orbit.last().unwrap())?;
        orbit.push(prev);
    }
    let lu = map.anosov().eigenvalues().0;
    let mut w = 0.0;
    for x in orbit.iter().skip(1).rev() {
        let (_, dth) = map.step(x)?;
        w = (fiber_u_derivative(map, x)? + dth * w) / lu;
    }
    Ok(w)
}

/// `μ_n = (1/n) Σ_{i<n} fⁱ_* m` with `m` normalized length on the
/// strong-unstable segment of length `u_length` centered at `seed`.
pub fn push_u_disk<M: SkewMap + ?Sized>(
    map: &M,
    seed: &Point3,
    u_length: f64,
    n: usize,
    n_samples: usize,
) -> Result<EmpiricalMeasure> {
    if !(u_length > 0.0) || n == 0 || n_samples == 0 {
        return Err(Error::Range("u-disk parameters".into()));
    }
    let a = map.anosov();
    let norm = a.e_u[0].hypot(a.e_u[1]);
    let dir = [a.e_u[0] / norm, a.e_u[1] / norm];
    let w = strong_unstable_slope(map, seed)?;
    let weight = 1.0 / (n as f64 * n_samples as f64);
    let orbits: Result<Vec<Vec<(Point3, f64)>>> = (0..n_samples)
        .into_par_iter()
        .map(|j| {
            let s = ((j as f64 + 0.5) / n_samples as f64 - 0.5) * u_length;
            let mut x = Point3::new(
                seed.base.translate([s * dir[0], s * dir[1]]),
                seed.theta + s * w,
            );
            let mut out = Vec::with_capacity(n);
            for _ in 0..n {
                out.push((x, weight));
                x = map.apply(&x)?;
            }
            Ok(out)
        })
        .collect();
    Ok(EmpiricalMeasure {
        samples: orbits?.into_iter().flatten().collect(),
        seed: *seed,
        u_length,
        n,
    })
}

impl EmpiricalMeasure {
    pub fn total_weight(&self) -> f64 {
        let w: Vec<f64> = self.samples.iter().map(|s| s.1).collect();
        pairwise_sum(&w)
    }

    /// Mass within fiber distance `delta` of either invariant torus.
    pub fn mass_near_tori(&self, delta: f64) -> f64 {
        let w: Vec<f64> = self
            .samples
            .iter()
            .filter(|(p, _)| {
                theta_distance(p.theta, Torus::Zero.level()) < delta
                    || theta_distance(p.theta, Torus::One.level()) < delta
            })
            .map(|s| s.1)
            .collect();
        pairwise_sum(&w)
    }

    /// One further push-forward.
    pub fn push<M: SkewMap + ?Sized>(&self, map: &M) -> Result<EmpiricalMeasure> {
        let samples: Result<Vec<(Point3, f64)>> = self
            .samples
            .par_iter()
            .map(|(p, w)| Ok((map.apply(p)?, *w)))
            .collect();
        Ok(EmpiricalMeasure {
            samples: samples?,
            ..self.clone()
        })
    }

    /// Histogram on an `nx × ny × nθ` grid (θ over `[-1, 1)`).
    pub fn histogram(&self, bins: [usize; 3]) -> Vec<f64> {
        let mut h = vec![0.0; bins[0] * bins[1] * bins[2]];
        for (p, w) in &self.samples {
            h[bin_index(p, bins)] += w;
        }
        h
    }

    /// Binned total-variation distance between `μ` and `f_*μ`.
    pub fn invariance_defect<M: SkewMap + ?Sized>(&self, map: &M, bins: [usize; 3]) -> Result<f64> {
        let a = self.histogram(bins);
        let b = self.push(map)?.histogram(bins);
        let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).collect();
        Ok(0.5 * pairwise_sum(&d))
    }
}

pub(crate) fn bin_index(p: &Point3, bins: [usize; 3]) -> usize {
    let i = ((p.base.x * bins[0] as f64) as usize).min(bins[0] - 1);
    let j = ((p.base.y * bins[1] as f64) as usize).min(bins[1] - 1);
    let k = (((p.theta + 1.0) * 0.5 * bins[2] as f64) as usize).min(bins[2] - 1);
    (i * bins[1] + j) * bins[2] + k
}
