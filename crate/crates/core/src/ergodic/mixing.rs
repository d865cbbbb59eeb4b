//! Which region pairs `(U, V)` satisfy `fⁿ(U) ∩ V ≠ ∅`, by sampling.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kan::SkewMap;
use crate::rng::CounterRng;
use crate::torus::Point3;

/// Half-open box in `(x, y, θ)` with `θ ∈ [-1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Region3 {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub theta: [f64; 2],
}

impl Region3 {
    pub fn fiber_band(lo: f64, hi: f64) -> Self {
        Self {
            x: [0.0, 1.0],
            y: [0.0, 1.0],
            theta: [lo, hi],
        }
    }

    pub fn contains(&self, p: &Point3) -> bool {
        let inside = |v: f64, r: [f64; 2]| v >= r[0] && v < r[1];
        inside(p.base.x, self.x) && inside(p.base.y, self.y) && inside(p.theta, self.theta)
    }

    pub fn sample(&self, rng: &CounterRng, i: u64) -> Point3 {
        Point3::from_coords(
            rng.range_at(3 * i, self.x[0], self.x[1]),
            rng.range_at(3 * i + 1, self.y[0], self.y[1]),
            rng.range_at(3 * i + 2, self.theta[0], self.theta[1]),
        )
    }
}

/// Eight pairs: each (base half, fiber quarter) box against the box with
/// the same fiber quarter over the other base half.
pub fn standard_region_pairs() -> Vec<(Region3, Region3)> {
    let mut out = Vec::new();
    for q in 0..4 {
        let theta = [-1.0 + 0.5 * q as f64, -0.5 + 0.5 * q as f64];
        for h in 0..2 {
            let half = |h: usize| [0.5 * h as f64, 0.5 + 0.5 * h as f64];
            let u = Region3 {
                x: half(h),
                y: [0.0, 1.0],
                theta,
            };
            let v = Region3 {
                x: half(1 - h),
                ..u
            };
            out.push((u, v));
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct HitTable {
    pub pairs: Vec<(Region3, Region3)>,
    pub n_max: usize,
    pub samples: usize,
    /// `counts[pair][n-1]`: samples of `U` whose `n`-th image lies in `V`.
    pub counts: Vec<Vec<usize>>,
}

impl HitTable {
    pub fn hit(&self, pair: usize, n: usize) -> bool {
        self.counts[pair][n - 1] > 0
    }

    /// Whether every pair is hit at every `n` in `range`.
    pub fn all_hit(&self, range: std::ops::RangeInclusive<usize>) -> bool {
        (0..self.pairs.len()).all(|p| range.clone().all(|n| self.hit(p, n)))
    }
}

pub fn mixing_diagnostic<M: SkewMap + ?Sized>(
    map: &M,
    pairs: &[(Region3, Region3)],
    n_max: usize,
    samples: usize,
    seed: u64,
) -> Result<HitTable> {
    if n_max == 0 {
        return Err(Error::Range("n_max".into()));
    }
    let base = CounterRng::new(seed);
    let counts: Result<Vec<Vec<usize>>> = pairs
        .iter()
        .enumerate()
        .map(|(pi, (u, v))| {
            let rng = base.substream(pi as u64);
            let per_sample: Result<Vec<Vec<bool>>> = (0..samples as u64)
                .into_par_iter()
                .map(|i| {
                    let mut x = u.sample(&rng, i);
                    let mut hits = Vec::with_capacity(n_max);
                    for _ in 0..n_max {
                        x = map.apply(&x)?;
                        hits.push(v.contains(&x));
                    }
                    Ok(hits)
                })
                .collect();
            let per_sample = per_sample?;
            Ok((0..n_max)
                .map(|n| per_sample.iter().filter(|h| h[n]).count())
                .collect())
        })
        .collect();
    Ok(HitTable {
        pairs: pairs.to_vec(),
        n_max,
        samples,
        counts: counts?,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct FlipCertificate {
    pub samples: usize,
    /// Samples whose image stayed out of the negative half `(-1, 0)`.
    pub escapes: usize,
    pub all_flip: bool,
}

/// Checks that points with `θ` in `band ⊂ (0, 1)` land in `θ ∈ (-1, 0)`
/// after one step.
pub fn flip_certificate<M: SkewMap + ?Sized>(
    map: &M,
    band: [f64; 2],
    samples: usize,
    seed: u64,
) -> Result<FlipCertificate> {
    if !(band[0] > 0.0 && band[0] < band[1] && band[1] < 1.0) {
        return Err(Error::Range("band".into()));
    }
    let region = Region3::fiber_band(band[0], band[1]);
    let rng = CounterRng::new(seed).substream(0xF11F);
    let escapes: Result<usize> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let y = map.apply(&region.sample(&rng, i))?;
            Ok(usize::from(!(y.theta > -1.0 && y.theta < 0.0)))
        })
        .sum();
    let escapes = escapes?;
    Ok(FlipCertificate {
        samples,
        escapes,
        all_flip: escapes == 0,
    })
}
