//! How much of 𝕋³ the iterates of a local invariant manifold visit.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kan::{KanMap, SkewMap};
use crate::torus::{wrap_centered, wrap_theta, Point3, TorusPoint2};

/// Cells per axis; the fiber axis spans `[-1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CoverageGrid {
    pub n: [usize; 3],
}

impl Default for CoverageGrid {
    fn default() -> Self {
        Self { n: [16, 16, 8] }
    }
}

impl CoverageGrid {
    pub fn cells(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn index(&self, p: &Point3) -> usize {
        let i = ((p.base.x * self.n[0] as f64) as usize).min(self.n[0] - 1);
        let j = ((p.base.y * self.n[1] as f64) as usize).min(self.n[1] - 1);
        let k = (((p.theta + 1.0) * 0.5 * self.n[2] as f64) as usize).min(self.n[2] - 1);
        (i * self.n[1] + j) * self.n[2] + k
    }

    /// Separation in cell units (max over axes).
    pub fn gap(&self, a: &Point3, b: &Point3) -> f64 {
        let dx = wrap_centered(b.base.x - a.base.x).abs() * self.n[0] as f64;
        let dy = wrap_centered(b.base.y - a.base.y).abs() * self.n[1] as f64;
        let dt = wrap_theta(b.theta - a.theta).abs() * 0.5 * self.n[2] as f64;
        dx.max(dy).max(dt)
    }
}

/// A local invariant curve or surface whose leaves are exact (the seed sits
/// where the fiber dynamics does not depend on the base point).
#[derive(Debug, Clone, Serialize)]
pub enum CoverageObject {
    /// `{base + s·ê_u : |s| ≤ half_length} × fiber`, iterated forward.
    UnstableSurface {
        base: TorusPoint2,
        half_length: f64,
        levels: usize,
    },
    /// `{(base + s·ê_u, θ)}`, iterated forward.
    UnstableSegment { point: Point3, half_length: f64 },
    /// `{base + s·ê_s} × fiber`, iterated backward.
    StableSurface {
        base: TorusPoint2,
        half_length: f64,
        levels: usize,
    },
    /// `{(base + s·ê_s, θ)}`, iterated backward.
    StableSegment { point: Point3, half_length: f64 },
}

const SURFACE_LEVELS: usize = 32;

impl CoverageObject {
    fn unit(v: [f64; 2]) -> f64 {
        v[0].hypot(v[1])
    }

    /// Unstable set of the fiber over `p`, seeded inside the blender chart.
    pub fn fiber_p(k: &KanMap) -> Self {
        let c = &k.fields().chart;
        CoverageObject::UnstableSurface {
            base: c.anosov.p,
            half_length: 2.0 * c.unit_u.abs() * Self::unit(c.anosov.e_u),
            levels: SURFACE_LEVELS,
        }
    }

    /// Stable set of the fiber over `q`, seeded where `𝒴` is constant in the base.
    pub fn fiber_q(k: &KanMap) -> Self {
        let f = k.fields();
        CoverageObject::StableSurface {
            base: f.chart.anosov.q,
            half_length: 0.9 * f.q_weight_radii.0,
            levels: SURFACE_LEVELS,
        }
    }

    pub fn u_disk_at_p(k: &KanMap) -> Self {
        let c = &k.fields().chart;
        CoverageObject::UnstableSegment {
            point: Point3::new(c.anosov.p, 0.5),
            half_length: 2.0 * c.unit_u.abs() * Self::unit(c.anosov.e_u),
        }
    }

    pub fn stable_segment_at_p(k: &KanMap) -> Self {
        let c = &k.fields().chart;
        CoverageObject::StableSegment {
            point: Point3::new(c.anosov.p, 0.5),
            half_length: 2.0 * c.unit_s.abs() * Self::unit(c.anosov.e_s),
        }
    }

    fn forward(&self) -> bool {
        matches!(
            self,
            CoverageObject::UnstableSurface { .. } | CoverageObject::UnstableSegment { .. }
        )
    }

    /// Seed curves as `(start point, unit base direction, half length)`.
    fn curves<M: SkewMap + ?Sized>(&self, map: &M) -> Vec<(Point3, [f64; 2], f64)> {
        let a = map.anosov();
        let dir = |v: [f64; 2]| {
            let n = Self::unit(v);
            [v[0] / n, v[1] / n]
        };
        let levels = |base: TorusPoint2, n: usize, d: [f64; 2], h: f64| {
            (0..n)
                .map(|i| {
                    (
                        Point3::new(base, -1.0 + 2.0 * (i as f64 + 0.5) / n as f64),
                        d,
                        h,
                    )
                })
                .collect::<Vec<_>>()
        };
        match *self {
            CoverageObject::UnstableSurface {
                base,
                half_length,
                levels: n,
            } => levels(base, n, dir(a.e_u), half_length),
            CoverageObject::StableSurface {
                base,
                half_length,
                levels: n,
            } => levels(base, n, dir(a.e_s), half_length),
            CoverageObject::UnstableSegment { point, half_length } => {
                vec![(point, dir(a.e_u), half_length)]
            }
            CoverageObject::StableSegment { point, half_length } => {
                vec![(point, dir(a.e_s), half_length)]
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CoverageReport {
    pub object: CoverageObject,
    pub grid: CoverageGrid,
    pub depth: usize,
    pub fraction: f64,
    pub fraction_by_depth: Vec<f64>,
    pub points_evaluated: u64,
    pub budget: u64,
    pub budget_exhausted: bool,
    pub hits: Vec<bool>,
}

struct Curve {
    start: Point3,
    dir: [f64; 2],
    /// Sorted parameters and their current images.
    params: Vec<f64>,
    images: Vec<Point3>,
}

fn seed_point(c: &Curve, s: f64) -> Point3 {
    Point3::new(
        c.start.base.translate([s * c.dir[0], s * c.dir[1]]),
        c.start.theta,
    )
}

fn advance<M: SkewMap + ?Sized>(
    map: &M,
    forward: bool,
    p: &Point3,
    steps: usize,
) -> Result<Point3> {
    let mut x = *p;
    for _ in 0..steps {
        x = if forward {
            map.apply(&x)?
        } else {
            map.inverse(&x)?
        };
    }
    Ok(x)
}

/// Iterates the object up to `depth` times, inserting parameter midpoints
/// until consecutive images are at most half a cell apart, and marks every
/// cell an image sample falls in. Stops early at full coverage.
pub fn manifold_coverage<M: SkewMap + ?Sized>(
    map: &M,
    object: &CoverageObject,
    depth: usize,
    grid: CoverageGrid,
    budget: u64,
) -> Result<CoverageReport> {
    if grid.n.iter().any(|&n| n == 0) {
        return Err(Error::Range("coverage grid".into()));
    }
    let forward = object.forward();
    let mut curves: Vec<Curve> = object
        .curves(map)
        .into_iter()
        .map(|(start, dir, h)| Curve {
            start,
            dir,
            params: vec![-h, h],
            images: Vec::new(),
        })
        .collect();
    for c in &mut curves {
        c.images = c.params.iter().map(|&s| seed_point(c, s)).collect();
    }
    let mut hits = vec![false; grid.cells()];
    let mut used: u64 = 0;
    let mut exhausted = false;
    let mut by_depth = Vec::new();
    let mut d = 0;
    loop {
        // refine at the current depth, one parallel pass of midpoints at a time
        for c in &mut curves {
            loop {
                let wide: Vec<usize> = (0..c.params.len().saturating_sub(1))
                    .filter(|&i| {
                        grid.gap(&c.images[i], &c.images[i + 1]) > 0.5
                            && 0.5 * (c.params[i] + c.params[i + 1]) > c.params[i]
                            && 0.5 * (c.params[i] + c.params[i + 1]) < c.params[i + 1]
                    })
                    .collect();
                if wide.is_empty() {
                    break;
                }
                let cost = wide.len() as u64 * (d as u64 + 1);
                if used + cost > budget {
                    exhausted = true;
                    break;
                }
                used += cost;
                let cur: &Curve = c;
                let mids: Result<Vec<(f64, Point3)>> = wide
                    .par_iter()
                    .map(|&i| {
                        let mid = 0.5 * (cur.params[i] + cur.params[i + 1]);
                        Ok((mid, advance(map, forward, &seed_point(cur, mid), d)?))
                    })
                    .collect();
                let mids = mids?;
                let mut params = Vec::with_capacity(c.params.len() + mids.len());
                let mut images = Vec::with_capacity(params.capacity());
                let mut w = 0;
                for i in 0..c.params.len() {
                    params.push(c.params[i]);
                    images.push(c.images[i]);
                    if w < wide.len() && wide[w] == i {
                        params.push(mids[w].0);
                        images.push(mids[w].1);
                        w += 1;
                    }
                }
                c.params = params;
                c.images = images;
            }
        }
        for c in &curves {
            for p in &c.images {
                hits[grid.index(p)] = true;
            }
        }
        let fraction = hits.iter().filter(|h| **h).count() as f64 / hits.len() as f64;
        by_depth.push(fraction);
        if d == depth || fraction == 1.0 || exhausted {
            return Ok(CoverageReport {
                object: object.clone(),
                grid,
                depth: d,
                fraction,
                fraction_by_depth: by_depth,
                points_evaluated: used,
                budget,
                budget_exhausted: exhausted,
                hits,
            });
        }
        d += 1;
        for c in &mut curves {
            let next: Result<Vec<Point3>> = c
                .images
                .par_iter()
                .map(|p| advance(map, forward, p, 1))
                .collect();
            c.images = next?;
            used += c.images.len() as u64;
        }
    }
}
