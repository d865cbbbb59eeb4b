//! Placement of the perturbation domains on 𝕋².

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chart::{AdaptedChart, ChartBox};
use crate::error::{Error, Result};
use crate::shapes::{Disk, EigenBox};
use crate::torus::{AnosovMap, TorusPoint2};

/// Tunable sizes; `None` fields derive from `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutParams {
    pub epsilon: f64,
    /// Radius of the disks around `q`, `r`, `s`.
    pub ball_radius: Option<f64>,
    /// Gap between the small domains and `U2`.
    pub inner_margin: Option<f64>,
    /// Gap between the small domains and `U1`.
    pub outer_margin: Option<f64>,
    /// Half-size of `U(C)` in chart units.
    pub chart_box_half: f64,
    /// Half-height of `U(C2)` in units of `λ^{-2n₀}`.
    pub tube_half_height: f64,
    /// Resolution per axis of the area quadrature grid.
    pub quadrature: usize,
}

impl LayoutParams {
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            ball_radius: None,
            inner_margin: None,
            outer_margin: None,
            chart_box_half: 2.5,
            tube_half_height: 3.0,
            quadrature: 2048,
        }
    }

    pub fn radius(&self) -> f64 {
        self.ball_radius
            .unwrap_or_else(|| (0.9 * self.epsilon / std::f64::consts::PI).sqrt())
    }

    pub fn delta_inner(&self) -> f64 {
        self.inner_margin.unwrap_or(0.4 * self.epsilon)
    }

    pub fn delta_outer(&self) -> f64 {
        self.outer_margin.unwrap_or(0.8 * self.epsilon)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LayoutAreas {
    pub u_r: f64,
    pub u_s: f64,
    pub u_q: f64,
    pub u_c_and_tubes: f64,
    pub u1: f64,
    pub u2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairOverlap {
    pub first: String,
    pub second: String,
    pub area: f64,
}

#[derive(Debug, Clone)]
pub struct DomainLayout {
    pub anosov: AnosovMap,
    pub params: LayoutParams,
    pub u_r: Disk,
    pub u_s: Disk,
    pub u_q: Disk,
    /// `U(C)`.
    pub u_c: EigenBox,
    /// `U(C2)` and its images `A^i(U(C2))`, `i = 0..2n₀`.
    pub tubes: Vec<EigenBox>,
    /// `C`.
    pub c: EigenBox,
    /// `A^i(C2)`, `i = 0..2n₀`.
    pub c2_orbit: Vec<EigenBox>,
    pub delta_inner: f64,
    pub delta_outer: f64,
    pub areas: LayoutAreas,
}

impl DomainLayout {
    /// Distance from `x` to the union of the small domains.
    pub fn obstacle_distance(&self, x: &TorusPoint2) -> f64 {
        let a = &self.anosov;
        let mut d = self
            .u_r
            .distance(x)
            .min(self.u_s.distance(x))
            .min(self.u_q.distance(x))
            .min(self.u_c.distance(a, x));
        for t in &self.tubes[1..] {
            d = d.min(t.distance(a, x));
        }
        d
    }

    pub fn in_u2(&self, x: &TorusPoint2) -> bool {
        self.obstacle_distance(x) > self.delta_inner
    }

    pub fn in_u1(&self, x: &TorusPoint2) -> bool {
        self.obstacle_distance(x) > self.delta_outer
    }

    pub fn in_tube(&self, x: &TorusPoint2) -> Option<usize> {
        self.tubes.iter().position(|t| t.contains(&self.anosov, x))
    }

    /// Named small domains in the order of the disjointness requirement.
    pub fn named_sets(&self) -> Vec<(String, Region)> {
        let mut v = vec![
            ("U(r)".to_string(), Region::Disk(self.u_r)),
            ("U(s)".to_string(), Region::Disk(self.u_s)),
            ("U(q)".to_string(), Region::Disk(self.u_q)),
            ("U(C)".to_string(), Region::Box(self.u_c)),
        ];
        for (i, t) in self.tubes.iter().enumerate().skip(1) {
            v.push((format!("A^{i}(U(C2))"), Region::Box(*t)));
        }
        v
    }

    /// Pairwise intersection areas of the small domains (all should be 0).
    pub fn pairwise_overlaps(&self) -> Vec<PairOverlap> {
        let sets = self.named_sets();
        let mut out = Vec::new();
        for i in 0..sets.len() {
            for j in (i + 1)..sets.len() {
                out.push(PairOverlap {
                    first: sets[i].0.clone(),
                    second: sets[j].0.clone(),
                    area: sets[i].1.overlap_area(&self.anosov, &sets[j].1),
                });
            }
        }
        out
    }

    pub fn all_disjoint(&self) -> bool {
        self.pairwise_overlaps().iter().all(|p| p.area == 0.0)
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Region {
    Disk(Disk),
    Box(EigenBox),
}

impl Region {
    pub fn distance(&self, a: &AnosovMap, x: &TorusPoint2) -> f64 {
        match self {
            Region::Disk(d) => d.distance(x),
            Region::Box(b) => b.distance(a, x),
        }
    }

    /// Overlap area; exact except for overlapping disk/box pairs.
    pub fn overlap_area(&self, a: &AnosovMap, other: &Region) -> f64 {
        match (self, other) {
            (Region::Box(b1), Region::Box(b2)) => b1.intersection_area(a, b2),
            (Region::Disk(d1), Region::Disk(d2)) => lens_area(d1, d2),
            (Region::Disk(d), Region::Box(b)) | (Region::Box(b), Region::Disk(d)) => {
                if b.distance(a, &d.center) >= d.radius {
                    0.0
                } else {
                    disk_box_quadrature(a, d, b)
                }
            }
        }
    }
}

fn lens_area(d1: &Disk, d2: &Disk) -> f64 {
    let d = d1.center.distance(&d2.center);
    let (r1, r2) = (d1.radius, d2.radius);
    if d >= r1 + r2 {
        return 0.0;
    }
    if d <= (r1 - r2).abs() {
        let r = r1.min(r2);
        return std::f64::consts::PI * r * r;
    }
    let a1 = r1 * r1 * ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1)).acos();
    let a2 = r2 * r2 * ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2)).acos();
    let k = 0.5 * ((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2)).sqrt();
    a1 + a2 - k
}

fn disk_box_quadrature(a: &AnosovMap, d: &Disk, b: &EigenBox) -> f64 {
    let n = 512;
    let h = 2.0 * d.radius / n as f64;
    let mut hits = 0usize;
    for i in 0..n {
        for j in 0..n {
            let x = d.center.translate([
                -d.radius + (i as f64 + 0.5) * h,
                -d.radius + (j as f64 + 0.5) * h,
            ]);
            if d.contains(&x) && b.contains(a, &x) {
                hits += 1;
            }
        }
    }
    hits as f64 * h * h
}

/// Fraction of an `n × n` midpoint grid satisfying `pred`.
pub fn grid_area<F: Fn(&TorusPoint2) -> bool + Sync>(n: usize, pred: F) -> f64 {
    let hits: usize = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = (i as f64 + 0.5) / n as f64;
            (0..n)
                .filter(|&j| pred(&TorusPoint2::new(x, (j as f64 + 0.5) / n as f64)))
                .count()
        })
        .sum();
    hits as f64 / (n * n) as f64
}

/// Places all domains for the given chart and verifies every layout requirement.
pub fn build_layout(chart: &AdaptedChart, params: LayoutParams) -> Result<DomainLayout> {
    let eps = params.epsilon;
    if !(eps > 0.0 && eps < 0.1) {
        return Err(Error::InfeasibleLayout(format!(
            "epsilon {eps} outside (0, 0.1)"
        )));
    }
    let a = chart.anosov.clone();
    let radius = params.radius();
    let big = chart.return_expansion();
    let h = params.chart_box_half;
    let u_c = chart.eigen_box(&ChartBox::centered(0.0, h, 0.0, h));
    let u_c2 = chart.eigen_box(&ChartBox::centered(
        0.0,
        h,
        1.0,
        params.tube_half_height / big,
    ));
    let n = 2 * chart.n0;
    let tubes: Vec<EigenBox> = (0..n).map(|i| u_c2.image_n(&a, i)).collect();
    let c = chart.eigen_box(&chart.box_c());
    let c2 = chart.eigen_box(&chart.box_c2());
    let c2_orbit: Vec<EigenBox> = (0..n).map(|i| c2.image_n(&a, i)).collect();
    let disk = |center: TorusPoint2| Disk { center, radius };
    let delta_inner = params.delta_inner();
    let delta_outer = params.delta_outer();
    if !(delta_inner > 0.0 && delta_outer > delta_inner) {
        return Err(Error::InfeasibleLayout(
            "margins must satisfy 0 < inner < outer".into(),
        ));
    }
    let mut layout = DomainLayout {
        u_r: disk(a.r),
        u_s: disk(a.s),
        u_q: disk(a.q),
        anosov: a.clone(),
        params,
        u_c,
        tubes,
        c,
        c2_orbit,
        delta_inner,
        delta_outer,
        areas: LayoutAreas {
            u_r: 0.0,
            u_s: 0.0,
            u_q: 0.0,
            u_c_and_tubes: 0.0,
            u1: 0.0,
            u2: 0.0,
        },
    };
    // U(C2) must avoid C1 and sit inside U(C)
    let c1 = chart.eigen_box(&chart.box_c1());
    if layout.tubes[0].intersects(&a, &c1) {
        return Err(Error::InfeasibleLayout("U(C2) meets C1".into()));
    }
    let tube_area: f64 = layout.tubes[1..].iter().map(|t| t.area(&a)).sum();
    layout.areas = LayoutAreas {
        u_r: layout.u_r.area(),
        u_s: layout.u_s.area(),
        u_q: layout.u_q.area(),
        u_c_and_tubes: layout.u_c.area(&a) + tube_area,
        u1: grid_area(params.quadrature, |x| layout.in_u1(x)),
        u2: grid_area(params.quadrature, |x| layout.in_u2(x)),
    };
    let ar = &layout.areas;
    for (name, v) in [("U(r)", ar.u_r), ("U(s)", ar.u_s), ("U(q)", ar.u_q)] {
        if v >= eps {
            return Err(Error::InfeasibleLayout(format!("Leb({name}) = {v} ≥ ε")));
        }
    }
    if ar.u_c_and_tubes >= eps {
        return Err(Error::InfeasibleLayout("tube area ≥ ε".into()));
    }
    if ar.u1 <= 0.5 {
        return Err(Error::InfeasibleLayout(format!(
            "Leb(U1) = {} ≤ 0.5",
            ar.u1
        )));
    }
    if let Some(p) = layout
        .pairwise_overlaps()
        .into_iter()
        .find(|p| p.area > 0.0)
    {
        return Err(Error::InfeasibleLayout(format!(
            "{} meets {} (area {})",
            p.first, p.second, p.area
        )));
    }
    Ok(layout)
}
