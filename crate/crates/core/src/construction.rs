//! Assembly of `K_t` from a matrix and a few sizes, including the choice of
//! the attracting height `θ₀` over `q` so that the strong unstable leaf of
//! `Q = (q, θ₀)` crosses the blender cube between the stable sets of `P` and `O`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blender::BlenderModel;
use crate::chart::{search_homoclinic_chart, AdaptedChart};
use crate::error::{Error, Result};
use crate::fields::FieldSpec;
use crate::kan::{unit_bisection, KanMap, KanParams};
use crate::layout::{build_layout, LayoutParams};
use crate::torus::{AnosovMap, TorusPoint2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructionParams {
    pub matrix: [[i64; 2]; 2],
    pub t: f64,
    /// Smallest admissible return half-time.
    pub n0: u32,
    pub n_max: u32,
    pub layout: LayoutParams,
    /// Fixed `θ₀`; `None` places it from the leaf of `Q`.
    pub theta0: Option<f64>,
}

impl Default for ConstructionParams {
    fn default() -> Self {
        Self {
            matrix: [[5, 2], [2, 1]],
            t: 0.1,
            n0: 3,
            n_max: 6,
            layout: LayoutParams::new(0.05),
            theta0: None,
        }
    }
}

impl ConstructionParams {
    pub fn with_t(t: f64) -> Self {
        Self {
            t,
            ..Self::default()
        }
    }
}

/// Where the strong unstable leaf of `Q` meets the blender cube.
#[derive(Debug, Clone, Serialize)]
pub struct Placement {
    pub theta0: f64,
    /// Deck translation of the lift of `q` whose unstable line is used.
    pub lattice: [i64; 2],
    /// Chart stable coordinate of that line.
    pub chart_s: f64,
    /// Sampled leaf `(x_s, x_u, x_c)` over `x_u ∈ [-2, 2]`.
    pub leaf: Vec<[f64; 3]>,
    pub center_range: [f64; 2],
    pub max_slope: f64,
    /// The leaf is a vertical disk in the superposition region.
    pub superposition: bool,
    /// `θ₀` lies where the β₂ profile is valid.
    pub admissible: bool,
    /// Recomputing the leaf with the final map (including `𝒴`) agrees.
    pub verified: bool,
}

#[derive(Debug, Clone)]
pub struct Construction {
    pub params: ConstructionParams,
    pub kan: KanMap,
    pub placement: Placement,
}

const THETA0_RANGE: [f64; 2] = [0.3, 0.7];
const FALLBACK_THETA0: f64 = 0.45;
const LEAF_SAMPLES: usize = 41;
const LATTICE_RADIUS: i64 = 60;
const CANDIDATES: usize = 16;

pub fn build(params: &ConstructionParams) -> Result<Construction> {
    let anosov = AnosovMap::from_matrix(params.matrix)?;
    let chart = search_homoclinic_chart(&anosov, params.n0, params.n_max)?;
    let layout = build_layout(&chart, params.layout)?;
    let fields = FieldSpec::new(layout, chart, params.theta0.unwrap_or(FALLBACK_THETA0));
    let kan = KanMap::new(KanParams::new(fields, params.t)?);
    let placement = match params.theta0 {
        Some(th) => fixed_placement(&kan, th)?,
        None => auto_placement(&kan)?,
    };
    let theta0 = if placement.admissible {
        placement.theta0
    } else {
        params.theta0.unwrap_or(FALLBACK_THETA0)
    };
    let fields = kan.fields().with_theta0(theta0);
    let kan = KanMap::new(KanParams::new(fields, params.t)?);
    let mut placement = placement;
    placement.verified = placement.admissible && verify_leaf(&kan, &placement)?;
    Ok(Construction {
        params: *params,
        kan,
        placement,
    })
}

/// `K_t` for the default matrix and sizes at time `t`.
pub fn default_map(t: f64) -> Result<KanMap> {
    Ok(build(&ConstructionParams::with_t(t))?.kan)
}

/// An unstable line `q + k + τe_u` through the chart window.
#[derive(Debug, Clone, Copy)]
struct Line {
    lattice: [i64; 2],
    chart_s: f64,
    /// Unstable eigen-coordinate of `q + k − p`.
    offset_u: f64,
}

fn candidate_lines(chart: &AdaptedChart) -> Vec<Line> {
    let a = &chart.anosov;
    let base = [a.q.x - a.p.x, a.q.y - a.p.y];
    let mut out = Vec::new();
    for i in -LATTICE_RADIUS..=LATTICE_RADIUS {
        for j in -LATTICE_RADIUS..=LATTICE_RADIUS {
            let v = [base[0] + i as f64, base[1] + j as f64];
            let (s, u) = a.eigen_coords(v);
            let chart_s = s / chart.unit_s;
            if chart_s.abs() < 2.0 {
                out.push(Line {
                    lattice: [i, j],
                    chart_s,
                    offset_u: u,
                });
            }
        }
    }
    out.sort_by(|x, y| x.chart_s.abs().total_cmp(&y.chart_s.abs()));
    out.truncate(CANDIDATES);
    out
}

/// Backward orbit of the leaf point over chart `(s, x_u)`, from deep inside
/// the attracting disk at `q` up to (excluding) the point itself.
fn backward_orbit(kan: &KanMap, line: &Line, xu: f64) -> Vec<TorusPoint2> {
    let chart = &kan.fields().chart;
    let a = &chart.anosov;
    let tau = xu * chart.unit_u + line.offset_u;
    let inner = kan.fields().q_weight_radii.0;
    let norm_u = a.e_u[0].hypot(a.e_u[1]);
    let lu = a.eigenvalues().0;
    let mut pts = Vec::new();
    let mut k = 1;
    loop {
        let d = tau * lu.powi(-k);
        pts.push(a.q.translate([d * a.e_u[0], d * a.e_u[1]]));
        if (d * norm_u).abs() < 0.5 * inner {
            break;
        }
        k += 1;
    }
    pts.reverse();
    pts
}

/// Height of the leaf over the orbit's endpoint, from `θ₀` at its start,
/// composing fibers of `f_t` (where `𝒴` acts the leaf sits at its zero).
fn leaf_height(kan: &KanMap, orbit: &[TorusPoint2], theta0: f64) -> Result<f64> {
    let fs = kan.fields();
    let mut th = theta0;
    for x in orbit {
        th = kan.f_fiber(&fs.classify(x), th)?.0;
    }
    Ok(th)
}

fn leaf_height_full(kan: &KanMap, orbit: &[TorusPoint2], theta0: f64) -> Result<f64> {
    let mut th = theta0;
    for x in orbit {
        th = kan.phi(x, th)?.0;
    }
    Ok(th)
}

fn leaf_samples() -> impl Iterator<Item = f64> {
    (0..LEAF_SAMPLES).map(|i| -2.0 + 4.0 * i as f64 / (LEAF_SAMPLES - 1) as f64)
}

fn evaluate(kan: &KanMap, line: &Line, theta0: f64) -> Result<Placement> {
    let p = &kan.params;
    let leaf: Result<Vec<[f64; 3]>> = leaf_samples()
        .map(|xu| {
            let orbit = backward_orbit(kan, line, xu);
            let th = leaf_height(kan, &orbit, theta0)?;
            Ok([line.chart_s, xu, p.to_center(th)])
        })
        .collect();
    let leaf = leaf?;
    let lo = leaf.iter().map(|v| v[2]).fold(f64::INFINITY, f64::min);
    let hi = leaf.iter().map(|v| v[2]).fold(f64::NEG_INFINITY, f64::max);
    let max_slope = leaf
        .windows(2)
        .map(|w| ((w[1][2] - w[0][2]) / (w[1][1] - w[0][1])).abs())
        .fold(0.0, f64::max);
    let superposition = BlenderModel::from_kan(kan).superposition_member(&leaf)?;
    Ok(Placement {
        theta0,
        lattice: line.lattice,
        chart_s: line.chart_s,
        leaf,
        center_range: [lo, hi],
        max_slope,
        superposition,
        admissible: theta0 >= THETA0_RANGE[0] && theta0 <= THETA0_RANGE[1],
        verified: false,
    })
}

fn better(a: &Placement, b: &Placement) -> bool {
    let key = |p: &Placement| (p.superposition, p.admissible);
    if key(a) != key(b) {
        return key(a) > key(b);
    }
    let spread = |p: &Placement| p.center_range[1] - p.center_range[0];
    spread(a) < spread(b)
}

fn pick(found: Vec<Placement>) -> Result<Placement> {
    found
        .into_iter()
        .reduce(|a, b| if better(&b, &a) { b } else { a })
        .ok_or(Error::InfeasibleLayout(
            "no unstable line of q crosses the chart".into(),
        ))
}

/// Chooses `θ₀` so that the leaf of `Q` is centered at `x_c = ½` over `x_u = 0`.
pub fn auto_placement(kan: &KanMap) -> Result<Placement> {
    let target = kan.params.from_center(0.5);
    let found: Result<Vec<Placement>> = candidate_lines(&kan.fields().chart)
        .par_iter()
        .map(|line| {
            let orbit = backward_orbit(kan, line, 0.0);
            let theta0 = unit_bisection(|th| leaf_height(kan, &orbit, th), target)?;
            evaluate(kan, line, theta0)
        })
        .collect();
    pick(found?)
}

/// Leaf report for a prescribed `θ₀`.
pub fn fixed_placement(kan: &KanMap, theta0: f64) -> Result<Placement> {
    if !(theta0 > 0.0 && theta0 < 1.0) {
        return Err(Error::Range("theta0".into()));
    }
    let found: Result<Vec<Placement>> = candidate_lines(&kan.fields().chart)
        .par_iter()
        .map(|line| evaluate(kan, line, theta0))
        .collect();
    let mut found = found?;
    // without a free θ₀ prefer the leaf whose center is nearest ½
    found.sort_by(|a, b| {
        let d = |p: &Placement| (0.5 * (p.center_range[0] + p.center_range[1]) - 0.5).abs();
        d(a).total_cmp(&d(b))
    });
    if let Some(best) = found.iter().find(|p| p.superposition) {
        return Ok(best.clone());
    }
    found.into_iter().next().ok_or(Error::InfeasibleLayout(
        "no unstable line of q crosses the chart".into(),
    ))
}

fn verify_leaf(kan: &KanMap, pl: &Placement) -> Result<bool> {
    let chart = &kan.fields().chart;
    let line = candidate_lines(chart)
        .into_iter()
        .find(|l| l.lattice == pl.lattice)
        .ok_or(Error::InfeasibleLayout("placement line vanished".into()))?;
    for v in &pl.leaf {
        let orbit = backward_orbit(kan, &line, v[1]);
        let th = leaf_height_full(kan, &orbit, pl.theta0)?;
        if (kan.params.to_center(th) - v[2]).abs() > 1e-9 * (1.0 + v[2].abs()) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_construction_places_theta0() {
        let c = build(&ConstructionParams::default()).unwrap();
        let p = &c.placement;
        eprintln!(
            "theta0 {} lattice {:?} s {} range {:?} slope {} sup {} adm {} ver {}",
            p.theta0,
            p.lattice,
            p.chart_s,
            p.center_range,
            p.max_slope,
            p.superposition,
            p.admissible,
            p.verified
        );
        assert_eq!(
            c.kan.fields().theta0(),
            if p.admissible { p.theta0 } else { 0.45 }
        );
    }
}
