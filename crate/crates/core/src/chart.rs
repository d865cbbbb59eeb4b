//! Affine chart around `p` in which the automorphism is diagonal and a
//! homoclinic point sits at `(0, 1)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::shapes::EigenBox;
use crate::torus::{AnosovMap, TorusPoint2};

/// Axis-aligned rectangle in chart coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChartBox {
    pub s: [f64; 2],
    pub u: [f64; 2],
}

impl ChartBox {
    pub fn centered(s: f64, hs: f64, u: f64, hu: f64) -> Self {
        Self {
            s: [s - hs, s + hs],
            u: [u - hu, u + hu],
        }
    }

    pub fn contains(&self, xs: f64, xu: f64) -> bool {
        xs > self.s[0] && xs < self.s[1] && xu > self.u[0] && xu < self.u[1]
    }

    pub fn is_empty(&self) -> bool {
        self.s[0] >= self.s[1] || self.u[0] >= self.u[1]
    }

    pub fn intersect(&self, o: &ChartBox) -> ChartBox {
        ChartBox {
            s: [self.s[0].max(o.s[0]), self.s[1].min(o.s[1])],
            u: [self.u[0].max(o.u[0]), self.u[1].min(o.u[1])],
        }
    }

    /// Hausdorff distance between two rectangles (sup-norm on the corners).
    pub fn hausdorff(&self, o: &ChartBox) -> f64 {
        (self.s[0] - o.s[0])
            .abs()
            .max((self.s[1] - o.s[1]).abs())
            .max((self.u[0] - o.u[0]).abs())
            .max((self.u[1] - o.u[1]).abs())
    }
}

/// One connected piece of `C ∩ A^{-2n₀}(C)`, tagged by the lattice vector
/// that brings its image back into `C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReturnComponent {
    pub lattice: [i64; 2],
    pub chart_box: ChartBox,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReturnReport {
    pub components: Vec<ReturnComponent>,
    pub c1_distance: f64,
    pub c2_distance: f64,
    /// Components other than `C1`, `C2`.
    pub extra: Vec<ReturnComponent>,
}

#[derive(Debug, Clone)]
pub struct AdaptedChart {
    pub anosov: AnosovMap,
    pub m: [i64; 2],
    pub n0: u32,
    /// Homoclinic point `a` on the local unstable manifold of `p`.
    pub homoclinic: TorusPoint2,
    /// Lift of `a` along `e_u` from the origin.
    pub homoclinic_lift: [f64; 2],
    /// Stable eigen-coordinate (torus units) of one chart unit in `x_s`.
    pub unit_s: f64,
    /// Unstable eigen-coordinate (torus units) of one chart unit in `x_u`.
    pub unit_u: f64,
}

impl AdaptedChart {
    /// Chart coordinates of a lift vector based at `p`.
    #[inline]
    pub fn lift_to_chart(&self, v: [f64; 2]) -> (f64, f64) {
        let (s, u) = self.anosov.eigen_coords(v);
        (s / self.unit_s, u / self.unit_u)
    }

    /// Chart coordinates of a torus point via the lift nearest to `p`.
    #[inline]
    pub fn to_chart(&self, x: &TorusPoint2) -> (f64, f64) {
        self.lift_to_chart(self.anosov.p.delta_to(x))
    }

    pub fn chart_to_lift(&self, xs: f64, xu: f64) -> [f64; 2] {
        self.anosov.from_eigen(xs * self.unit_s, xu * self.unit_u)
    }

    pub fn from_chart(&self, xs: f64, xu: f64) -> TorusPoint2 {
        self.anosov.p.translate(self.chart_to_lift(xs, xu))
    }

    /// Diagonal action of `A` in chart coordinates.
    pub fn diagonal(&self, xs: f64, xu: f64) -> (f64, f64) {
        let (lu, ls) = self.anosov.eigenvalues();
        (ls * xs, lu * xu)
    }

    /// `λ^{2n₀}`.
    pub fn return_expansion(&self) -> f64 {
        self.anosov.lambda.powi(2 * self.n0 as i32)
    }

    pub fn box_c(&self) -> ChartBox {
        ChartBox::centered(0.0, 2.0, 0.0, 2.0)
    }

    pub fn box_c1(&self) -> ChartBox {
        ChartBox::centered(0.0, 2.0, 0.0, 2.0 / self.return_expansion())
    }

    pub fn box_c2(&self) -> ChartBox {
        ChartBox::centered(0.0, 2.0, 1.0, 2.0 / self.return_expansion())
    }

    /// Converts a chart rectangle to an eigen-box on the torus.
    pub fn eigen_box(&self, b: &ChartBox) -> EigenBox {
        let cs = 0.5 * (b.s[0] + b.s[1]);
        let cu = 0.5 * (b.u[0] + b.u[1]);
        EigenBox {
            center: self.from_chart(cs, cu),
            half_s: 0.5 * (b.s[1] - b.s[0]) * self.unit_s.abs(),
            half_u: 0.5 * (b.u[1] - b.u[0]) * self.unit_u.abs(),
        }
    }

    /// Largest torus-length extent of the chart window `[-3,3]²`, after one
    /// application of `A`.
    pub fn window_extent(&self) -> f64 {
        let l = self.anosov.lambda;
        3.0 * l * (self.unit_s.abs() + self.unit_u.abs())
    }

    /// All components of `C ∩ A^{-2n₀}(C)` by lattice enumeration.
    pub fn return_components(&self) -> Vec<ReturnComponent> {
        let big = self.return_expansion();
        let c = self.box_c();
        let (lu, ls) = self.anosov.eigenvalues();
        let sgn_u = lu.signum().powi(2 * self.n0 as i32);
        let sgn_s = ls.signum().powi(2 * self.n0 as i32);
        // need |ks| <= 2 + 2/big, |ku| <= 2 big + 2 in chart units
        let smax = (2.0 + 2.0 / big) * self.unit_s.abs();
        let umax = (2.0 * big + 2.0) * self.unit_u.abs();
        let e = self.anosov.e_u;
        let reach = umax + smax;
        let k0max = (reach * e[0].abs() + smax).ceil() as i64 + 1;
        let k1max = (reach * e[1].abs() + smax).ceil() as i64 + 1;
        let mut out = Vec::new();
        let major = if e[0].abs() >= e[1].abs() { 0 } else { 1 };
        let range = if major == 0 { k0max } else { k1max };
        for k in -range..=range {
            let center = if major == 0 {
                k as f64 * e[1] / e[0]
            } else {
                k as f64 * e[0] / e[1]
            };
            let c0 = center.round() as i64;
            for other in (c0 - 3)..=(c0 + 3) {
                let lat = if major == 0 { [k, other] } else { [other, k] };
                let (ks, ku) = self.lift_to_chart([lat[0] as f64, lat[1] as f64]);
                // image chart coords (sgn_s xs / big - ks, sgn_u big xu - ku) must lie in C
                let piece = ChartBox {
                    s: sorted(sgn_s * big * (ks - 2.0), sgn_s * big * (ks + 2.0)),
                    u: sorted(sgn_u * (ku - 2.0) / big, sgn_u * (ku + 2.0) / big),
                }
                .intersect(&c);
                if !piece.is_empty() {
                    out.push(ReturnComponent {
                        lattice: lat,
                        chart_box: piece,
                    });
                }
            }
        }
        out.sort_by(|a, b| a.chart_box.u[0].partial_cmp(&b.chart_box.u[0]).unwrap());
        out
    }

    /// Compares `C ∩ A^{-2n₀}(C)` against `C1 ∪ C2`.
    pub fn return_report(&self) -> ReturnReport {
        let components = self.return_components();
        let c1 = self.box_c1();
        let c2 = self.box_c2();
        let best = |target: &ChartBox| {
            components
                .iter()
                .map(|c| c.chart_box.hausdorff(target))
                .fold(f64::INFINITY, f64::min)
        };
        let extra = components
            .iter()
            .filter(|c| c.chart_box.hausdorff(&c1) > 1e-9 && c.chart_box.hausdorff(&c2) > 1e-9)
            .copied()
            .collect();
        ReturnReport {
            c1_distance: best(&c1),
            c2_distance: best(&c2),
            components,
            extra,
        }
    }

    /// `C, A(C2), …, A^{2n₀-1}(C2)` pairwise disjoint on the torus.
    pub fn orbit_boxes_disjoint(&self) -> bool {
        let mut boxes = vec![self.eigen_box(&self.box_c())];
        let c2 = self.eigen_box(&self.box_c2());
        for i in 1..2 * self.n0 {
            boxes.push(c2.image_n(&self.anosov, i));
        }
        for i in 0..boxes.len() {
            for j in (i + 1)..boxes.len() {
                if boxes[i].intersects(&self.anosov, &boxes[j]) {
                    return false;
                }
            }
        }
        true
    }
}

fn sorted(a: f64, b: f64) -> [f64; 2] {
    if a <= b {
        [a, b]
    } else {
        [b, a]
    }
}

/// Builds the chart from the lattice vector `m`, trying `n₀ = n0_min..=n_max`.
pub fn homoclinic_chart(
    a: &AnosovMap,
    m: [i64; 2],
    n0_min: u32,
    n_max: u32,
) -> Result<AdaptedChart> {
    if m == [0, 0] {
        return Err(Error::DegenerateVector);
    }
    let (cs, cu) = a.eigen_coords([m[0] as f64, m[1] as f64]);
    let (lu, ls) = a.eigenvalues();
    for n0 in n0_min.max(1)..=n_max {
        let unit_u = cu * lu.powi(-(n0 as i32));
        let unit_s = -cs * ls.powi(n0 as i32);
        let lift = a.from_eigen(0.0, unit_u);
        let chart = AdaptedChart {
            anosov: a.clone(),
            m,
            n0,
            homoclinic: TorusPoint2::new(lift[0], lift[1]),
            homoclinic_lift: lift,
            unit_s,
            unit_u,
        };
        if chart.window_extent() < 0.25 && chart.orbit_boxes_disjoint() {
            return Ok(chart);
        }
    }
    Err(Error::NoValidN0(n_max))
}

/// Tries lattice vectors in order of increasing norm; the first admissible chart wins.
pub fn search_homoclinic_chart(a: &AnosovMap, n0_min: u32, n_max: u32) -> Result<AdaptedChart> {
    let mut candidates = Vec::new();
    for i in -3i64..=3 {
        for j in -3i64..=3 {
            if (i, j) != (0, 0) {
                candidates.push([i, j]);
            }
        }
    }
    candidates.sort_by_key(|v| {
        (
            v[0] * v[0] + v[1] * v[1],
            std::cmp::Reverse(v[0]),
            std::cmp::Reverse(v[1]),
        )
    });
    for m in candidates {
        if let Ok(c) = homoclinic_chart(a, m, n0_min, n_max) {
            return Ok(c);
        }
    }
    Err(Error::NoValidN0(n_max))
}
