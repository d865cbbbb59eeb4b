//! Arithmetic on the base torus, the fibered 3-torus and the hyperbolic
//! automorphism that drives the base dynamics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduces a real number to `[0, 1)`.
#[inline]
pub fn wrap_unit(v: f64) -> f64 {
    if (0.0..1.0).contains(&v) {
        return v;
    }
    let r = v.rem_euclid(1.0);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Reduces a real number to the representative in `(-1/2, 1/2]`.
#[inline]
pub fn wrap_centered(v: f64) -> f64 {
    let r = v - v.round();
    if r <= -0.5 {
        r + 1.0
    } else {
        r
    }
}

/// Reduces a fiber coordinate of ℝ/2ℤ to `[-1, 1)`.
#[inline]
pub fn wrap_theta(theta: f64) -> f64 {
    if (-1.0..1.0).contains(&theta) {
        return theta;
    }
    let r = (theta + 1.0).rem_euclid(2.0) - 1.0;
    if r >= 1.0 {
        -1.0
    } else {
        r
    }
}

/// Quotient distance on ℝ/2ℤ.
#[inline]
pub fn theta_distance(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0);
    d.min(2.0 - d)
}

/// A point of 𝕋² with canonical coordinates in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusPoint2 {
    pub x: f64,
    pub y: f64,
}

impl TorusPoint2 {
    pub fn new(x: f64, y: f64) -> Self {
        Self {
            x: wrap_unit(x),
            y: wrap_unit(y),
        }
    }

    /// Shortest lift of `other - self`.
    #[inline]
    pub fn delta_to(&self, other: &TorusPoint2) -> [f64; 2] {
        [
            wrap_centered(other.x - self.x),
            wrap_centered(other.y - self.y),
        ]
    }

    pub fn distance(&self, other: &TorusPoint2) -> f64 {
        let d = self.delta_to(other);
        d[0].hypot(d[1])
    }

    pub fn translate(&self, v: [f64; 2]) -> Self {
        Self::new(self.x + v[0], self.y + v[1])
    }
}

/// A point of 𝕋³ = 𝕋² × ℝ/2ℤ with the fiber coordinate in `[-1, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub base: TorusPoint2,
    pub theta: f64,
}

impl Point3 {
    pub fn new(base: TorusPoint2, theta: f64) -> Self {
        Self {
            base,
            theta: wrap_theta(theta),
        }
    }

    pub fn from_coords(x: f64, y: f64, theta: f64) -> Self {
        Self::new(TorusPoint2::new(x, y), theta)
    }

    /// Product distance (Euclidean in base, quotient metric in fiber).
    pub fn distance(&self, other: &Point3) -> f64 {
        let b = self.base.distance(&other.base);
        let c = theta_distance(self.theta, other.theta);
        b.hypot(c)
    }
}

/// Which of the four fixed points carries which label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointLabels {
    pub p: [f64; 2],
    pub q: [f64; 2],
    pub r: [f64; 2],
    pub s: [f64; 2],
}

impl Default for FixedPointLabels {
    fn default() -> Self {
        Self {
            p: [0.0, 0.0],
            q: [0.5, 0.5],
            r: [0.5, 0.0],
            s: [0.0, 0.5],
        }
    }
}

/// A fixed point in exact rational form `numerators / denominator`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalPoint {
    pub num: [i64; 2],
    pub den: i64,
}

impl RationalPoint {
    pub fn to_point(self) -> TorusPoint2 {
        TorusPoint2::new(
            self.num[0] as f64 / self.den as f64,
            self.num[1] as f64 / self.den as f64,
        )
    }
}

/// Hyperbolic automorphism of 𝕋² with eigen-data and labeled fixed points.
#[derive(Debug, Clone, PartialEq)]
pub struct AnosovMap {
    entries: [[i64; 2]; 2],
    inverse: [[i64; 2]; 2],
    /// Unstable eigenvalue (|λ| > 3).
    pub lambda: f64,
    /// Unit unstable eigenvector.
    pub e_u: [f64; 2],
    /// Unit stable eigenvector.
    pub e_s: [f64; 2],
    pub p: TorusPoint2,
    pub q: TorusPoint2,
    pub r: TorusPoint2,
    pub s: TorusPoint2,
    fixed: Vec<RationalPoint>,
}

fn det(m: &[[i64; 2]; 2]) -> i64 {
    m[0][0] * m[1][1] - m[0][1] * m[1][0]
}

fn unit(v: [f64; 2]) -> [f64; 2] {
    let n = v[0].hypot(v[1]);
    [v[0] / n, v[1] / n]
}

/// All solutions of `(A - I) v ≡ 0 mod ℤ²`, exactly.
pub fn fixed_points_exact(entries: &[[i64; 2]; 2]) -> Vec<RationalPoint> {
    let m = [
        [entries[0][0] - 1, entries[0][1]],
        [entries[1][0], entries[1][1] - 1],
    ];
    let d = det(&m);
    if d == 0 {
        return Vec::new();
    }
    let n = d.abs();
    let sign = d.signum();
    // v = adj(M) k / d; only k mod d matters.
    let adj = [[m[1][1], -m[0][1]], [-m[1][0], m[0][0]]];
    let mut out = Vec::new();
    for k0 in 0..n {
        for k1 in 0..n {
            let a = (sign * (adj[0][0] * k0 + adj[0][1] * k1)).rem_euclid(n);
            let b = (sign * (adj[1][0] * k0 + adj[1][1] * k1)).rem_euclid(n);
            let pt = RationalPoint {
                num: [a, b],
                den: n,
            };
            if !out.contains(&pt) {
                out.push(pt);
            }
        }
    }
    out.sort();
    out
}

impl AnosovMap {
    /// Validates an integer matrix and computes its eigen-data and fixed points.
    pub fn from_matrix(entries: [[i64; 2]; 2]) -> Result<Self> {
        Self::with_labels(entries, FixedPointLabels::default())
    }

    pub fn with_labels(entries: [[i64; 2]; 2], labels: FixedPointLabels) -> Result<Self> {
        let d = det(&entries);
        if d.abs() != 1 {
            return Err(Error::NotUnimodular(d));
        }
        let tr = entries[0][0] + entries[1][1];
        if tr.abs() <= 2 {
            return Err(Error::NotHyperbolic(tr.abs()));
        }
        let trf = tr as f64;
        let disc = (trf * trf - 4.0 * d as f64).sqrt();
        let big = (trf + trf.signum() * disc) / 2.0;
        let small = d as f64 / big;
        if big.abs() <= 3.0 {
            return Err(Error::EigenvalueTooSmall(big.abs()));
        }
        let fixed = fixed_points_exact(&entries);
        if fixed.len() != 4 {
            return Err(Error::WrongFixedPointCount(fixed.len() as u64));
        }
        let eig = |l: f64| -> [f64; 2] {
            let (a, b, c, dd) = (
                entries[0][0] as f64,
                entries[0][1] as f64,
                entries[1][0] as f64,
                entries[1][1] as f64,
            );
            // pick the better-conditioned row of (A - l I)
            if b.abs() + (a - l).abs() >= c.abs() + (dd - l).abs() {
                unit([b, l - a])
            } else {
                unit([l - dd, c])
            }
        };
        let e_u = eig(big);
        let e_s = eig(small);
        let inverse = [
            [d * entries[1][1], -d * entries[0][1]],
            [-d * entries[1][0], d * entries[0][0]],
        ];
        let pts: Vec<TorusPoint2> = fixed.iter().map(|f| f.to_point()).collect();
        let find = |c: [f64; 2]| -> Result<TorusPoint2> {
            let target = TorusPoint2::new(c[0], c[1]);
            pts.iter()
                .copied()
                .find(|p| p.distance(&target) < 1e-12)
                .ok_or(Error::WrongFixedPointCount(fixed.len() as u64))
        };
        let (p, q, r, s) = match (
            find(labels.p),
            find(labels.q),
            find(labels.r),
            find(labels.s),
        ) {
            (Ok(p), Ok(q), Ok(r), Ok(s)) => (p, q, r, s),
            // labels not among the fixed points: fall back to sorted order
            _ => (pts[0], pts[3], pts[2], pts[1]),
        };
        Ok(Self {
            entries,
            inverse,
            lambda: big.abs(),
            e_u,
            e_s,
            p,
            q,
            r,
            s,
            fixed,
        })
    }

    pub fn entries(&self) -> [[i64; 2]; 2] {
        self.entries
    }

    pub fn inverse_entries(&self) -> [[i64; 2]; 2] {
        self.inverse
    }

    /// Signed eigenvalues `(unstable, stable)`.
    pub fn eigenvalues(&self) -> (f64, f64) {
        let tr = (self.entries[0][0] + self.entries[1][1]) as f64;
        let l = self.lambda * tr.signum();
        (l, det(&self.entries) as f64 / l)
    }

    pub fn fixed_points(&self) -> Vec<TorusPoint2> {
        self.fixed.iter().map(|f| f.to_point()).collect()
    }

    pub fn fixed_points_rational(&self) -> &[RationalPoint] {
        &self.fixed
    }

    #[inline]
    pub fn apply(&self, x: TorusPoint2) -> TorusPoint2 {
        let m = &self.entries;
        TorusPoint2 {
            x: wrap_unit(m[0][0] as f64 * x.x + m[0][1] as f64 * x.y),
            y: wrap_unit(m[1][0] as f64 * x.x + m[1][1] as f64 * x.y),
        }
    }

    #[inline]
    pub fn apply_inverse(&self, x: TorusPoint2) -> TorusPoint2 {
        let m = &self.inverse;
        TorusPoint2 {
            x: wrap_unit(m[0][0] as f64 * x.x + m[0][1] as f64 * x.y),
            y: wrap_unit(m[1][0] as f64 * x.x + m[1][1] as f64 * x.y),
        }
    }

    pub fn iterate(&self, mut x: TorusPoint2, n: i32) -> TorusPoint2 {
        if n >= 0 {
            for _ in 0..n {
                x = self.apply(x);
            }
        } else {
            for _ in 0..(-n) {
                x = self.apply_inverse(x);
            }
        }
        x
    }

    /// Linear action on a lift (no reduction).
    pub fn apply_lift(&self, v: [f64; 2]) -> [f64; 2] {
        let m = &self.entries;
        [
            m[0][0] as f64 * v[0] + m[0][1] as f64 * v[1],
            m[1][0] as f64 * v[0] + m[1][1] as f64 * v[1],
        ]
    }

    pub fn apply_integer(&self, v: [i64; 2]) -> [i64; 2] {
        let m = &self.entries;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }

    /// Operator 2-norm of the matrix; equals λ for symmetric matrices.
    pub fn norm(&self) -> f64 {
        let m = &self.entries;
        let (a, b, c, d) = (
            m[0][0] as f64,
            m[0][1] as f64,
            m[1][0] as f64,
            m[1][1] as f64,
        );
        let s = a * a + b * b + c * c + d * d;
        let dt = a * d - b * c;
        ((s + (s * s - 4.0 * dt * dt).max(0.0).sqrt()) / 2.0).sqrt()
    }

    /// `‖A⁻¹‖⁻¹`.
    pub fn conorm(&self) -> f64 {
        1.0 / self.norm()
    }

    /// Coordinates `(s, u)` with `v = s·e_s + u·e_u`.
    #[inline]
    pub fn eigen_coords(&self, v: [f64; 2]) -> (f64, f64) {
        let det = self.e_s[0] * self.e_u[1] - self.e_s[1] * self.e_u[0];
        (
            (v[0] * self.e_u[1] - v[1] * self.e_u[0]) / det,
            (self.e_s[0] * v[1] - self.e_s[1] * v[0]) / det,
        )
    }

    /// Inverse of [`eigen_coords`](Self::eigen_coords).
    #[inline]
    pub fn from_eigen(&self, s: f64, u: f64) -> [f64; 2] {
        [
            s * self.e_s[0] + u * self.e_u[0],
            s * self.e_s[1] + u * self.e_u[1],
        ]
    }
}

/// Named points on the fibered torus.
#[derive(Debug, Clone, Copy)]
pub struct NamedPoints {
    pub big_p: Point3,
    pub big_p_prime: Point3,
    pub p0: Point3,
    pub p1: Point3,
    pub q0: Point3,
    pub q1: Point3,
    pub r0: Point3,
    pub s1: Point3,
    pub big_q: Point3,
    pub big_q_prime: Point3,
}

impl NamedPoints {
    pub fn new(a: &AnosovMap, theta0: f64) -> Self {
        Self {
            big_p: Point3::new(a.p, 0.5),
            big_p_prime: Point3::new(a.p, -0.5),
            p0: Point3::new(a.p, 0.0),
            p1: Point3::new(a.p, 1.0),
            q0: Point3::new(a.q, 0.0),
            q1: Point3::new(a.q, 1.0),
            r0: Point3::new(a.r, 0.0),
            s1: Point3::new(a.s, 1.0),
            big_q: Point3::new(a.q, theta0),
            big_q_prime: Point3::new(a.q, -theta0),
        }
    }
}
