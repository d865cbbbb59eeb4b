//! Small sets on 𝕋²: parallelograms aligned with the eigenframe and metric disks.

use serde::{Deserialize, Serialize};

use crate::torus::{AnosovMap, TorusPoint2};

/// Parallelogram `center + [-half_s, half_s]·e_s + [-half_u, half_u]·e_u`,
/// half-widths in torus length units. Meant for sets of diameter well below ½.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenBox {
    pub center: TorusPoint2,
    pub half_s: f64,
    pub half_u: f64,
}

/// Euclidean disk on 𝕋².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub center: TorusPoint2,
    pub radius: f64,
}

impl Disk {
    pub fn contains(&self, x: &TorusPoint2) -> bool {
        self.center.distance(x) < self.radius
    }

    pub fn distance(&self, x: &TorusPoint2) -> f64 {
        (self.center.distance(x) - self.radius).max(0.0)
    }

    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.radius * self.radius
    }
}

fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let len2 = ab[0] * ab[0] + ab[1] * ab[1];
    let t = if len2 > 0.0 {
        ((ap[0] * ab[0] + ap[1] * ab[1]) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (ap[0] - t * ab[0]).hypot(ap[1] - t * ab[1])
}

impl EigenBox {
    /// Offset of `x` from the center in eigen-coordinates.
    #[inline]
    pub fn local(&self, a: &AnosovMap, x: &TorusPoint2) -> (f64, f64) {
        a.eigen_coords(self.center.delta_to(x))
    }

    pub fn contains(&self, a: &AnosovMap, x: &TorusPoint2) -> bool {
        let (s, u) = self.local(a, x);
        s.abs() < self.half_s && u.abs() < self.half_u
    }

    /// Euclidean distance from `x` to the closed parallelogram.
    pub fn distance(&self, a: &AnosovMap, x: &TorusPoint2) -> f64 {
        let d = self.center.delta_to(x);
        let (s, u) = a.eigen_coords(d);
        if s.abs() <= self.half_s && u.abs() <= self.half_u {
            return 0.0;
        }
        let corner = |cs: f64, cu: f64| a.from_eigen(cs * self.half_s, cu * self.half_u);
        let c = [
            corner(-1.0, -1.0),
            corner(1.0, -1.0),
            corner(1.0, 1.0),
            corner(-1.0, 1.0),
        ];
        (0..4)
            .map(|i| segment_distance(d, c[i], c[(i + 1) % 4]))
            .fold(f64::INFINITY, f64::min)
    }

    /// Area of the parallelogram.
    pub fn area(&self, a: &AnosovMap) -> f64 {
        let cross = (a.e_s[0] * a.e_u[1] - a.e_s[1] * a.e_u[0]).abs();
        4.0 * self.half_s * self.half_u * cross
    }

    /// Image under the automorphism, which is exactly another eigen-box.
    pub fn image(&self, a: &AnosovMap) -> EigenBox {
        let (lu, ls) = a.eigenvalues();
        EigenBox {
            center: a.apply(self.center),
            half_s: self.half_s * ls.abs(),
            half_u: self.half_u * lu.abs(),
        }
    }

    pub fn image_n(&self, a: &AnosovMap, n: u32) -> EigenBox {
        (0..n).fold(*self, |b, _| b.image(a))
    }

    /// Open-set intersection test between two eigen-boxes.
    pub fn intersects(&self, a: &AnosovMap, other: &EigenBox) -> bool {
        let d = self.center.delta_to(&other.center);
        for i in -1..=1 {
            for j in -1..=1 {
                let (s, u) = a.eigen_coords([d[0] + i as f64, d[1] + j as f64]);
                if s.abs() < self.half_s + other.half_s && u.abs() < self.half_u + other.half_u {
                    return true;
                }
            }
        }
        false
    }

    /// Exact intersection area with another eigen-box (nearest images only).
    pub fn intersection_area(&self, a: &AnosovMap, other: &EigenBox) -> f64 {
        let d = self.center.delta_to(&other.center);
        let cross = (a.e_s[0] * a.e_u[1] - a.e_s[1] * a.e_u[0]).abs();
        let mut total = 0.0;
        for i in -1..=1 {
            for j in -1..=1 {
                let (s, u) = a.eigen_coords([d[0] + i as f64, d[1] + j as f64]);
                let ws = overlap(
                    -self.half_s,
                    self.half_s,
                    s - other.half_s,
                    s + other.half_s,
                );
                let wu = overlap(
                    -self.half_u,
                    self.half_u,
                    u - other.half_u,
                    u + other.half_u,
                );
                total += ws * wu * cross;
            }
        }
        total
    }

    /// Whether the box is within distance `gap` of a disk.
    pub fn near_disk(&self, a: &AnosovMap, disk: &Disk, gap: f64) -> bool {
        self.distance(a, &disk.center) < disk.radius + gap
    }
}

fn overlap(a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
    (a1.min(b1) - a0.max(b0)).max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn anosov() -> AnosovMap {
        AnosovMap::from_matrix([[5, 2], [2, 1]]).unwrap()
    }

    #[test]
    fn image_box_matches_pointwise_image() {
        let a = anosov();
        let b = EigenBox {
            center: TorusPoint2::new(0.3, 0.7),
            half_s: 0.01,
            half_u: 0.002,
        };
        let img = b.image(&a);
        let corner = b
            .center
            .translate(a.from_eigen(0.999 * b.half_s, -0.999 * b.half_u));
        assert!(img.contains(&a, &a.apply(corner)));
        let outside = b.center.translate(a.from_eigen(1.01 * b.half_s, 0.0));
        assert!(!img.contains(&a, &a.apply(outside)));
        assert!((img.area(&a) - b.area(&a)).abs() < 1e-15);
    }

    #[test]
    fn distance_to_box_by_brute_force() {
        let a = anosov();
        let b = EigenBox {
            center: TorusPoint2::new(0.5, 0.5),
            half_s: 0.03,
            half_u: 0.01,
        };
        let x = TorusPoint2::new(0.6, 0.45);
        let mut best = f64::INFINITY;
        let n = 400;
        for i in 0..=n {
            for j in 0..=n {
                let s = -b.half_s + 2.0 * b.half_s * i as f64 / n as f64;
                let u = -b.half_u + 2.0 * b.half_u * j as f64 / n as f64;
                let y = b.center.translate(a.from_eigen(s, u));
                best = best.min(y.distance(&x));
            }
        }
        assert!((b.distance(&a, &x) - best).abs() < 1e-4);
        assert_eq!(b.distance(&a, &b.center), 0.0);
    }

    #[test]
    fn intersection_area_of_overlapping_boxes() {
        let a = anosov();
        let b1 = EigenBox {
            center: TorusPoint2::new(0.0, 0.0),
            half_s: 0.02,
            half_u: 0.02,
        };
        let shift = a.from_eigen(0.02, 0.0);
        let b2 = EigenBox {
            center: TorusPoint2::new(shift[0], shift[1]),
            ..b1
        };
        assert!(b1.intersects(&a, &b2));
        assert!((b1.intersection_area(&a, &b2) - 0.02 * 0.04).abs() < 1e-12);
        let far = EigenBox {
            center: TorusPoint2::new(0.5, 0.5),
            ..b1
        };
        assert!(!b1.intersects(&a, &far));
        assert_eq!(b1.intersection_area(&a, &far), 0.0);
    }
}
