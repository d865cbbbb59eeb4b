//! The skew products `f_t`, `f̃_t = f_t∘𝒴_t`, the odd extension `f̂_t` and
//! `K_t = R∘f̂_t` on 𝕋³ = 𝕋²×ℝ/2ℤ.

use std::f64::consts::PI;

use crate::bump::Bump1D;
use crate::error::{Error, Result};
use crate::fields::{BaseRegion, FiberField, FieldSpec};
use crate::torus::{wrap_theta, AnosovMap, Point3, TorusPoint2};

/// A map of 𝕋³ of the form `(x, θ) ↦ (Ax, ψ_x(θ))`.
pub trait SkewMap: Sync {
    fn anosov(&self) -> &AnosovMap;

    /// Fiber image `ψ_x(θ)` (canonical in `[-1, 1)`) and `∂θψ_x(θ)`.
    fn fiber_jet(&self, x: &TorusPoint2, theta: f64) -> Result<(f64, f64)>;

    fn fiber_image(&self, x: &TorusPoint2, theta: f64) -> Result<f64> {
        Ok(self.fiber_jet(x, theta)?.0)
    }

    /// Solves `ψ_x(θ) = target` for `θ`, where `x` is the source base point.
    fn fiber_preimage(&self, x: &TorusPoint2, target: f64) -> Result<f64> {
        let increasing = self.fiber_jet(x, 0.0)?.1 > 0.0;
        circle_bisection(|th| self.fiber_image(x, th), target, increasing)
    }

    fn apply(&self, p: &Point3) -> Result<Point3> {
        Ok(Point3 {
            base: self.anosov().apply(p.base),
            theta: self.fiber_image(&p.base, p.theta)?,
        })
    }

    /// Image together with the fiber derivative at `p`.
    fn step(&self, p: &Point3) -> Result<(Point3, f64)> {
        let (th, d) = self.fiber_jet(&p.base, p.theta)?;
        Ok((
            Point3 {
                base: self.anosov().apply(p.base),
                theta: th,
            },
            d,
        ))
    }

    fn fiber_derivative(&self, p: &Point3) -> Result<f64> {
        Ok(self.fiber_jet(&p.base, p.theta)?.1)
    }

    fn inverse(&self, p: &Point3) -> Result<Point3> {
        let x = self.anosov().apply_inverse(p.base);
        Ok(Point3 {
            base: x,
            theta: self.fiber_preimage(&x, p.theta)?,
        })
    }

    fn orbit(&self, p: &Point3, n: usize) -> Result<Vec<Point3>> {
        let mut out = Vec::with_capacity(n + 1);
        let mut cur = *p;
        out.push(cur);
        for _ in 0..n {
            cur = self.apply(&cur)?;
            out.push(cur);
        }
        Ok(out)
    }
}

/// Solves `f(θ) = target` on ℝ/2ℤ for a monotone circle map by bisection on
/// the unwrapped lift.
pub fn circle_bisection<F: Fn(f64) -> Result<f64>>(
    f: F,
    target: f64,
    increasing: bool,
) -> Result<f64> {
    let f0 = f(-1.0)?;
    let lift = |th: f64| -> Result<f64> {
        let v = f(th)?;
        let mut d = v - f0;
        if increasing {
            d = d.rem_euclid(2.0);
        } else {
            d = -(-d).rem_euclid(2.0);
        }
        Ok(d)
    };
    let mut goal = target - f0;
    if increasing {
        goal = goal.rem_euclid(2.0);
    } else {
        goal = -(-goal).rem_euclid(2.0);
    }
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = lift(mid)?;
        let below = if increasing { v < goal } else { v > goal };
        if below {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            return Ok(wrap_theta(0.5 * (lo + hi)));
        }
    }
    Err(Error::BisectionFailure)
}

/// Largest relative change of a fiber derivative caused by the center translation.
pub const DERIV_BUDGET: f64 = 1e-4;

/// Parameters of the family: time `t`, blender multiplier `μ = e^{2n₀κt}`
/// and the center translation `ν = μ − 1`.
#[derive(Debug, Clone)]
pub struct KanParams {
    pub t: f64,
    pub n0: u32,
    pub mu: f64,
    pub nu: f64,
    /// Scale of the linearizing center coordinate `x_c = σ tan(π(θ−½))`.
    pub center_scale: f64,
    pub fields: FieldSpec,
    /// Fiber cutoff of the center translation.
    pub correction: Bump1D,
}

impl KanParams {
    pub fn new(fields: FieldSpec, t: f64) -> Result<Self> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::Range("t".into()));
        }
        let n0 = fields.chart.n0;
        let eps = fields.epsilon();
        let mu = (2.0 * n0 as f64 * fields.kappa * t).exp();
        let correction = Bump1D {
            support: [0.5 - 0.9 * eps, 0.5 + 0.9 * eps],
            plateau: [0.5 - 0.25 * eps, 0.5 + 0.25 * eps],
        };
        // the cube window must fit the cutoff plateau, and the translation may
        // change fiber derivatives by at most DERIV_BUDGET
        let slope = (0..=4096)
            .map(|i| {
                let th = correction.support[0]
                    + (correction.support[1] - correction.support[0]) * i as f64 / 4096.0;
                correction.deriv(th).abs()
            })
            .fold(0.0, f64::max);
        let window_scale = 4.0 * mu / (0.25 * PI * eps).tan();
        let center_scale = window_scale.max((mu - 1.0) * slope / (PI * DERIV_BUDGET));
        let p = Self {
            t,
            n0,
            mu,
            nu: mu - 1.0,
            center_scale,
            fields,
            correction,
        };
        p.check_window()?;
        Ok(p)
    }

    /// The center window of the blender cube plus its images must fit in the
    /// plateau of the cutoff, which must fit inside the β₁ plateau.
    pub fn check_window(&self) -> Result<()> {
        let eps = self.fields.epsilon();
        let reach = self.to_center(0.5 + 0.25 * eps);
        if reach < 3.0 * self.mu + self.nu.abs() - 1e-9 {
            return Err(Error::WindowMismatch(format!(
                "center plateau {reach} shorter than {}",
                3.0 * self.mu + self.nu.abs()
            )));
        }
        if self.correction.support[1] - 0.5 >= eps {
            return Err(Error::WindowMismatch("cutoff leaves the β₁ plateau".into()));
        }
        Ok(())
    }

    /// Overrides the center translation (for diagnostics).
    pub fn with_nu(mut self, nu: f64) -> Self {
        self.nu = nu;
        self
    }

    #[inline]
    pub fn to_center(&self, theta: f64) -> f64 {
        self.center_scale * (PI * (theta - 0.5)).tan()
    }

    #[inline]
    pub fn from_center(&self, xc: f64) -> f64 {
        0.5 + (xc / self.center_scale).atan() / PI
    }

    pub fn anosov(&self) -> &AnosovMap {
        &self.fields.layout.anosov
    }

    /// Chart coordinates `(x_s, x_u, x_c)` of a point of 𝕋²×[0,1].
    pub fn chart3(&self, x: &TorusPoint2, theta: f64) -> [f64; 3] {
        let (s, u) = self.fields.chart.to_chart(x);
        [s, u, self.to_center(theta)]
    }

    pub fn from_chart3(&self, c: [f64; 3]) -> (TorusPoint2, f64) {
        (
            self.fields.chart.from_chart(c[0], c[1]),
            self.from_center(c[2]),
        )
    }
}

/// `K_t` with access to the intermediate maps.
#[derive(Debug, Clone)]
pub struct KanMap {
    pub params: KanParams,
    last_tube: usize,
}

impl KanMap {
    pub fn new(params: KanParams) -> Self {
        let last_tube = 2 * params.n0 as usize - 1;
        Self { params, last_tube }
    }

    pub fn t(&self) -> f64 {
        self.params.t
    }

    pub fn fields(&self) -> &FieldSpec {
        &self.params.fields
    }

    /// Center translation `x_c ↦ x_c − ν·χ·ζ(θ)` in θ-coordinates, with derivative.
    fn translate(&self, chi: f64, th: f64) -> (f64, f64) {
        let p = &self.params;
        let z = p.correction.value(th);
        if z == 0.0 || chi == 0.0 || p.nu == 0.0 {
            return (th, 1.0);
        }
        let xc = p.to_center(th);
        let dz = p.correction.deriv(th);
        let dth_dxc = 1.0 / (PI * p.center_scale * (1.0 + (xc / p.center_scale).powi(2)));
        let xn = xc - p.nu * chi * z;
        let dxn = 1.0 - p.nu * chi * dz * dth_dxc;
        let out = p.from_center(xn);
        let dout =
            dxn * (1.0 + (xc / p.center_scale).powi(2)) / (1.0 + (xn / p.center_scale).powi(2));
        (out, dout)
    }

    /// Fiber of `f_t` over a classified base point (no `𝒴` part), with derivative.
    pub fn f_fiber(&self, region: &BaseRegion, th: f64) -> Result<(f64, f64)> {
        let fs = &self.params.fields;
        let ff = fs.x_field(region);
        let (y, d) = fs.flow_with_derivative(&ff, self.params.t, th)?;
        if let BaseRegion::Tube { index, alpha, .. } = *region {
            if index == self.last_tube {
                let (z, dz) = self.translate(alpha, y);
                return Ok((z, d * dz));
            }
        }
        Ok((y, d))
    }

    /// `φ_{x,t}(θ)` for `θ ∈ [0, 1]`: fiber of `f̃_t = f_t∘𝒴_t`, with derivative.
    pub fn phi(&self, x: &TorusPoint2, th: f64) -> Result<(f64, f64)> {
        let fs = &self.params.fields;
        let region = fs.classify(x);
        match fs.y_field(&region) {
            FiberField::Zero => self.f_fiber(&region, th),
            yf => {
                // supports of 𝒳 and 𝒴 are disjoint
                fs.flow_with_derivative(&yf, self.params.t, th)
            }
        }
    }

    /// Inverse of `φ_{x,t}` on `[0, 1]`.
    pub fn phi_inverse(&self, x: &TorusPoint2, y: f64) -> Result<f64> {
        if y == 0.0 || y == 1.0 {
            return Ok(y);
        }
        let fs = &self.params.fields;
        let region = fs.classify(x);
        let t = self.params.t;
        match fs.y_field(&region) {
            FiberField::Zero => {}
            yf => return clamp_unit(fs.flow(&yf, -t, y)),
        }
        if let BaseRegion::Tube { index, alpha, .. } = region {
            if index == self.last_tube && alpha > 0.0 && self.params.nu != 0.0 {
                return unit_bisection(|th| Ok(self.f_fiber(&region, th)?.0), y);
            }
        }
        clamp_unit(fs.flow(&fs.x_field(&region), -t, y))
    }

    /// `f̂_t`, the odd extension to ℝ/2ℤ.
    pub fn f_hat_fiber(&self, x: &TorusPoint2, th: f64) -> Result<(f64, f64)> {
        if th >= 0.0 {
            self.phi(x, th)
        } else {
            let (v, d) = self.phi(x, -th)?;
            Ok((-v, d))
        }
    }

    pub fn f_hat(&self, p: &Point3) -> Result<Point3> {
        let (th, _) = self.f_hat_fiber(&p.base, p.theta)?;
        Ok(Point3 {
            base: self.anosov().apply(p.base),
            theta: canonical(th),
        })
    }

    /// `f̃_t` on 𝕋²×[0,1].
    pub fn f_tilde(&self, x: &TorusPoint2, th: f64) -> Result<(TorusPoint2, f64)> {
        Ok((self.anosov().apply(*x), self.phi(x, th)?.0))
    }

    /// `f_t` (without `𝒴`) on 𝕋²×[0,1].
    pub fn f_t(&self, x: &TorusPoint2, th: f64) -> Result<(TorusPoint2, f64)> {
        let region = self.params.fields.classify(x);
        Ok((self.anosov().apply(*x), self.f_fiber(&region, th)?.0))
    }
}

#[inline]
fn canonical(th: f64) -> f64 {
    if th == 0.0 {
        0.0
    } else {
        wrap_theta(th)
    }
}

fn clamp_unit(v: Result<f64>) -> Result<f64> {
    v.map(|x| x.clamp(0.0, 1.0))
}

/// Solves `f(θ) = y` for an increasing `f` on `[0, 1]`.
pub fn unit_bisection<F: Fn(f64) -> Result<f64>>(f: F, y: f64) -> Result<f64> {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid)? < y {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            return Ok(0.5 * (lo + hi));
        }
    }
    Err(Error::BisectionFailure)
}

impl SkewMap for KanMap {
    fn anosov(&self) -> &AnosovMap {
        self.params.anosov()
    }

    #[inline]
    fn fiber_jet(&self, x: &TorusPoint2, th: f64) -> Result<(f64, f64)> {
        if th >= 0.0 {
            let (v, d) = self.phi(x, th)?;
            Ok((canonical(-v), -d))
        } else {
            let (v, d) = self.phi(x, -th)?;
            Ok((canonical(v), -d))
        }
    }

    fn fiber_preimage(&self, x: &TorusPoint2, target: f64) -> Result<f64> {
        let y = canonical(target);
        if y <= 0.0 {
            // came from θ ∈ [0, 1] with −φ(θ) = y; y = −1 stands for 1
            let th = self.phi_inverse(x, -y)?;
            Ok(canonical(th))
        } else {
            let th = self.phi_inverse(x, y)?;
            Ok(canonical(-th))
        }
    }
}
