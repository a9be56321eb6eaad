//! Catalog of analytic surfaces and the `key=value` text form of their specs.
//!
//! ```text
//! kind=tube R=1.4142135623730951 r=1
//! kind=tube R=2 r=1 lift=s3
//! kind=product a=0.6
//! kind=hopf curve="s2 x=0;1,0 y=0;0,1 z=0.2"
//! kind=revolution curve="h2 x=0;1,0 y=2;0,1"
//! kind=sphere center=0,0,0 radius=1
//! kind=cap center=0,0,0,1 radius=0.7
//! kind=equator
//! kind=canal curve="r3 x=0;1,0 y=0;0,1 z=0" r=0.1
//! kind=perturbed base="kind=product a=0.7071067811865476" amp=0.01 m=2 n=3
//! ```
//!
//! Values containing spaces are double-quoted; `\"` and `\\` escape inside quotes.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::curves::{ClosedCurve, CurveAmbient};
use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::quadrature::{gauss_legendre, Domain, QuadratureGrid};
use crate::s3::{fiber_rotate, orthonormal_frame, times_i};
use crate::surface::{Ambient, ParametricSurface};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ShapeKind {
    /// Tube of radius `r` around a circle of radius `R` in ℝ³.
    Tube { big_r: f64, r: f64 },
    /// `S¹(a) × S¹(√(1 − a²)) ⊂ S³`.
    Product { a: f64 },
    /// Hopf preimage of a closed curve in S².
    Hopf { curve: ClosedCurve },
    /// Revolution of a half-plane profile around the x-axis in ℝ³.
    Revolution { curve: ClosedCurve },
    /// Round sphere in ℝ³.
    Sphere { center: [f64; 3], radius: f64 },
    /// Round sphere `{⟨x, q⟩ = cos r}` in S³.
    Cap { center: [f64; 4], radius: f64 },
    /// The great sphere `{x₄ = 0}`.
    Equator,
    /// Tube of radius `r` around a space curve, built on its Frenet frame.
    Canal { curve: ClosedCurve, r: f64 },
    /// `base + amp·cos(m u)·cos(n v)·N`, renormalized in S³.
    Perturbed {
        base: Box<ShapeSpec>,
        amp: f64,
        m: u32,
        n: u32,
    },
}

/// A catalog shape, optionally lifted from ℝ³ to S³ by inverse
/// stereographic projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpec {
    pub kind: ShapeKind,
    pub lift: bool,
}

impl ShapeSpec {
    pub fn new(kind: ShapeKind) -> Self {
        ShapeSpec { kind, lift: false }
    }

    pub fn lifted(mut self) -> Self {
        self.lift = true;
        self
    }

    pub fn tube(big_r: f64, r: f64) -> Self {
        ShapeSpec::new(ShapeKind::Tube { big_r, r })
    }

    pub fn product(a: f64) -> Self {
        ShapeSpec::new(ShapeKind::Product { a })
    }

    pub fn clifford() -> Self {
        ShapeSpec::product(std::f64::consts::FRAC_1_SQRT_2)
    }

    pub fn equator() -> Self {
        ShapeSpec::new(ShapeKind::Equator)
    }

    pub fn hopf(curve: ClosedCurve) -> Self {
        ShapeSpec::new(ShapeKind::Hopf { curve })
    }

    pub fn revolution(curve: ClosedCurve) -> Self {
        ShapeSpec::new(ShapeKind::Revolution { curve })
    }

    pub fn sphere(center: [f64; 3], radius: f64) -> Self {
        ShapeSpec::new(ShapeKind::Sphere { center, radius })
    }

    pub fn cap(center: [f64; 4], radius: f64) -> Self {
        ShapeSpec::new(ShapeKind::Cap { center, radius })
    }

    pub fn canal(curve: ClosedCurve, r: f64) -> Self {
        ShapeSpec::new(ShapeKind::Canal { curve, r })
    }

    pub fn perturbed(base: ShapeSpec, amp: f64, m: u32, n: u32) -> Self {
        ShapeSpec::new(ShapeKind::Perturbed {
            base: Box::new(base),
            amp,
            m,
            n,
        })
    }

    fn base_ambient(&self) -> Ambient {
        match &self.kind {
            ShapeKind::Tube { .. }
            | ShapeKind::Revolution { .. }
            | ShapeKind::Sphere { .. }
            | ShapeKind::Canal { .. } => Ambient::R3,
            ShapeKind::Product { .. }
            | ShapeKind::Hopf { .. }
            | ShapeKind::Cap { .. }
            | ShapeKind::Equator => Ambient::S3,
            ShapeKind::Perturbed { base, .. } => base.ambient(),
        }
    }

    /// Ambient space of the built surface.
    pub fn ambient(&self) -> Ambient {
        if self.lift {
            Ambient::S3
        } else {
            self.base_ambient()
        }
    }

    /// Checks the parameter invariants without building.
    pub fn validate(&self) -> Result<()> {
        let finite = |name: &str, x: f64| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidShape(format!("{name} must be finite")))
            }
        };
        match &self.kind {
            ShapeKind::Tube { big_r, r } => {
                finite("R", *big_r)?;
                finite("r", *r)?;
                if !(*r > 0.0 && r < big_r) {
                    return Err(Error::InvalidShape(format!("tube needs 0 < r < R, got R={big_r} r={r}")));
                }
            }
            ShapeKind::Product { a } => {
                if !(*a > 0.0 && *a < 1.0) {
                    return Err(Error::InvalidShape(format!("product needs 0 < a < 1, got {a}")));
                }
            }
            ShapeKind::Hopf { curve } => {
                if curve.ambient != CurveAmbient::S2 {
                    return Err(Error::InvalidShape("hopf tori need an s2 curve".into()));
                }
            }
            ShapeKind::Revolution { curve } => {
                if curve.ambient != CurveAmbient::H2 {
                    return Err(Error::InvalidShape("revolution profiles are h2 curves".into()));
                }
            }
            ShapeKind::Sphere { center, radius } => {
                for c in center {
                    finite("center", *c)?;
                }
                if !(*radius > 0.0) || !radius.is_finite() {
                    return Err(Error::InvalidShape(format!("sphere radius {radius} must be positive")));
                }
            }
            ShapeKind::Cap { center, radius } => {
                for c in center {
                    finite("center", *c)?;
                }
                let n = Vector4::from(*center).norm();
                if !(n > 1e-12) {
                    return Err(Error::InvalidShape("cap center must be non-zero".into()));
                }
                if !(*radius > 0.0 && *radius < PI) {
                    return Err(Error::InvalidShape(format!("cap radius {radius} not in (0, π)")));
                }
            }
            ShapeKind::Equator => {}
            ShapeKind::Canal { curve, r } => {
                if curve.ambient != CurveAmbient::R3 {
                    return Err(Error::InvalidShape("canal surfaces need an r3 curve".into()));
                }
                if !(*r > 0.0) || !r.is_finite() {
                    return Err(Error::InvalidShape(format!("canal radius {r} must be positive")));
                }
            }
            ShapeKind::Perturbed { base, amp, .. } => {
                finite("amp", *amp)?;
                if matches!(base.kind, ShapeKind::Perturbed { .. }) {
                    return Err(Error::InvalidShape("perturbations do not nest".into()));
                }
                base.validate()?;
            }
        }
        if self.lift && self.base_ambient() != Ambient::R3 {
            return Err(Error::InvalidShape("only ℝ³ shapes can be lifted".into()));
        }
        Ok(())
    }

    /// Builds the surface and checks that it is immersed at 128² nodes.
    /// For perturbations the normal must also keep the base's orientation:
    /// a normal graph pushed past a focal point folds over, which the metric
    /// alone does not see.
    pub fn build(&self) -> Result<ParametricSurface> {
        let surface = self.build_unchecked()?;
        let base = match &self.kind {
            ShapeKind::Perturbed { base, .. } => Some(ShapeSpec { kind: base.kind.clone(), lift: self.lift }.build_unchecked()?),
            _ => None,
        };
        let q = QuadratureGrid::square(surface.domain, 128)?;
        for k in 0..q.len() {
            let (u, v, _) = q.node(k);
            let s = surface
                .curvature_at(u, v)
                .map_err(|e| Error::InvalidShape(format!("not an immersion: {e}")))?;
            if let Some(b) = &base {
                if let Ok(b) = b.curvature_at(u, v) {
                    if s.normal.dot(&b.normal) <= 0.0 {
                        return Err(Error::InvalidShape(format!("perturbation folds over near ({u:.3}, {v:.3})")));
                    }
                }
            }
        }
        Ok(surface)
    }

    pub fn build_unchecked(&self) -> Result<ParametricSurface> {
        self.validate()?;
        let base = match &self.kind {
            ShapeKind::Tube { big_r, r } => tube(*big_r, *r),
            ShapeKind::Product { a } => product(*a),
            ShapeKind::Hopf { curve } => hopf_torus(curve)?,
            ShapeKind::Revolution { curve } => revolution(curve),
            ShapeKind::Sphere { center, radius } => r3_sphere(*center, *radius),
            ShapeKind::Cap { center, radius } => s3_sphere(Vector4::from(*center).normalize(), *radius),
            ShapeKind::Equator => s3_sphere(Vector4::new(0.0, 0.0, 0.0, 1.0), PI / 2.0),
            ShapeKind::Canal { curve, r } => canal(curve, *r)?,
            ShapeKind::Perturbed { base, amp, m, n } => {
                let b = base.build_unchecked()?;
                perturb(b, *amp, *m, *n)
            }
        };
        if self.lift {
            base.lift_to_s3()
        } else {
            Ok(base)
        }
    }
}

/// Tube torus `((R + r cos v) cos u, (R + r cos v) sin u, r sin v)`.
pub fn tube(big_r: f64, r: f64) -> ParametricSurface {
    ParametricSurface::new(Ambient::R3, Domain::Torus, move |u, v| {
        let (su, cu) = u.sin_cos();
        let (sv, cv) = v.sin_cos();
        let rho = big_r + r * cv;
        Jet::from_r3(
            Vector3::new(rho * cu, rho * su, r * sv),
            Vector3::new(-rho * su, rho * cu, 0.0),
            Vector3::new(-r * sv * cu, -r * sv * su, r * cv),
            Vector3::new(-rho * cu, -rho * su, 0.0),
            Vector3::new(r * sv * su, -r * sv * cu, 0.0),
            Vector3::new(-r * cv * cu, -r * cv * su, -r * sv),
        )
    })
}

/// `(a cos u, a sin u, b cos v, b sin v)` with `b = √(1 − a²)`.
pub fn product(a: f64) -> ParametricSurface {
    let b = (1.0 - a * a).sqrt();
    ParametricSurface::new(Ambient::S3, Domain::Torus, move |u, v| {
        let (su, cu) = u.sin_cos();
        let (sv, cv) = v.sin_cos();
        Jet {
            pos: Vector4::new(a * cu, a * su, b * cv, b * sv),
            du: Vector4::new(-a * su, a * cu, 0.0, 0.0),
            dv: Vector4::new(0.0, 0.0, -b * sv, b * cv),
            duu: Vector4::new(-a * cu, -a * su, 0.0, 0.0),
            duv: Vector4::zeros(),
            dvv: Vector4::new(0.0, 0.0, -b * cv, -b * sv),
        }
    })
    .with_flat_metric([a * a, 0.0, b * b])
}

/// Round sphere of ℝ³ in the polar chart `u ∈ (0, π)`, `v ∈ [0, 2π)`.
pub fn r3_sphere(center: [f64; 3], radius: f64) -> ParametricSurface {
    let c = Vector3::from(center);
    ParametricSurface::new(Ambient::R3, Domain::SphereChart, move |th, ph| {
        let (st, ct) = th.sin_cos();
        let (sp, cp) = ph.sin_cos();
        Jet::from_r3(
            c + Vector3::new(st * cp, st * sp, ct) * radius,
            Vector3::new(ct * cp, ct * sp, -st) * radius,
            Vector3::new(-st * sp, st * cp, 0.0) * radius,
            Vector3::new(-st * cp, -st * sp, -ct) * radius,
            Vector3::new(-ct * sp, ct * cp, 0.0) * radius,
            Vector3::new(-st * cp, -st * sp, 0.0) * radius,
        )
    })
}

/// `{⟨x, q⟩ = cos r}` in S³, polar chart around `q`'s third frame vector.
pub fn s3_sphere(q: Vector4<f64>, r: f64) -> ParametricSurface {
    let [q, e1, e2, e3] = orthonormal_frame(&q);
    let (sr, cr) = r.sin_cos();
    ParametricSurface::new(Ambient::S3, Domain::SphereChart, move |th, ph| {
        let (st, ct) = th.sin_cos();
        let (sp, cp) = ph.sin_cos();
        let dir = |a: f64, b: f64, c: f64| e1 * a + e2 * b + e3 * c;
        Jet {
            pos: q * cr + dir(st * cp, st * sp, ct) * sr,
            du: dir(ct * cp, ct * sp, -st) * sr,
            dv: dir(-st * sp, st * cp, 0.0) * sr,
            duu: dir(-st * cp, -st * sp, -ct) * sr,
            duv: dir(-ct * sp, ct * cp, 0.0) * sr,
            dvv: dir(-st * cp, -st * sp, 0.0) * sr,
        }
    })
}

/// `(x(t), y(t) cos θ, y(t) sin θ)` for a profile in the upper half-plane.
pub fn revolution(curve: &ClosedCurve) -> ParametricSurface {
    let curve = curve.clone();
    ParametricSurface::new(Ambient::R3, Domain::Torus, move |t, th| {
        let j = curve.jet(t);
        let (s, c) = th.sin_cos();
        let (x, y) = (j.pos.x, j.pos.y);
        let (x1, y1) = (j.d1.x, j.d1.y);
        let (x2, y2) = (j.d2.x, j.d2.y);
        Jet::from_r3(
            Vector3::new(x, y * c, y * s),
            Vector3::new(x1, y1 * c, y1 * s),
            Vector3::new(0.0, -y * s, y * c),
            Vector3::new(x2, y2 * c, y2 * s),
            Vector3::new(0.0, -y1 * s, y1 * c),
            Vector3::new(0.0, -y * c, -y * s),
        )
    })
}

/// Tube of radius `r` around a space curve: `c(s) + r(cos v·N + sin v·B)`.
pub fn canal(curve: &ClosedCurve, r: f64) -> Result<ParametricSurface> {
    let curve = curve.clone();
    let frame = move |s: f64| -> (Vector3<f64>, Vector3<f64>, Vector3<f64>) {
        let j = curve.jet(s);
        let t = j.d1.normalize();
        let b = j.d1.cross(&j.d2);
        let b = b / b.norm();
        (j.pos, b.cross(&t), b)
    };
    // Frenet frames need non-vanishing curvature
    for k in 0..512 {
        let s = 2.0 * PI * k as f64 / 512.0;
        let (_, n, _) = frame(s);
        if !n.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidShape(format!("curve has a zero of curvature near {s}")));
        }
    }
    Ok(ParametricSurface::from_positions(Ambient::R3, Domain::Torus, move |s, v| {
        let (p, n, b) = frame(s);
        let x = p + (n * v.cos() + b * v.sin()) * r;
        Vector4::new(x.x, x.y, x.z, 0.0)
    }))
}

/// Normal graph `X + amp·cos(m u)cos(n v)·N`; in S³ the result is projected
/// back onto the sphere. Zero amplitude returns `base` itself.
pub fn perturb(base: ParametricSurface, amp: f64, m: u32, n: u32) -> ParametricSurface {
    if amp == 0.0 {
        return base;
    }
    let ambient = base.ambient;
    let domain = base.domain;
    let orientation = base.orientation;
    let inner = base.clone();
    ParametricSurface::from_positions(ambient, domain, move |u, v| {
        let s = inner.curvature_at(u, v);
        let (pos, normal) = match s {
            Ok(s) => (s.pos, s.normal),
            Err(_) => (inner.position(u, v), Vector4::zeros()),
        };
        let x = pos + normal * (amp * (m as f64 * u).cos() * (n as f64 * v).cos());
        match ambient {
            Ambient::S3 => x / x.norm(),
            Ambient::R3 => x,
        }
    })
    .with_orientation(orientation)
}

/// Real matrix of `(z₁, z₂) ↦ (−z̄₂, z̄₁)`.
fn horizontal(z: &Vector4<f64>) -> Vector4<f64> {
    Vector4::new(-z.z, z.w, z.x, -z.y)
}

/// Polarization of the Hopf map; `dπ_z(h) = 2Q(z, h)`.
fn hopf_bilinear(x: &Vector4<f64>, y: &Vector4<f64>) -> Vector3<f64> {
    Vector3::new(
        x.x * y.x + x.y * y.y - x.z * y.z - x.w * y.w,
        x.x * y.z + x.z * y.x + x.y * y.w + x.w * y.y,
        x.y * y.z + x.z * y.y - x.x * y.w - x.w * y.x,
    )
}

/// A point of the fiber over `p ∈ S²`.
pub fn hopf_fiber_point(p: &Vector3<f64>) -> Vector4<f64> {
    if p.x >= 0.0 {
        let a = ((1.0 + p.x) / 2.0).sqrt();
        Vector4::new(a, 0.0, p.y / (2.0 * a), -p.z / (2.0 * a))
    } else {
        let b = ((1.0 - p.x) / 2.0).sqrt();
        Vector4::new(p.y / (2.0 * b), p.z / (2.0 * b), b, 0.0)
    }
}

/// Horizontal lift of a spherical curve through the Hopf map, tabulated by
/// fourth-order Runge–Kutta.
#[derive(Debug, Clone)]
pub struct HopfLift {
    curve: ClosedCurve,
    nodes: Vec<Vector4<f64>>,
    step: f64,
    /// Holonomy: `z(2π) = e^{iβ} z(0)`.
    pub holonomy: f64,
}

pub const HOPF_STEPS: usize = 4096;

impl HopfLift {
    pub fn new(curve: &ClosedCurve) -> Result<Self> {
        if curve.ambient != CurveAmbient::S2 {
            return Err(Error::InvalidShape("hopf lifts need an s2 curve".into()));
        }
        let step = 2.0 * PI / HOPF_STEPS as f64;
        let mut lift = HopfLift {
            curve: curve.clone(),
            nodes: Vec::with_capacity(HOPF_STEPS + 1),
            step,
            holonomy: 0.0,
        };
        let mut z = hopf_fiber_point(&curve.jet(0.0).pos);
        lift.nodes.push(z);
        for k in 0..HOPF_STEPS {
            z = lift.rk4(k as f64 * step, &z, step);
            z /= z.norm();
            lift.nodes.push(z);
        }
        let (z0, z1) = (lift.nodes[0], lift.nodes[HOPF_STEPS]);
        // e^{iβ} = Σ z1_k · conj(z0_k)
        let re = z1.x * z0.x + z1.y * z0.y + z1.z * z0.z + z1.w * z0.w;
        let im = z1.y * z0.x - z1.x * z0.y + z1.w * z0.z - z1.z * z0.w;
        lift.holonomy = im.atan2(re);
        Ok(lift)
    }

    /// Horizontal velocity and the coefficient `w` at `(s, z)`.
    fn velocity(&self, s: f64, z: &Vector4<f64>) -> Vector4<f64> {
        let g1 = self.curve.jet(s).d1;
        let h = horizontal(z);
        let ih = times_i(&h);
        let ja = hopf_bilinear(z, &h) * 2.0;
        let jb = hopf_bilinear(z, &ih) * 2.0;
        h * (g1.dot(&ja) / 4.0) + ih * (g1.dot(&jb) / 4.0)
    }

    fn rk4(&self, s: f64, z: &Vector4<f64>, h: f64) -> Vector4<f64> {
        let k1 = self.velocity(s, z);
        let k2 = self.velocity(s + 0.5 * h, &(z + k1 * (0.5 * h)));
        let k3 = self.velocity(s + 0.5 * h, &(z + k2 * (0.5 * h)));
        let k4 = self.velocity(s + h, &(z + k3 * h));
        z + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
    }

    /// `z(s)` for `s ∈ [0, 2π]`, by a partial step from the nearest node below.
    pub fn point(&self, s: f64) -> Vector4<f64> {
        let k = ((s / self.step).floor() as usize).min(HOPF_STEPS);
        let rest = s - k as f64 * self.step;
        if rest.abs() < 1e-15 {
            return self.nodes[k];
        }
        let z = self.rk4(k as f64 * self.step, &self.nodes[k], rest);
        z / z.norm()
    }

    /// `(z, z', z'')` at `s`.
    pub fn jet(&self, s: f64) -> (Vector4<f64>, Vector4<f64>, Vector4<f64>) {
        let z = self.point(s);
        let cj = self.curve.jet(s);
        let h = horizontal(&z);
        let ih = times_i(&h);
        let ja = hopf_bilinear(&z, &h) * 2.0;
        let jb = hopf_bilinear(&z, &ih) * 2.0;
        let (wr, wi) = (cj.d1.dot(&ja) / 4.0, cj.d1.dot(&jb) / 4.0);
        let z1 = h * wr + ih * wi;
        let h1 = horizontal(&z1);
        let ih1 = times_i(&h1);
        let ja1 = (hopf_bilinear(&z1, &h) + hopf_bilinear(&z, &h1)) * 2.0;
        let jb1 = (hopf_bilinear(&z1, &ih) + hopf_bilinear(&z, &ih1)) * 2.0;
        let wr1 = (cj.d2.dot(&ja) + cj.d1.dot(&ja1)) / 4.0;
        let wi1 = (cj.d2.dot(&jb) + cj.d1.dot(&jb1)) / 4.0;
        let z2 = h * wr1 + ih * wi1 + h1 * wr + ih1 * wi;
        (z, z1, z2)
    }
}

/// Arc-length reparametrization `σ ↦ t(σ)` of a closed curve, scaled so
/// that `σ` runs over `[0, 2π)` at the constant speed `L/2π`.
struct ArcLength {
    curve: ClosedCurve,
    cumulative: Vec<f64>,
    gl: (Vec<f64>, Vec<f64>),
    length: f64,
}

const ARC_CELLS: usize = 1024;

impl ArcLength {
    fn new(curve: &ClosedCurve) -> Result<Self> {
        let gl = gauss_legendre(8);
        let h = 2.0 * PI / ARC_CELLS as f64;
        let mut arc = ArcLength {
            curve: curve.clone(),
            cumulative: Vec::with_capacity(ARC_CELLS + 1),
            gl,
            length: 0.0,
        };
        let mut total = 0.0;
        arc.cumulative.push(0.0);
        for k in 0..ARC_CELLS {
            total += arc.integral(k as f64 * h, (k + 1) as f64 * h);
            arc.cumulative.push(total);
        }
        if !(total > 0.0) {
            return Err(Error::InvalidShape("curve has zero length".into()));
        }
        arc.length = total;
        Ok(arc)
    }

    fn speed(&self, t: f64) -> f64 {
        self.curve.jet(t).d1.norm()
    }

    fn integral(&self, a: f64, b: f64) -> f64 {
        let (x, w) = &self.gl;
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        x.iter().zip(w).map(|(x, w)| w * self.speed(mid + half * x)).sum::<f64>() * half
    }

    /// `(t, dt/dσ, d²t/dσ²)` at `σ ∈ [0, 2π]`.
    fn param(&self, sigma: f64) -> (f64, f64, f64) {
        let h = 2.0 * PI / ARC_CELLS as f64;
        let target = self.length * sigma / (2.0 * PI);
        let k = self.cumulative.partition_point(|&c| c <= target).clamp(1, ARC_CELLS) - 1;
        let t0 = k as f64 * h;
        let mut t = t0 + (target - self.cumulative[k]) / self.speed(t0);
        for _ in 0..4 {
            t -= (self.cumulative[k] + self.integral(t0, t) - target) / self.speed(t);
        }
        let j = self.curve.jet(t);
        let v = j.d1.norm();
        let t1 = self.length / (2.0 * PI) / v;
        let t2 = -t1 * t1 * j.d1.dot(&j.d2) / (v * v);
        (t, t1, t2)
    }
}

/// Hopf torus `X(σ, φ) = e^{i(φ − βσ/2π)} z(t(σ))` over a closed curve in S²,
/// where `z` is the horizontal lift, `β` its holonomy and `t(σ)` the
/// constant-speed reparametrization. The chart is flat with metric
/// `[ℓ²/4 + c², −c, 1]`, `ℓ = L/2π`, `c = β/2π`.
pub fn hopf_torus(curve: &ClosedCurve) -> Result<ParametricSurface> {
    let lift = Arc::new(HopfLift::new(curve)?);
    let c = lift.holonomy / (2.0 * PI);
    let speeds: Vec<f64> = (0..256)
        .map(|k| curve.jet(2.0 * PI * k as f64 / 256.0).d1.norm())
        .collect();
    let (lo, hi) = speeds
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &s| (lo.min(s), hi.max(s)));
    let uniform = hi - lo <= 1e-12 * hi;
    let arc = if uniform { None } else { Some(Arc::new(ArcLength::new(curve)?)) };
    let speed = match &arc {
        Some(a) => a.length / (2.0 * PI),
        None => 0.5 * (lo + hi),
    };
    let l2 = lift.clone();
    let surface = ParametricSurface::new(Ambient::S3, Domain::Torus, move |s, phi| {
        let s = s.rem_euclid(2.0 * PI);
        let (z, z1, z2) = match &arc {
            None => l2.jet(s),
            Some(a) => {
                let (t, t1, t2) = a.param(s);
                let (z, z1, z2) = l2.jet(t.clamp(0.0, 2.0 * PI));
                (z, z1 * t1, z2 * (t1 * t1) + z1 * t2)
            }
        };
        let theta = phi - c * s;
        let x = fiber_rotate(&z, theta);
        let rz1 = fiber_rotate(&z1, theta);
        let irz1 = times_i(&rz1);
        let ix = times_i(&x);
        Jet {
            pos: x,
            du: rz1 - ix * c,
            dv: ix,
            duu: fiber_rotate(&z2, theta) - irz1 * (2.0 * c) - x * (c * c),
            duv: irz1 + x * c,
            dvv: -x,
        }
    });
    Ok(surface.with_flat_metric([speed * speed / 4.0 + c * c, -c, 1.0]))
}

pub fn tube_energy_profile(big_r: f64, samples: &[f64], q: &QuadratureGrid) -> Result<Vec<(f64, f64)>> {
    samples
        .iter()
        .map(|&r| {
            let s = ShapeSpec::tube(big_r, r);
            s.validate()?;
            Ok((r, tube(big_r, r).willmore_energy(q)?))
        })
        .collect()
}

fn fmt_array(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if c == '"' || c == '\\' {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

impl fmt::Display for ShapeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ShapeKind::Tube { big_r, r } => write!(f, "kind=tube R={big_r} r={r}")?,
            ShapeKind::Product { a } => write!(f, "kind=product a={a}")?,
            ShapeKind::Hopf { curve } => write!(f, "kind=hopf curve={}", quote(&curve.to_string()))?,
            ShapeKind::Revolution { curve } => {
                write!(f, "kind=revolution curve={}", quote(&curve.to_string()))?
            }
            ShapeKind::Sphere { center, radius } => {
                write!(f, "kind=sphere center={} radius={radius}", fmt_array(center))?
            }
            ShapeKind::Cap { center, radius } => {
                write!(f, "kind=cap center={} radius={radius}", fmt_array(center))?
            }
            ShapeKind::Equator => write!(f, "kind=equator")?,
            ShapeKind::Canal { curve, r } => {
                write!(f, "kind=canal curve={} r={r}", quote(&curve.to_string()))?
            }
            ShapeKind::Perturbed { base, amp, m, n } => write!(
                f,
                "kind=perturbed base={} amp={amp} m={m} n={n}",
                quote(&base.to_string())
            )?,
        }
        if self.lift {
            write!(f, " lift=s3")?;
        }
        Ok(())
    }
}

/// Splits `key=value` tokens on whitespace, honoring double quotes.
fn tokenize(s: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    let mut chars = s.chars().peekable();
    loop {
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        if chars.peek().is_none() {
            break;
        }
        let mut key = String::new();
        while let Some(&c) = chars.peek() {
            if c == '=' || c.is_whitespace() {
                break;
            }
            key.push(c);
            chars.next();
        }
        if chars.next() != Some('=') || key.is_empty() {
            return Err(Error::Parse(format!("expected key=value near {key:?}")));
        }
        let mut val = String::new();
        if chars.peek() == Some(&'"') {
            chars.next();
            let mut closed = false;
            while let Some(c) = chars.next() {
                match c {
                    '\\' => match chars.next() {
                        Some(e @ ('"' | '\\')) => val.push(e),
                        _ => return Err(Error::Parse("bad escape in quoted value".into())),
                    },
                    '"' => {
                        closed = true;
                        break;
                    }
                    c => val.push(c),
                }
            }
            if !closed {
                return Err(Error::Parse("unterminated quote".into()));
            }
            if chars.peek().is_some_and(|c| !c.is_whitespace()) {
                return Err(Error::Parse("garbage after closing quote".into()));
            }
        } else {
            while let Some(&c) = chars.peek() {
                if c.is_whitespace() {
                    break;
                }
                if c == '"' {
                    return Err(Error::Parse("stray quote".into()));
                }
                val.push(c);
                chars.next();
            }
        }
        out.push((key, val));
    }
    Ok(out)
}

struct Fields(Vec<(String, String)>);

impl Fields {
    fn take(&mut self, key: &str) -> Result<String> {
        self.take_opt(key)?
            .ok_or_else(|| Error::Parse(format!("missing field {key}")))
    }

    fn take_opt(&mut self, key: &str) -> Result<Option<String>> {
        let hits: Vec<usize> = (0..self.0.len()).filter(|&i| self.0[i].0 == key).collect();
        match hits.as_slice() {
            [] => Ok(None),
            [i] => Ok(Some(self.0.remove(*i).1)),
            _ => Err(Error::Parse(format!("field {key} given more than once"))),
        }
    }

    fn num(&mut self, key: &str) -> Result<f64> {
        parse_num(&self.take(key)?)
    }

    fn int(&mut self, key: &str) -> Result<u32> {
        let v = self.take(key)?;
        v.parse()
            .map_err(|_| Error::Parse(format!("{key}={v:?} is not a non-negative integer")))
    }

    fn array<const N: usize>(&mut self, key: &str) -> Result<[f64; N]> {
        let v = self.take(key)?;
        let xs: Vec<f64> = v.split(',').map(parse_num).collect::<Result<_>>()?;
        xs.try_into()
            .map_err(|_| Error::Parse(format!("{key} needs {N} comma-separated numbers")))
    }

    fn finish(self) -> Result<()> {
        match self.0.first() {
            None => Ok(()),
            Some((k, _)) => Err(Error::Parse(format!("unexpected field {k}"))),
        }
    }
}

fn parse_num(s: &str) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| Error::Parse(format!("bad number {s:?}")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("non-finite number {s:?}")));
    }
    Ok(v)
}

/// Parses a spec. Syntax is checked here; geometric invariants by [`ShapeSpec::validate`].
pub fn parse_shape_spec(s: &str) -> Result<ShapeSpec> {
    parse_with_depth(s, 0)
}

fn parse_with_depth(s: &str, depth: usize) -> Result<ShapeSpec> {
    if depth > 1 {
        return Err(Error::Parse("perturbations do not nest".into()));
    }
    let mut f = Fields(tokenize(s)?);
    let kind = f.take("kind")?;
    let lift = match f.take_opt("lift")?.as_deref() {
        None => false,
        Some("s3") => true,
        Some(other) => return Err(Error::Parse(format!("unknown lift target {other:?}"))),
    };
    let curve = |f: &mut Fields| -> Result<ClosedCurve> {
        crate::curves::parse_curve_unchecked(&f.take("curve")?)
    };
    let kind = match kind.as_str() {
        "tube" => ShapeKind::Tube {
            big_r: f.num("R")?,
            r: f.num("r")?,
        },
        "product" => ShapeKind::Product { a: f.num("a")? },
        "hopf" => ShapeKind::Hopf { curve: curve(&mut f)? },
        "revolution" => ShapeKind::Revolution { curve: curve(&mut f)? },
        "sphere" => ShapeKind::Sphere {
            center: f.array::<3>("center")?,
            radius: f.num("radius")?,
        },
        "cap" => ShapeKind::Cap {
            center: f.array::<4>("center")?,
            radius: f.num("radius")?,
        },
        "equator" => ShapeKind::Equator,
        "canal" => ShapeKind::Canal {
            curve: curve(&mut f)?,
            r: f.num("r")?,
        },
        "perturbed" => ShapeKind::Perturbed {
            base: Box::new(parse_with_depth(&f.take("base")?, depth + 1)?),
            amp: f.num("amp")?,
            m: f.int("m")?,
            n: f.int("n")?,
        },
        other => return Err(Error::Parse(format!("unknown shape kind {other:?}"))),
    };
    f.finish()?;
    Ok(ShapeSpec { kind, lift })
}

impl FromStr for ShapeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let spec = parse_shape_spec(s)?;
        if let ShapeKind::Hopf { curve } | ShapeKind::Revolution { curve } | ShapeKind::Canal { curve, .. } =
            &spec.kind
        {
            curve.validate()?;
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// Closed-form `W` of the tube torus `Σ_r`: `π²R²/(r√(R² − r²))`.
pub fn tube_energy_closed_form(big_r: f64, r: f64) -> f64 {
    PI * PI * big_r * big_r / (r * (big_r * big_r - r * r).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::latitude;
    use crate::s3::{hopf_raw, to_r3, PointS3};
    use approx::assert_relative_eq;

    fn q(n: usize) -> QuadratureGrid {
        QuadratureGrid::square(Domain::Torus, n).unwrap()
    }

    #[test]
    fn clifford_area_and_energy() {
        let s = ShapeSpec::clifford().build().unwrap();
        assert_relative_eq!(s.area(&q(64)).unwrap(), 2.0 * PI * PI, epsilon = 1e-10);
        assert_relative_eq!(s.willmore_energy(&q(64)).unwrap(), 2.0 * PI * PI, epsilon = 1e-10);
    }

    #[test]
    fn tube_energies_match_closed_form() {
        for (big_r, r) in [(2f64.sqrt(), 1.0), (2.0, 1.0), (3.0, 0.5)] {
            let w = tube(big_r, r).willmore_energy(&q(128)).unwrap();
            assert_relative_eq!(w, tube_energy_closed_form(big_r, r), max_relative = 1e-12);
        }
    }

    #[test]
    fn optimal_tube_is_the_projected_clifford_torus() {
        let t = tube(2f64.sqrt(), 1.0);
        let c = product(std::f64::consts::FRAC_1_SQRT_2);
        // the projection carries (u, v) to the tube point at (u, w(v)); compare as sets
        for k in 0..50 {
            let (u, v) = (0.13 * k as f64, 0.29 * k as f64 + 0.1);
            let y = to_r3(&PointS3::new(c.position(u, v)).unwrap()).unwrap();
            let rho = (y.x * y.x + y.y * y.y).sqrt();
            let d = ((rho - 2f64.sqrt()).powi(2) + y.z * y.z).sqrt() - 1.0;
            assert!(d.abs() < 1e-10);
            // and lies on the explicit tube: same azimuth u
            let p = t.position(u, (y.z).atan2(rho - 2f64.sqrt()));
            assert!((p.xyz() - y).norm() < 1e-10);
        }
    }

    #[test]
    fn hopf_lift_projects_onto_the_curve_and_is_horizontal() {
        let curve = latitude(0.3, 0.08, 3).unwrap();
        let lift = HopfLift::new(&curve).unwrap();
        for k in 0..37 {
            let s = 0.17 * k as f64;
            let (z, z1, _) = lift.jet(s);
            assert!((hopf_raw(&z) - curve.jet(s).pos).norm() < 1e-10);
            assert!(z1.dot(&times_i(&z)).abs() < 1e-12);
            assert!(z1.dot(&z).abs() < 1e-12);
        }
    }

    #[test]
    fn hopf_second_derivative_matches_finite_differences() {
        let curve = latitude(-0.2, 0.1, 2).unwrap();
        let lift = HopfLift::new(&curve).unwrap();
        let s = 1.234;
        let h = 1e-4;
        let (_, zp, _) = lift.jet(s + h);
        let (_, zm, _) = lift.jet(s - h);
        let (_, _, z2) = lift.jet(s);
        assert!(((zp - zm) / (2.0 * h) - z2).norm() < 1e-6);
    }

    #[test]
    fn hopf_over_equator_is_a_minimal_clifford_torus() {
        let s = ShapeSpec::hopf(latitude(0.0, 0.0, 0).unwrap()).build().unwrap();
        assert!(s.flat_metric().is_some());
        assert_relative_eq!(s.area(&q(64)).unwrap(), 2.0 * PI * PI, epsilon = 1e-9);
        assert!(s.max_abs_mean_curvature(&q(32)).unwrap() < 1e-9);
        let sample = s.curvature_at(0.3, 0.4).unwrap();
        assert_relative_eq!(sample.k1, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn hopf_flat_chart_matches_numerical_metric() {
        for curve in [latitude(0.4, 0.0, 0).unwrap(), latitude(0.3, 0.1, 3).unwrap()] {
            let s = ShapeSpec::hopf(curve).build().unwrap();
            let [e, f, g] = s.flat_metric().unwrap();
            for k in 0..20 {
                let c = s.curvature_at(0.3 * k as f64, 0.7 * k as f64).unwrap();
                assert!((c.e - e).abs() < 1e-10 && (c.f - f).abs() < 1e-10 && (c.g - g).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn zero_perturbation_is_the_base() {
        let base = ShapeSpec::clifford().build().unwrap();
        let same = perturb(base.clone(), 0.0, 2, 3);
        assert_eq!(same.jet(0.3, 0.9), base.jet(0.3, 0.9));
    }

    #[test]
    fn spec_text_round_trip() {
        let curve = latitude(0.2, 0.05, 2).unwrap();
        let specs = [
            ShapeSpec::tube(2f64.sqrt(), 1.0),
            ShapeSpec::tube(2.0, 1.0).lifted(),
            ShapeSpec::product(0.6),
            ShapeSpec::hopf(curve.clone()),
            ShapeSpec::equator(),
            ShapeSpec::sphere([0.0, 1.0, -2.5], 0.5),
            ShapeSpec::cap([0.0, 0.0, 0.6, 0.8], 0.7),
            ShapeSpec::perturbed(ShapeSpec::hopf(curve), 0.01, 2, 3),
        ];
        for s in specs {
            let text = s.to_string();
            assert_eq!(text.parse::<ShapeSpec>().unwrap(), s, "{text}");
        }
    }

    #[test]
    fn cli_style_spec_parses() {
        let s: ShapeSpec = "kind=tube R=1.4142 r=1".parse().unwrap();
        assert_eq!(s, ShapeSpec::tube(1.4142, 1.0));
    }

    #[test]
    fn invalid_specs_are_rejected() {
        for bad in [
            "kind=tube R=1 r=2",
            "kind=tube R=1",
            "kind=product a=1.5",
            "kind=torus",
            "kind=product a=0.5 a=0.6",
            "kind=product a=0.5 extra=1",
            "kind=product a=0.5 lift=s3",
            "kind=hopf curve=\"h2 x=0;1,0 y=2;0,1\"",
            "kind=perturbed base=\"kind=perturbed base=\\\"kind=equator\\\" amp=0 m=1 n=1\" amp=0 m=1 n=1",
            "kind=\"tube",
            "kind=cap center=0,0,0 radius=1",
        ] {
            assert!(bad.parse::<ShapeSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn tube_profile_minimum() {
        let samples: Vec<f64> = (0..=20).map(|k| 0.9 + 0.01 * k as f64).collect();
        let q = QuadratureGrid::new(Domain::Torus, 16, 64).unwrap();
        let prof = tube_energy_profile(2f64.sqrt(), &samples, &q).unwrap();
        let best = prof.iter().cloned().fold((0.0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        assert_relative_eq!(best.0, 1.0, epsilon = 1e-12);
        assert_relative_eq!(best.1, 2.0 * PI * PI, epsilon = 1e-9);
    }
}
